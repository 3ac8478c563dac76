#include "gbdt/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <vector>

namespace gbdt {

namespace {

using nlohmann::ordered_json;

void append_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
}

std::string format_double(double x) {
  if (std::isnan(x)) return "\"nan\"";
  if (std::isinf(x)) return x > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_value(std::string& out, const ordered_json& v, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case ordered_json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        append_escaped(out, it.key());
        out += ": ";
        write_value(out, it.value(), indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case ordered_json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Short leaf arrays (e.g. complex [re, im]) stay on one line.
      bool leaf = true;
      for (const auto& e : v) {
        if (e.is_object() || e.is_array()) {
          leaf = false;
          break;
        }
      }
      if (leaf && v.size() <= 8) {
        out += "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          write_value(out, v[i], indent);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad_in;
        write_value(out, v[i], indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case ordered_json::value_t::string:
      append_escaped(out, v.get<std::string>());
      return;
    case ordered_json::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      return;
    case ordered_json::value_t::number_integer:
      out += std::to_string(v.get<long long>());
      return;
    case ordered_json::value_t::number_unsigned:
      out += std::to_string(v.get<unsigned long long>());
      return;
    case ordered_json::value_t::number_float:
      out += format_double(v.get<double>());
      return;
    case ordered_json::value_t::null:
    default:
      out += "null";
      return;
  }
}

std::string csv_cell(const ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
  }
  return "";
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const ordered_json& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out << ',';
      auto it = row.find(header[i]);
      if (it != row.end()) out << csv_cell(*it);
    }
    out << '\n';
  }
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

// Flattens a [re, im] pair stored under `key` into `key_re`, `key_im` columns.
ordered_json flatten_complex_column(const ordered_json& rows, const std::string& key) {
  ordered_json out = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json flat;
    for (auto it = row.begin(); it != row.end(); ++it) {
      if (it.key() == key && it.value().is_array() && it.value().size() == 2) {
        flat[key + "_re"] = it.value()[0];
        flat[key + "_im"] = it.value()[1];
      } else {
        flat[it.key()] = it.value();
      }
    }
    out.push_back(std::move(flat));
  }
  return out;
}

}  // namespace

StageSet StageSet::all() {
  StageSet s;
  s.validate = s.iterate = s.darboux = s.fundamental = s.factorize = s.nonstationary = true;
  return s;
}

StageSet StageSet::parse(const std::string& name) {
  StageSet s;
  if (name == "validate") s.validate = true;
  else if (name == "iterate") s.iterate = true;
  else if (name == "darboux") s.darboux = true;
  else if (name == "fundamental") s.fundamental = true;
  else if (name == "factorize") s.factorize = true;
  else if (name == "nonstationary") s.nonstationary = true;
  else if (name == "all") s = all();
  else throw InvalidRequest("unknown stage \"" + name + "\"");
  return s;
}

StageSet& StageSet::operator|=(const StageSet& o) {
  validate |= o.validate;
  iterate |= o.iterate;
  darboux |= o.darboux;
  fundamental |= o.fundamental;
  factorize |= o.factorize;
  nonstationary |= o.nonstationary;
  return *this;
}

void StageSet::resolve() {
  if (darboux || fundamental || factorize || nonstationary) iterate = true;
  if (iterate) validate = true;
}

bool StageSet::any() const {
  return validate || iterate || darboux || fundamental || factorize || nonstationary;
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "csv-bundle") return ReportFormat::CsvBundle;
  throw InvalidRequest("unknown report format \"" + s + "\"");
}

std::string report_json_string(const ordered_json& doc) {
  std::string out;
  out.reserve(4096);
  write_value(out, doc, 0);
  out += '\n';
  return out;
}

void emit_report(const RunReport& report, std::ostream& os) {
  os << report_json_string(report.doc);
}

void emit_report(const RunReport& report, const std::filesystem::path& path,
                 ReportFormat format) {
  if (format == ReportFormat::Json) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw IoError("cannot open " + path.string() + " for writing");
    }
    out << report_json_string(report.doc);
    if (!out) {
      throw IoError("failed writing " + path.string());
    }
    return;
  }

  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) {
    throw IoError("cannot create directory " + path.string() + ": " + ec.message());
  }
  {
    std::ofstream out(path / "report.json", std::ios::binary);
    if (!out) {
      throw IoError("cannot open " + (path / "report.json").string() + " for writing");
    }
    out << report_json_string(report.doc);
  }
  const ordered_json& doc = report.doc;

  auto table = [&](const char* section, const char* field) -> ordered_json {
    if (!doc.contains(section) || !doc[section].contains(field)) {
      return ordered_json::array();
    }
    return doc[section][field];
  };

  write_csv(path / "steps.csv",
            {"k", "identity_residual", "s_hermitian_residual", "s_min_pivot", "s_condition",
             "cond_warning", "s_positive", "c_involution_residual", "c_hermitian_residual"},
            table("iterate", "steps"));
  {
    ordered_json rows = flatten_complex_column(table("darboux", "intertwining"), "z");
    write_csv(path / "intertwining.csv", {"k", "z_re", "z_im", "residual"}, rows);
  }
  {
    ordered_json rows = flatten_complex_column(table("darboux", "transfer_inverse"), "z");
    write_csv(path / "transfer_inverse.csv", {"k", "z_re", "z_im", "residual"}, rows);
  }
  {
    ordered_json rows = flatten_complex_column(table("fundamental", "agreement"), "z");
    write_csv(path / "conjugation.csv", {"k", "z_re", "z_im", "residual"}, rows);
  }
  write_csv(path / "factorization.csv",
            {"k", "unitarity_residual", "conjugation_residual", "q_breve_consistency",
             "q_hat_consistency"},
            table("factorize", "factors"));
  write_csv(path / "nonstationary.csv", {"k", "t", "residual", "scale"},
            table("nonstationary", "samples"));
}

}  // namespace gbdt
