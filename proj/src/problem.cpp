#include "gbdt/problem.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace gbdt {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& ctx, const std::string& what) {
  throw ParseError(ctx + ": " + what);
}

void reject_unknown_fields(const json& obj, const std::string& ctx,
                           std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* name : allowed) {
      if (it.key() == name) {
        known = true;
        break;
      }
    }
    if (!known) {
      fail(ctx, "unknown field \"" + it.key() + "\"");
    }
  }
}

const json& require_field(const json& obj, const std::string& ctx, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) {
    fail(ctx, "missing field \"" + std::string(name) + "\"");
  }
  return *it;
}

const json* optional_field(const json& obj, const char* name) {
  auto it = obj.find(name);
  return it == obj.end() ? nullptr : &*it;
}

void require_object(const json& v, const std::string& ctx) {
  if (!v.is_object()) fail(ctx, "expected an object");
}

double get_number(const json& v, const std::string& ctx) {
  if (!v.is_number()) fail(ctx, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(ctx, "non-finite number");
  return x;
}

int get_positive_int(const json& v, const std::string& ctx) {
  if (!v.is_number_integer()) fail(ctx, "expected an integer");
  const long long x = v.get<long long>();
  if (x < 1) fail(ctx, "expected a positive integer");
  return static_cast<int>(x);
}

std::uint64_t get_seed(const json& v, const std::string& ctx) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    fail(ctx, "expected a nonnegative integer seed");
  }
  return v.get<std::uint64_t>();
}

Complex get_complex(const json& v, const std::string& ctx) {
  if (!v.is_array() || v.size() != 2) {
    fail(ctx, "complex scalars are [re, im] two-element arrays");
  }
  return {get_number(v[0], ctx + "[0]"), get_number(v[1], ctx + "[1]")};
}

ComplexMatrix get_matrix(const json& v, const std::string& ctx) {
  if (!v.is_array() || v.empty()) {
    fail(ctx, "expected a nonempty array of rows");
  }
  const std::size_t rows = v.size();
  std::size_t cols = 0;
  ComplexMatrix out;
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = v[r];
    if (!row.is_array() || row.empty()) {
      fail(ctx + "[" + std::to_string(r) + "]", "expected a nonempty row array");
    }
    if (r == 0) {
      cols = row.size();
      out.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (row.size() != cols) {
      fail(ctx, "ragged rows (row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                    " entries, expected " + std::to_string(cols) + ")");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          get_complex(row[c], ctx + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return out;
}

SignatureSpec parse_signature(const json& v) {
  require_object(v, "signature");
  reject_unknown_fields(v, "signature", {"m1", "m2"});
  return SignatureSpec(get_positive_int(require_field(v, "signature", "m1"), "signature.m1"),
                       get_positive_int(require_field(v, "signature", "m2"), "signature.m2"));
}

PotentialSpec parse_potential(const json& v) {
  require_object(v, "potential");
  const json& type = require_field(v, "potential", "type");
  if (!type.is_string()) fail("potential.type", "expected a string");
  const std::string kind = type.get<std::string>();

  PotentialSpec out;
  if (kind == "constant-j") {
    reject_unknown_fields(v, "potential", {"type"});
    out.kind = PotentialSpec::Kind::ConstantJ;
  } else if (kind == "unitary-list") {
    reject_unknown_fields(v, "potential", {"type", "u"});
    out.kind = PotentialSpec::Kind::UnitaryList;
    const json& list = require_field(v, "potential", "u");
    if (!list.is_array() || list.empty()) fail("potential.u", "expected a nonempty array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      out.matrices.push_back(get_matrix(list[k], "potential.u[" + std::to_string(k) + "]"));
    }
  } else if (kind == "random-unitary") {
    reject_unknown_fields(v, "potential", {"type", "seed"});
    out.kind = PotentialSpec::Kind::RandomUnitary;
    out.seed = get_seed(require_field(v, "potential", "seed"), "potential.seed");
  } else if (kind == "explicit-c-list") {
    reject_unknown_fields(v, "potential", {"type", "c"});
    out.kind = PotentialSpec::Kind::ExplicitC;
    const json& list = require_field(v, "potential", "c");
    if (!list.is_array() || list.empty()) fail("potential.c", "expected a nonempty array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      out.matrices.push_back(get_matrix(list[k], "potential.c[" + std::to_string(k) + "]"));
    }
  } else {
    throw UnknownGenerator("potential.type: unknown generator \"" + kind + "\"");
  }
  return out;
}

GbdtTriple parse_triple(const json& v) {
  require_object(v, "triple");
  reject_unknown_fields(v, "triple", {"alpha", "s0", "lambda0", "mode"});
  GbdtTriple t;
  t.alpha = get_matrix(require_field(v, "triple", "alpha"), "triple.alpha");
  t.s0 = get_matrix(require_field(v, "triple", "s0"), "triple.s0");
  t.lambda0 = get_matrix(require_field(v, "triple", "lambda0"), "triple.lambda0");
  const json& mode = require_field(v, "triple", "mode");
  if (!mode.is_string()) fail("triple.mode", "expected a string");
  t.mode = triple_mode_from_string(mode.get<std::string>());
  return t;
}

Tolerance parse_tolerances(const json& v) {
  require_object(v, "run.tolerances");
  reject_unknown_fields(v, "run.tolerances", {"rel", "abs", "cond_warn"});
  Tolerance tol;
  if (const json* f = optional_field(v, "rel")) tol.rel = get_number(*f, "run.tolerances.rel");
  if (const json* f = optional_field(v, "abs")) tol.abs = get_number(*f, "run.tolerances.abs");
  if (const json* f = optional_field(v, "cond_warn")) {
    tol.cond_warn = get_number(*f, "run.tolerances.cond_warn");
  }
  try {
    tol.validate();
  } catch (const Error& e) {
    fail("run.tolerances", e.what());
  }
  return tol;
}

RunSpec parse_run(const json& v, TripleMode triple_mode) {
  require_object(v, "run");
  reject_unknown_fields(v, "run", {"steps", "z_grid", "t_grid", "tolerances", "mode"});
  RunSpec out;
  out.steps = get_positive_int(require_field(v, "run", "steps"), "run.steps");
  if (const json* f = optional_field(v, "z_grid")) {
    if (f->is_string()) {
      if (f->get<std::string>() != "auto") fail("run.z_grid", "expected \"auto\" or a list");
    } else if (f->is_array()) {
      if (f->empty()) fail("run.z_grid", "grid must be nonempty");
      std::vector<Complex> grid;
      for (std::size_t i = 0; i < f->size(); ++i) {
        Complex z = get_complex((*f)[i], "run.z_grid[" + std::to_string(i) + "]");
        if (z == Complex(0.0, 0.0)) {
          fail("run.z_grid", "zero spectral parameter is not allowed");
        }
        grid.push_back(z);
      }
      out.z_grid = std::move(grid);
    } else {
      fail("run.z_grid", "expected \"auto\" or a list");
    }
  }
  if (const json* f = optional_field(v, "t_grid")) {
    if (f->is_string()) {
      if (f->get<std::string>() != "auto") fail("run.t_grid", "expected \"auto\" or a list");
    } else if (f->is_array()) {
      if (f->empty()) fail("run.t_grid", "grid must be nonempty");
      std::vector<double> grid;
      for (std::size_t i = 0; i < f->size(); ++i) {
        grid.push_back(get_number((*f)[i], "run.t_grid[" + std::to_string(i) + "]"));
      }
      out.t_grid = std::move(grid);
    } else {
      fail("run.t_grid", "expected \"auto\" or a list");
    }
  }
  if (const json* f = optional_field(v, "tolerances")) {
    out.tol = parse_tolerances(*f);
  }
  if (const json* f = optional_field(v, "mode")) {
    if (!f->is_string()) fail("run.mode", "expected a string");
    if (triple_mode_from_string(f->get<std::string>()) != triple_mode) {
      fail("run.mode", "disagrees with triple.mode");
    }
  }
  return out;
}

void cross_validate(const ProblemSpec& spec) {
  const int n = static_cast<int>(spec.triple.alpha.rows());
  const int m = spec.signature.m();
  if (spec.triple.alpha.rows() != spec.triple.alpha.cols()) {
    throw DimensionMismatch("triple.alpha: expected a square matrix, got " +
                            std::to_string(spec.triple.alpha.rows()) + "x" +
                            std::to_string(spec.triple.alpha.cols()));
  }
  if (spec.triple.s0.rows() != n || spec.triple.s0.cols() != n) {
    throw DimensionMismatch("triple.s0: expected " + std::to_string(n) + "x" + std::to_string(n) +
                            ", got " + std::to_string(spec.triple.s0.rows()) + "x" +
                            std::to_string(spec.triple.s0.cols()));
  }
  if (spec.triple.lambda0.rows() != n || spec.triple.lambda0.cols() != m) {
    throw DimensionMismatch("triple.lambda0: expected " + std::to_string(n) + "x" +
                            std::to_string(m) + " (m = m1 + m2), got " +
                            std::to_string(spec.triple.lambda0.rows()) + "x" +
                            std::to_string(spec.triple.lambda0.cols()));
  }
  const bool list_backed = spec.potential.kind == PotentialSpec::Kind::UnitaryList ||
                           spec.potential.kind == PotentialSpec::Kind::ExplicitC;
  if (list_backed) {
    for (std::size_t k = 0; k < spec.potential.matrices.size(); ++k) {
      const ComplexMatrix& mat = spec.potential.matrices[k];
      if (mat.rows() != m || mat.cols() != m) {
        throw DimensionMismatch("potential[" + std::to_string(k) + "]: expected " +
                                std::to_string(m) + "x" + std::to_string(m) + ", got " +
                                std::to_string(mat.rows()) + "x" + std::to_string(mat.cols()));
      }
    }
    if (spec.run.steps > static_cast<int>(spec.potential.matrices.size())) {
      throw DimensionMismatch("run.steps " + std::to_string(spec.run.steps) +
                              " exceeds the " + std::to_string(spec.potential.matrices.size()) +
                              " supplied potential steps");
    }
  }
}

ProblemSpec parse_document(const json& doc, const std::string& origin) {
  if (!doc.is_object()) {
    throw ParseError(origin + ": problem document must be a JSON object");
  }
  reject_unknown_fields(doc, origin, {"signature", "potential", "triple", "run"});
  ProblemSpec spec;
  spec.signature = parse_signature(require_field(doc, origin, "signature"));
  spec.potential = parse_potential(require_field(doc, origin, "potential"));
  spec.triple = parse_triple(require_field(doc, origin, "triple"));
  spec.run = parse_run(require_field(doc, origin, "run"), spec.triple.mode);
  cross_validate(spec);
  return spec;
}

}  // namespace

ProblemSpec parse_problem_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  return parse_document(doc, origin);
}

ProblemSpec parse_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open problem file " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_problem_text(buffer.str(), path.string());
}

DiracPotential ProblemSpec::materialize_potential(int steps) const {
  switch (potential.kind) {
    case PotentialSpec::Kind::ConstantJ:
      return DiracPotential::constant_j(signature, steps);
    case PotentialSpec::Kind::RandomUnitary:
      return DiracPotential::random(signature, steps, potential.seed);
    case PotentialSpec::Kind::UnitaryList: {
      if (steps > static_cast<int>(potential.matrices.size())) {
        throw DimensionMismatch("materialize_potential: " + std::to_string(steps) +
                                " steps requested, " +
                                std::to_string(potential.matrices.size()) + " unitaries supplied");
      }
      std::vector<ComplexMatrix> u(potential.matrices.begin(),
                                   potential.matrices.begin() + steps);
      return DiracPotential::from_unitaries(signature, std::move(u), run.tol);
    }
    case PotentialSpec::Kind::ExplicitC: {
      if (steps > static_cast<int>(potential.matrices.size())) {
        throw DimensionMismatch("materialize_potential: " + std::to_string(steps) +
                                " steps requested, " +
                                std::to_string(potential.matrices.size()) + " matrices supplied");
      }
      std::vector<ComplexMatrix> c(potential.matrices.begin(),
                                   potential.matrices.begin() + steps);
      return DiracPotential(signature, std::move(c));
    }
  }
  throw UnknownGenerator("materialize_potential: unhandled generator kind");
}

nlohmann::ordered_json complex_to_json(Complex z) {
  return nlohmann::ordered_json::array({z.real(), z.imag()});
}

nlohmann::ordered_json matrix_to_json(const ComplexMatrix& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(complex_to_json(m(r, c)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json problem_echo(const ProblemSpec& spec) {
  nlohmann::ordered_json doc;
  doc["signature"] = {{"m1", spec.signature.m1}, {"m2", spec.signature.m2}};

  nlohmann::ordered_json pot;
  switch (spec.potential.kind) {
    case PotentialSpec::Kind::ConstantJ:
      pot["type"] = "constant-j";
      break;
    case PotentialSpec::Kind::RandomUnitary:
      pot["type"] = "random-unitary";
      pot["seed"] = spec.potential.seed;
      break;
    case PotentialSpec::Kind::UnitaryList: {
      pot["type"] = "unitary-list";
      nlohmann::ordered_json list = nlohmann::ordered_json::array();
      for (const ComplexMatrix& u : spec.potential.matrices) list.push_back(matrix_to_json(u));
      pot["u"] = std::move(list);
      break;
    }
    case PotentialSpec::Kind::ExplicitC: {
      pot["type"] = "explicit-c-list";
      nlohmann::ordered_json list = nlohmann::ordered_json::array();
      for (const ComplexMatrix& c : spec.potential.matrices) list.push_back(matrix_to_json(c));
      pot["c"] = std::move(list);
      break;
    }
  }
  doc["potential"] = std::move(pot);

  doc["triple"] = {{"alpha", matrix_to_json(spec.triple.alpha)},
                   {"s0", matrix_to_json(spec.triple.s0)},
                   {"lambda0", matrix_to_json(spec.triple.lambda0)},
                   {"mode", to_string(spec.triple.mode)}};

  nlohmann::ordered_json run;
  run["steps"] = spec.run.steps;
  if (spec.run.z_grid) {
    nlohmann::ordered_json grid = nlohmann::ordered_json::array();
    for (Complex z : *spec.run.z_grid) grid.push_back(complex_to_json(z));
    run["z_grid"] = std::move(grid);
  } else {
    run["z_grid"] = "auto";
  }
  if (spec.run.t_grid) {
    run["t_grid"] = *spec.run.t_grid;
  } else {
    run["t_grid"] = "auto";
  }
  run["tolerances"] = {{"rel", spec.run.tol.rel},
                       {"abs", spec.run.tol.abs},
                       {"cond_warn", spec.run.tol.cond_warn}};
  doc["run"] = std::move(run);
  return doc;
}

}  // namespace gbdt
