#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "gbdt/problem.hpp"

namespace gbdt {

/// Which pipeline stages to run. Dependencies are resolved by `resolve()`:
/// everything needs validate, every evaluation stage needs iterate.
struct StageSet {
  bool validate = false;
  bool iterate = false;
  bool darboux = false;
  bool fundamental = false;
  bool factorize = false;
  bool nonstationary = false;

  static StageSet all();
  static StageSet parse(const std::string& name);  // InvalidRequest on junk
  StageSet& operator|=(const StageSet& other);
  void resolve();
  bool any() const;
};

/// Machine-readable run outcome. `doc` holds the full structured report;
/// exit_code follows the CLI contract 0 pass / 1 fail / 2 breakdown / 3 spec.
struct RunReport {
  nlohmann::ordered_json doc;
  bool pass = false;
  int exit_code = 0;
};

RunReport run_pipeline(const ProblemSpec& spec, StageSet stages);

enum class ReportFormat { Json, CsvBundle };
ReportFormat report_format_from_string(const std::string& s);  // InvalidRequest

/// Serializes a report document with stable key order and %.17g floats;
/// byte-stable for equal documents. Ends with a newline.
std::string report_json_string(const nlohmann::ordered_json& doc);

void emit_report(const RunReport& report, std::ostream& os);
/// JSON: writes a single file. CsvBundle: treats `path` as a directory and
/// writes report.json plus one CSV per table.
void emit_report(const RunReport& report, const std::filesystem::path& path, ReportFormat format);

}  // namespace gbdt
