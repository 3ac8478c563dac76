#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "gbdt/report.hpp"
#include "gbdt/version.hpp"

namespace {

constexpr const char* kStageNames[] = {"validate", "iterate",   "darboux",
                                       "fundamental", "factorize", "nonstationary", "all"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GBDT of discrete skew-selfadjoint Dirac systems: builds transformed "
               "potentials from a matrix triple, cross-checks the transformed fundamental "
               "solution two ways, and verifies the associated non-stationary system."};
  app.set_version_flag("--version", std::string(gbdt::kArtifactVersion));
  app.require_subcommand(1, 0);

  std::string problem_path;
  std::string out_path;
  std::string format = "json";
  int steps_override = 0;
  std::uint64_t seed_override = 0;
  double rel_override = 0.0;
  double abs_override = 0.0;

  app.add_option("-p,--problem", problem_path, "problem file (JSON)")->required();
  app.add_option("-o,--out", out_path, "output path (file for json, directory for csv-bundle)");
  app.add_option("-f,--format", format, "report format")
      ->check(CLI::IsMember({"json", "csv-bundle"}))
      ->capture_default_str();
  auto* steps_opt = app.add_option("--steps", steps_override, "override run.steps");
  auto* seed_opt =
      app.add_option("--seed", seed_override, "override the random-unitary potential seed");
  auto* rel_opt = app.add_option("--tolerance-rel", rel_override, "override tolerances.rel");
  auto* abs_opt = app.add_option("--tolerance-abs", abs_override, "override tolerances.abs");

  for (const char* name : kStageNames) {
    app.add_subcommand(name)->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    gbdt::StageSet stages;
    for (const CLI::App* sub : app.get_subcommands()) {
      stages |= gbdt::StageSet::parse(sub->get_name());
    }

    gbdt::ProblemSpec spec = gbdt::parse_problem(problem_path);
    if (steps_opt->count() > 0) {
      if (steps_override < 1) {
        throw gbdt::InvalidRequest("--steps must be positive");
      }
      spec.run.steps = steps_override;
    }
    if (seed_opt->count() > 0) {
      if (spec.potential.kind != gbdt::PotentialSpec::Kind::RandomUnitary) {
        std::cerr << "gbdt: --seed ignored (potential generator is not random-unitary)\n";
      } else {
        spec.potential.seed = seed_override;
      }
    }
    if (rel_opt->count() > 0) spec.run.tol.rel = rel_override;
    if (abs_opt->count() > 0) spec.run.tol.abs = abs_override;
    spec.run.tol.validate();

    const gbdt::ReportFormat fmt = gbdt::report_format_from_string(format);
    if (fmt == gbdt::ReportFormat::CsvBundle && out_path.empty()) {
      throw gbdt::InvalidRequest("--out is required for --format csv-bundle");
    }

    gbdt::RunReport report = gbdt::run_pipeline(spec, stages);
    if (out_path.empty()) {
      gbdt::emit_report(report, std::cout);
    } else {
      gbdt::emit_report(report, out_path, fmt);
    }
    return report.exit_code;
  } catch (const gbdt::ParseError& e) {
    std::cerr << "gbdt: " << e.what() << "\n";
    return 3;
  } catch (const gbdt::DimensionMismatch& e) {
    std::cerr << "gbdt: " << e.what() << "\n";
    return 3;
  } catch (const gbdt::UnknownGenerator& e) {
    std::cerr << "gbdt: " << e.what() << "\n";
    return 3;
  } catch (const gbdt::IoError& e) {
    std::cerr << "gbdt: " << e.what() << "\n";
    return 3;
  } catch (const gbdt::InvalidRequest& e) {
    std::cerr << "gbdt: " << e.what() << "\n";
    return 3;
  } catch (const gbdt::NotUnitary& e) {
    std::cerr << "gbdt: " << e.what() << "\n";
    return 3;
  } catch (const gbdt::Error& e) {
    std::cerr << "gbdt: " << e.what() << "\n";
    return 2;
  }
}
