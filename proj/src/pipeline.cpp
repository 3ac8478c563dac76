#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gbdt/nonstationary.hpp"
#include "gbdt/report.hpp"
#include "gbdt/version.hpp"

namespace gbdt {

namespace {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Exit-code classification: structural/spec problems are 3, numerical ones 2.
int classify_error(const Error& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const DimensionMismatch*>(&e) ||
      dynamic_cast<const UnknownGenerator*>(&e) || dynamic_cast<const IoError*>(&e) ||
      dynamic_cast<const NotUnitary*>(&e) || dynamic_cast<const InvalidRequest*>(&e)) {
    return 3;
  }
  return 2;
}

const char* error_type_name(const Error& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  if (dynamic_cast<const DimensionMismatch*>(&e)) return "DimensionMismatch";
  if (dynamic_cast<const UnknownGenerator*>(&e)) return "UnknownGenerator";
  if (dynamic_cast<const IoError*>(&e)) return "IoError";
  if (dynamic_cast<const NotUnitary*>(&e)) return "NotUnitary";
  if (dynamic_cast<const InvalidRequest*>(&e)) return "InvalidRequest";
  if (dynamic_cast<const SingularS*>(&e)) return "SingularS";
  if (dynamic_cast<const NumericalBreakdown*>(&e)) return "NumericalBreakdown";
  if (dynamic_cast<const FactorizationFailure*>(&e)) return "FactorizationFailure";
  if (dynamic_cast<const SpectralCollision*>(&e)) return "SpectralCollision";
  if (dynamic_cast<const ZeroSpectralParameter*>(&e)) return "ZeroSpectralParameter";
  if (dynamic_cast<const SingularMatrix*>(&e)) return "SingularMatrix";
  if (dynamic_cast<const NotPositiveDefinite*>(&e)) return "NotPositiveDefinite";
  if (dynamic_cast<const Overflow*>(&e)) return "Overflow";
  return "Error";
}

ordered_json spectrum_to_json(const std::vector<Complex>& spectrum) {
  ordered_json out = ordered_json::array();
  for (Complex ev : spectrum) out.push_back(complex_to_json(ev));
  return out;
}

}  // namespace

RunReport run_pipeline(const ProblemSpec& spec, StageSet stages) {
  stages.resolve();
  if (!stages.any()) {
    throw InvalidRequest("run_pipeline: no stages requested");
  }
  const Tolerance& tol = spec.run.tol;
  const int steps = spec.run.steps;

  RunReport report;
  ordered_json& doc = report.doc;
  doc["artifact"] = {{"name", kArtifactName}, {"version", kArtifactVersion}};
  doc["problem"] = problem_echo(spec);
  {
    ordered_json enabled = ordered_json::array();
    if (stages.validate) enabled.push_back("validate");
    if (stages.iterate) enabled.push_back("iterate");
    if (stages.darboux) enabled.push_back("darboux");
    if (stages.fundamental) enabled.push_back("fundamental");
    if (stages.factorize) enabled.push_back("factorize");
    if (stages.nonstationary) enabled.push_back("nonstationary");
    doc["stages"] = std::move(enabled);
  }

  bool pass = true;
  ordered_json timings;
  const Clock::time_point t_total = Clock::now();
  std::string current_stage = "setup";

  try {
    const DiracPotential potential = spec.materialize_potential(steps);

    // --- validate ---------------------------------------------------------
    current_stage = "validate";
    Clock::time_point t_stage = Clock::now();
    const AdmissibilityReport adm = validate_triple(spec.triple, tol);
    const PotentialCheck pot_check = validate_potential(potential, tol);
    const bool triple_ok =
        spec.triple.mode == TripleMode::Strict ? adm.admissible : adm.weak_ok;
    const bool validate_ok = triple_ok && pot_check.pass;
    {
      ordered_json v;
      v["mode"] = to_string(spec.triple.mode);
      v["identity_residual"] = adm.identity_residual;
      v["s0_hermitian_residual"] = adm.s0_hermitian_residual;
      v["s0_positive"] = adm.s0_positive;
      v["s0_min_pivot"] = adm.s0_min_pivot;
      v["sigma_min_alpha"] = adm.sigma_min_alpha;
      v["sigma_min_alpha_minus_i"] = adm.sigma_min_alpha_minus_i;
      v["alpha_spectrum"] = spectrum_to_json(adm.alpha_spectrum);
      v["spectrum_converged"] = adm.spectrum_converged;
      v["negative_imaginary_eigenvalue"] = adm.negative_imaginary_eigenvalue;
      v["admissible"] = adm.admissible;
      v["weak_ok"] = adm.weak_ok;
      v["failures"] = adm.failures;
      ordered_json pc;
      pc["steps"] = potential.steps();
      pc["has_unitaries"] = potential.has_unitaries();
      pc["max_hermitian_residual"] = pot_check.max_hermitian_residual;
      pc["max_involution_residual"] = pot_check.max_involution_residual;
      pc["max_unitary_consistency"] = pot_check.max_unitary_consistency;
      pc["pass"] = pot_check.pass;
      v["potential"] = std::move(pc);
      v["pass"] = validate_ok;
      doc["validate"] = std::move(v);
    }
    timings["validate_seconds"] = seconds_since(t_stage);
    if (!validate_ok) {
      pass = false;
      if (stages.iterate) {
        doc["stages_skipped"] = "validation failed; downstream stages not run";
      }
      stages.iterate = stages.darboux = stages.fundamental = stages.factorize =
          stages.nonstationary = false;
    }

    // --- iterate ----------------------------------------------------------
    std::optional<GbdtSequence> seq;
    if (stages.iterate) {
      current_stage = "iterate";
      t_stage = Clock::now();
      seq = gbdt_iterate(spec.triple, potential, steps, tol);
      ordered_json rows = ordered_json::array();
      bool ok = true;
      double max_identity = 0.0, max_involution = 0.0, max_hermitian = 0.0;
      for (const StepDiagnostics& d : seq->diagnostics()) {
        const double threshold = 10.0 * tol.rel * (1.0 + d.k);
        ordered_json row;
        row["k"] = d.k;
        row["identity_residual"] = d.identity_residual;
        row["s_hermitian_residual"] = d.s_hermitian_residual;
        row["s_min_pivot"] = d.s_min_pivot;
        row["s_condition"] = d.s_condition;
        row["cond_warning"] = d.cond_warning;
        row["s_positive"] = d.positivity_checked ? ordered_json(d.s_positive) : ordered_json();
        if (d.has_c_tilde) {
          row["c_involution_residual"] = d.c_involution_residual;
          row["c_hermitian_residual"] = d.c_hermitian_residual;
          max_involution = std::max(max_involution, d.c_involution_residual);
          max_hermitian = std::max(max_hermitian, d.c_hermitian_residual);
          if (d.c_involution_residual > threshold || d.c_hermitian_residual > threshold) {
            ok = false;
          }
        }
        max_identity = std::max(max_identity, d.identity_residual);
        if (d.identity_residual > threshold) ok = false;
        if (d.positivity_checked && !d.s_positive) ok = false;
        rows.push_back(std::move(row));
      }
      ordered_json it;
      it["steps"] = std::move(rows);
      it["max_identity_residual"] = max_identity;
      it["max_c_involution_residual"] = max_involution;
      it["max_c_hermitian_residual"] = max_hermitian;
      it["pass"] = ok;
      doc["iterate"] = std::move(it);
      timings["iterate_seconds"] = seconds_since(t_stage);
      pass = pass && ok;
    }

    // Grids are resolved once and echoed, so reruns are reproducible.
    std::vector<Complex> z_grid;
    if (stages.darboux || stages.fundamental) {
      z_grid = spec.run.z_grid ? *spec.run.z_grid : default_z_grid(spec.triple.alpha);
      ordered_json grid = ordered_json::array();
      for (Complex z : z_grid) grid.push_back(complex_to_json(z));
      doc["grids"]["z"] = std::move(grid);
    }
    std::vector<double> t_grid;
    if (stages.nonstationary) {
      t_grid = spec.run.t_grid ? *spec.run.t_grid : default_t_grid(spec.triple.alpha);
      doc["grids"]["t"] = t_grid;
    }

    // --- darboux ----------------------------------------------------------
    if (stages.darboux) {
      current_stage = "darboux";
      t_stage = Clock::now();
      ordered_json inv_rows = ordered_json::array();
      ordered_json twin_rows = ordered_json::array();
      double max_inv = 0.0, max_twin = 0.0;
      for (Complex z : z_grid) {
        DarbouxEvaluator ev(*seq, z);
        DarbouxEvaluator ev_conj(*seq, std::conj(z));
        const int m = spec.triple.m();
        for (int k = 0; k <= seq->steps(); ++k) {
          const double r =
              (ev(k) * ev_conj(k).adjoint() - ComplexMatrix::Identity(m, m)).norm();
          max_inv = std::max(max_inv, r);
          inv_rows.push_back({{"k", k}, {"z", complex_to_json(z)}, {"residual", r}});
        }
        for (int k = 0; k < seq->steps(); ++k) {
          const double r = intertwining_residual(*seq, ev, k);
          max_twin = std::max(max_twin, r);
          twin_rows.push_back({{"k", k}, {"z", complex_to_json(z)}, {"residual", r}});
        }
      }
      const bool ok = max_inv <= tol.rel && max_twin <= 10.0 * tol.rel;
      ordered_json d;
      d["transfer_inverse"] = std::move(inv_rows);
      d["intertwining"] = std::move(twin_rows);
      d["max_transfer_inverse_residual"] = max_inv;
      d["max_intertwining_residual"] = max_twin;
      d["pass"] = ok;
      doc["darboux"] = std::move(d);
      timings["darboux_seconds"] = seconds_since(t_stage);
      pass = pass && ok;
    }

    // --- fundamental ------------------------------------------------------
    if (stages.fundamental) {
      current_stage = "fundamental";
      t_stage = Clock::now();
      ordered_json rows = ordered_json::array();
      double max_agreement = 0.0;
      bool ok = true;
      for (Complex z : z_grid) {
        const FundamentalTrajectory direct =
            transformed_fundamental_direct(*seq, z, seq->steps());
        const FundamentalTrajectory conjugated =
            transformed_fundamental_darboux(*seq, z, seq->steps());
        for (int k = 0; k <= seq->steps(); ++k) {
          const double r = (direct.at(k) - conjugated.at(k)).norm() /
                           std::max(1.0, direct.at(k).norm());
          max_agreement = std::max(max_agreement, r);
          if (r > 100.0 * tol.rel * (1.0 + k)) ok = false;
          rows.push_back({{"k", k}, {"z", complex_to_json(z)}, {"residual", r}});
        }
      }
      ordered_json f;
      f["agreement"] = std::move(rows);
      f["max_agreement_residual"] = max_agreement;
      f["pass"] = ok;
      doc["fundamental"] = std::move(f);
      timings["fundamental_seconds"] = seconds_since(t_stage);
      pass = pass && ok;
    }

    // --- factorize --------------------------------------------------------
    if (stages.factorize) {
      current_stage = "factorize";
      t_stage = Clock::now();
      if (!potential.has_unitaries()) {
        throw InvalidRequest(
            "factorize: the potential generator supplies no unitaries (explicit-c-list)");
      }
      ordered_json rows = ordered_json::array();
      double max_unitarity = 0.0, max_conjugation = 0.0;
      std::vector<UnitaryFactor> factors;
      factors.reserve(static_cast<std::size_t>(seq->steps()));
      for (int k = 0; k < seq->steps(); ++k) {
        factors.push_back(unitary_factor(*seq, k));
        const UnitaryFactor& f = factors.back();
        max_unitarity = std::max(max_unitarity, f.unitarity_residual);
        max_conjugation = std::max(max_conjugation, f.conjugation_residual);
        rows.push_back({{"k", k},
                        {"unitarity_residual", f.unitarity_residual},
                        {"conjugation_residual", f.conjugation_residual},
                        {"q_breve_consistency", f.q_breve_consistency},
                        {"q_hat_consistency", f.q_hat_consistency}});
      }
      const bool ok = max_unitarity <= 10.0 * tol.rel && max_conjugation <= 10.0 * tol.rel;
      ordered_json f;
      f["factors"] = std::move(rows);
      f["max_unitarity_residual"] = max_unitarity;
      f["max_conjugation_residual"] = max_conjugation;
      f["pass"] = ok;
      doc["factorize"] = std::move(f);
      timings["factorize_seconds"] = seconds_since(t_stage);
      pass = pass && ok;
    }

    // --- nonstationary ----------------------------------------------------
    if (stages.nonstationary) {
      current_stage = "nonstationary";
      t_stage = Clock::now();
      const SolutionGenerator gen = build_generator(*seq, seq->steps());
      const int k_max = seq->steps();

      ordered_json stat_rows = ordered_json::array();
      double max_stationary = 0.0;
      for (const BlockResidual& r : stationary_block_residuals(gen, k_max)) {
        max_stationary = std::max(max_stationary, r.residual);
        stat_rows.push_back({{"k", r.k}, {"residual", r.residual}, {"scale", r.scale}});
      }

      ordered_json sample_rows = ordered_json::array();
      std::vector<double> max_over_t(static_cast<std::size_t>(k_max), 0.0);
      std::vector<double> min_over_t(static_cast<std::size_t>(k_max),
                                     std::numeric_limits<double>::infinity());
      double max_sampled = 0.0;
      for (double t : t_grid) {
        for (const BlockResidual& r : nonstationary_block_residuals(gen, t, k_max)) {
          max_sampled = std::max(max_sampled, r.residual);
          max_over_t[static_cast<std::size_t>(r.k)] =
              std::max(max_over_t[static_cast<std::size_t>(r.k)], r.residual);
          min_over_t[static_cast<std::size_t>(r.k)] =
              std::min(min_over_t[static_cast<std::size_t>(r.k)], r.residual);
          sample_rows.push_back(
              {{"k", r.k}, {"t", t}, {"residual", r.residual}, {"scale", r.scale}});
        }
      }
      // Residuals are constant in t in exact arithmetic; ratios are only
      // meaningful above the roundoff floor.
      bool ratio_ok = true;
      double max_ratio = 1.0;
      ordered_json ratio_rows = ordered_json::array();
      for (int k = 0; k < k_max; ++k) {
        const double hi = max_over_t[static_cast<std::size_t>(k)];
        const double lo = min_over_t[static_cast<std::size_t>(k)];
        double ratio = 1.0;
        if (hi > 100.0 * tol.abs && lo > 0.0) {
          ratio = hi / lo;
          if (ratio > 10.0) ratio_ok = false;
          max_ratio = std::max(max_ratio, ratio);
        }
        ratio_rows.push_back({{"k", k}, {"ratio", ratio}});
      }

      const double h = 1e-3 * std::min(1.0, 1.0 / std::max(gen.alpha.norm(), 1e-8));
      ordered_json fd = ordered_json::array();
      for (double step_h : {h, 0.5 * h}) {
        const std::vector<double> d = finite_difference_check(gen, 0.0, step_h, gen.blocks());
        const double worst = d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
        fd.push_back({{"h", step_h}, {"max_discrepancy", worst}});
      }

      const bool ok = max_sampled <= 100.0 * tol.rel && ratio_ok;
      ordered_json ns;
      ns["stationary"] = std::move(stat_rows);
      ns["samples"] = std::move(sample_rows);
      ns["time_ratio"] = std::move(ratio_rows);
      ns["finite_difference"] = std::move(fd);
      ns["max_stationary_residual"] = max_stationary;
      ns["max_sampled_residual"] = max_sampled;
      ns["max_time_ratio"] = max_ratio;
      ns["pass"] = ok;
      doc["nonstationary"] = std::move(ns);
      timings["nonstationary_seconds"] = seconds_since(t_stage);
      pass = pass && ok;
    }

    report.exit_code = pass ? 0 : 1;
  } catch (const Error& e) {
    doc["error"] = {{"stage", current_stage},
                    {"type", error_type_name(e)},
                    {"message", e.what()}};
    pass = false;
    report.exit_code = classify_error(e);
  }

  report.pass = pass;
  doc["verdict"] = pass ? "pass" : "fail";
  timings["total_seconds"] = seconds_since(t_total);
  doc["timings"] = std::move(timings);
  return report;
}

}  // namespace gbdt
