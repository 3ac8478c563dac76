#include "gbdt/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

namespace gbdt {

namespace {

constexpr Complex kI{0.0, 1.0};

std::string num_str(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

std::string complex_str(Complex z) {
  return "(" + num_str(z.real()) + ", " + num_str(z.imag()) + ")";
}

void require_step(int k, int limit, const char* what) {
  if (k < 0 || k > limit) {
    throw DimensionMismatch(std::string(what) + ": step " + std::to_string(k) +
                            " out of range [0, " + std::to_string(limit) + "]");
  }
}

void require_nonzero_z(Complex z, const char* what) {
  if (z == Complex(0.0, 0.0)) {
    throw ZeroSpectralParameter(std::string(what) + ": z = 0");
  }
}

}  // namespace

const char* to_string(TripleMode mode) {
  return mode == TripleMode::Strict ? "strict" : "weak";
}

TripleMode triple_mode_from_string(const std::string& s) {
  if (s == "strict") return TripleMode::Strict;
  if (s == "weak") return TripleMode::Weak;
  throw ParseError("mode: expected \"strict\" or \"weak\", got \"" + s + "\"");
}

void GbdtTriple::check_dimensions() const {
  if (alpha.rows() < 1 || alpha.rows() != alpha.cols()) {
    throw DimensionMismatch("triple.alpha: expected a nonempty square matrix, got " +
                            std::to_string(alpha.rows()) + "x" + std::to_string(alpha.cols()));
  }
  if (s0.rows() != alpha.rows() || s0.cols() != alpha.cols()) {
    throw DimensionMismatch("triple.s0: expected " + std::to_string(alpha.rows()) + "x" +
                            std::to_string(alpha.rows()) + ", got " + std::to_string(s0.rows()) +
                            "x" + std::to_string(s0.cols()));
  }
  if (lambda0.rows() != alpha.rows() || lambda0.cols() < 1) {
    throw DimensionMismatch("triple.lambda0: expected " + std::to_string(alpha.rows()) +
                            " rows and at least one column, got " +
                            std::to_string(lambda0.rows()) + "x" + std::to_string(lambda0.cols()));
  }
  require_finite(alpha, "triple.alpha");
  require_finite(s0, "triple.s0");
  require_finite(lambda0, "triple.lambda0");
}

double identity_residual(const ComplexMatrix& alpha, const ComplexMatrix& s,
                         const ComplexMatrix& lambda) {
  const ComplexMatrix res = alpha * s - s * alpha.adjoint() - kI * (lambda * lambda.adjoint());
  const double scale = alpha.norm() * s.norm() + lambda.squaredNorm();
  return res.norm() / (scale > 0.0 ? scale : 1.0);
}

AdmissibilityReport validate_triple(const GbdtTriple& t, const Tolerance& tol) {
  tol.validate();
  t.check_dimensions();

  AdmissibilityReport r;
  r.identity_residual = identity_residual(t.alpha, t.s0, t.lambda0);
  r.s0_hermitian_residual = hermitian_residual(t.s0);

  const double threshold = tol.rel * t.alpha.norm();
  r.sigma_min_alpha = smallest_singular_value(t.alpha);
  const ComplexMatrix shifted =
      t.alpha - kI * ComplexMatrix::Identity(t.alpha.rows(), t.alpha.cols());
  r.sigma_min_alpha_minus_i = smallest_singular_value(shifted);
  r.alpha_invertible = r.sigma_min_alpha > threshold;

  try {
    CholeskyFactor cf = CholeskyFactor::factor(t.s0, tol);
    r.s0_positive = true;
    r.s0_min_pivot = cf.min_pivot();
  } catch (const NotPositiveDefinite& e) {
    r.s0_positive = false;
    r.s0_min_pivot = e.pivot();
  }

  if (t.alpha.rows() <= kSpectrumDimensionLimit) {
    SpectrumResult sp = spectrum_diagnostic(t.alpha);
    r.spectrum_converged = sp.converged;
    r.alpha_spectrum = std::move(sp.eigenvalues);
    for (Complex ev : r.alpha_spectrum) {
      if (ev.imag() < -std::max(threshold, tol.abs)) {
        r.negative_imaginary_eigenvalue = true;
      }
    }
  }

  const double identity_tol = std::max(10.0 * tol.rel, tol.abs);
  if (r.identity_residual > identity_tol) {
    r.failures.push_back("identity residual " + num_str(r.identity_residual) +
                         " exceeds " + num_str(identity_tol));
  }
  const double herm_tol = std::max(10.0 * tol.rel, tol.abs);
  if (r.s0_hermitian_residual > herm_tol) {
    r.failures.push_back("S0 is not Hermitian (residual " +
                         num_str(r.s0_hermitian_residual) + ")");
  }

  std::vector<std::string> strict_failures;
  if (!r.s0_positive) {
    strict_failures.push_back("S0 is not positive definite (pivot " +
                              num_str(r.s0_min_pivot) + ")");
  }
  if (!(r.sigma_min_alpha > threshold)) {
    strict_failures.push_back("0 lies in the spectrum of alpha (sigma_min " +
                              num_str(r.sigma_min_alpha) + ")");
  }
  if (!(r.sigma_min_alpha_minus_i > threshold)) {
    strict_failures.push_back("i lies in the spectrum of alpha (sigma_min " +
                              num_str(r.sigma_min_alpha_minus_i) + ")");
  }
  if (r.negative_imaginary_eigenvalue) {
    strict_failures.push_back("alpha has an eigenvalue estimate below the real axis");
  }

  LuSolver s0_lu(t.s0, tol);
  const bool s0_invertible = !s0_lu.pivot_below(std::max(1.0, t.s0.norm()));
  r.weak_ok = r.failures.empty() && r.alpha_invertible && s0_invertible;
  if (!r.alpha_invertible) {
    r.failures.push_back("alpha is singular (sigma_min " + num_str(r.sigma_min_alpha) +
                         ")");
  }
  if (!s0_invertible) {
    r.failures.push_back("S0 is singular (min pivot " + num_str(s0_lu.min_pivot()) + ")");
  }
  r.admissible = r.failures.empty() && strict_failures.empty();
  for (auto& f : strict_failures) r.failures.push_back(std::move(f));
  return r;
}

const ComplexMatrix& GbdtSequence::lambda(int k) const {
  require_step(k, steps_, "GbdtSequence::lambda");
  return lambda_[static_cast<std::size_t>(k)];
}

const ComplexMatrix& GbdtSequence::s(int k) const {
  require_step(k, steps_, "GbdtSequence::s");
  return s_[static_cast<std::size_t>(k)];
}

const ComplexMatrix& GbdtSequence::c_tilde(int k) const {
  require_step(k, steps_ - 1, "GbdtSequence::c_tilde");
  return c_tilde_[static_cast<std::size_t>(k)];
}

const ComplexMatrix& GbdtSequence::s_inv_lambda(int k) const {
  require_step(k, steps_, "GbdtSequence::s_inv_lambda");
  return s_inv_lambda_[static_cast<std::size_t>(k)];
}

ComplexMatrix GbdtSequence::solve_s(int k, const ComplexMatrix& b) const {
  require_step(k, steps_, "GbdtSequence::solve_s");
  const auto& f = s_factor_[static_cast<std::size_t>(k)];
  if (std::holds_alternative<CholeskyFactor>(f)) {
    return std::get<CholeskyFactor>(f).solve(b);
  }
  return std::get<LuSolver>(f).solve(b);
}

GbdtSequence gbdt_iterate(const GbdtTriple& t, const DiracPotential& p, int steps,
                          const Tolerance& tol) {
  tol.validate();
  t.check_dimensions();
  if (p.signature().m() != t.m()) {
    throw DimensionMismatch("gbdt_iterate: potential is " + std::to_string(p.signature().m()) +
                            "-dimensional, triple expects m = " + std::to_string(t.m()));
  }
  if (steps < 0 || steps > p.steps()) {
    throw DimensionMismatch("gbdt_iterate: requested " + std::to_string(steps) +
                            " steps, potential has " + std::to_string(p.steps()));
  }

  LuSolver alpha_lu(t.alpha, tol);
  if (alpha_lu.singular()) {
    throw SingularMatrix("gbdt_iterate: alpha is singular");
  }

  GbdtSequence seq;
  seq.triple_ = t;
  seq.potential_ = p;
  seq.tol_ = tol;
  seq.steps_ = steps;
  seq.alpha_norm_ = t.alpha.norm();
  seq.lambda_.reserve(static_cast<std::size_t>(steps) + 1);
  seq.s_.reserve(static_cast<std::size_t>(steps) + 1);
  seq.s_inv_lambda_.reserve(static_cast<std::size_t>(steps) + 1);
  seq.s_factor_.reserve(static_cast<std::size_t>(steps) + 1);
  seq.diag_.reserve(static_cast<std::size_t>(steps) + 1);
  seq.c_tilde_.reserve(static_cast<std::size_t>(steps));

  const bool strict = t.mode == TripleMode::Strict;

  auto push_step = [&](const ComplexMatrix& s_raw) {
    const int k = static_cast<int>(seq.s_.size());
    StepDiagnostics d;
    d.k = k;
    d.s_hermitian_residual = hermitian_residual(s_raw);
    ComplexMatrix sk = hermitian_part(s_raw);
    d.identity_residual = identity_residual(t.alpha, sk, seq.lambda_[static_cast<std::size_t>(k)]);

    LuSolver slu(sk, tol);
    d.s_condition = slu.condition_estimate();
    d.cond_warning = d.s_condition > tol.cond_warn;
    if (strict) {
      d.positivity_checked = true;
      try {
        CholeskyFactor cf = CholeskyFactor::factor(sk, tol);
        d.s_positive = true;
        d.s_min_pivot = cf.min_pivot();
        seq.s_factor_.emplace_back(std::move(cf));
      } catch (const NotPositiveDefinite& e) {
        throw NumericalBreakdown(
            "gbdt_iterate: S_" + std::to_string(k) + " lost positivity (" + e.what() + ")", k);
      }
    } else {
      if (slu.pivot_below(std::max(1.0, sk.norm()))) {
        throw SingularS("gbdt_iterate: det S_" + std::to_string(k) +
                            " vanished in weak mode (min pivot " +
                            num_str(slu.min_pivot()) + ")",
                        k);
      }
      d.s_min_pivot = slu.min_pivot();
      seq.s_factor_.emplace_back(std::move(slu));
    }
    seq.s_.push_back(std::move(sk));
    seq.s_inv_lambda_.push_back(
        seq.solve_s(k, seq.lambda_[static_cast<std::size_t>(k)]));
    seq.diag_.push_back(d);
  };

  seq.lambda_.push_back(t.lambda0);
  push_step(t.s0);

  for (int k = 0; k < steps; ++k) {
    const ComplexMatrix& ck = p.c(k);
    const ComplexMatrix& lk = seq.lambda_[static_cast<std::size_t>(k)];
    const ComplexMatrix lk_ck = lk * ck;

    seq.lambda_.push_back(lk + kI * alpha_lu.solve(lk_ck));

    const ComplexMatrix& sk = seq.s_[static_cast<std::size_t>(k)];
    const ComplexMatrix mid = sk + lk_ck * lk.adjoint();
    const ComplexMatrix left = alpha_lu.solve(mid);                       // alpha^{-1}(...)
    const ComplexMatrix both = alpha_lu.solve(left.adjoint()).adjoint();  // (...)(alpha*)^{-1}
    push_step(sk + both);

    const ComplexMatrix& lk1 = seq.lambda_[static_cast<std::size_t>(k) + 1];
    ComplexMatrix c_tilde = ck + lk.adjoint() * seq.s_inv_lambda_[static_cast<std::size_t>(k)] -
                            lk1.adjoint() * seq.s_inv_lambda_[static_cast<std::size_t>(k) + 1];
    StepDiagnostics& d = seq.diag_[static_cast<std::size_t>(k)];
    d.has_c_tilde = true;
    d.c_involution_residual =
        (c_tilde * c_tilde - ComplexMatrix::Identity(t.m(), t.m())).norm();
    d.c_hermitian_residual = (c_tilde - c_tilde.adjoint()).norm();
    seq.c_tilde_.push_back(std::move(c_tilde));
  }
  return seq;
}

DarbouxEvaluator::DarbouxEvaluator(const GbdtSequence& seq, Complex z) : seq_(&seq), z_(z) {
  const ComplexMatrix& alpha = seq.triple().alpha;
  const ComplexMatrix shifted =
      alpha - z * ComplexMatrix::Identity(alpha.rows(), alpha.cols());
  if (smallest_singular_value(shifted) <= seq.spectral_threshold()) {
    throw SpectralCollision("darboux: z = " + complex_str(z) +
                            " collides with the spectrum of alpha");
  }
  resolvent_ = LuSolver(shifted, seq.tolerance());
  if (resolvent_.singular()) {
    throw SpectralCollision("darboux: alpha - z I is singular at z = " + complex_str(z));
  }
}

ComplexMatrix DarbouxEvaluator::operator()(int k) const {
  const int m = seq_->triple().m();
  const ComplexMatrix& lk = seq_->lambda(k);
  const ComplexMatrix p = resolvent_.solve(lk);
  const ComplexMatrix q = seq_->solve_s(k, p);
  return ComplexMatrix::Identity(m, m) - kI * (lk.adjoint() * q);
}

DarbouxEvaluation darboux_matrix(const GbdtSequence& seq, int k, Complex z) {
  require_step(k, seq.steps(), "darboux_matrix");
  DarbouxEvaluator ev(seq, z);
  return DarbouxEvaluation{k, z, ev(k)};
}

double transfer_inverse_residual(const GbdtSequence& seq, int k, Complex z) {
  require_step(k, seq.steps(), "transfer_inverse_residual");
  DarbouxEvaluator ev(seq, z);
  DarbouxEvaluator ev_conj(seq, std::conj(z));
  const int m = seq.triple().m();
  return (ev(k) * ev_conj(k).adjoint() - ComplexMatrix::Identity(m, m)).norm();
}

UnitaryFactor unitary_factor(const GbdtSequence& seq, int k) {
  require_step(k, seq.steps() - 1, "unitary_factor");
  const DiracPotential& p = seq.initial();
  if (!p.has_unitaries()) {
    throw InvalidRequest("unitary_factor: the initial potential carries no unitaries");
  }
  const Tolerance& tol = seq.tolerance();
  const SignatureSpec& sig = p.signature();
  const int m = sig.m();
  const int m1 = sig.m1;
  const int m2 = sig.m2;

  DarbouxEvaluator at_i(seq, kI);
  DarbouxEvaluator at_minus_i(seq, -kI);
  const ComplexMatrix& uk = p.u(k);

  // Rows of U_k w_alpha(·, ±i)* split into the two signature blocks.
  const ComplexMatrix a1 = (uk * at_minus_i(k + 1).adjoint()).topRows(m1);
  const ComplexMatrix b1 = (uk * at_i(k).adjoint()).topRows(m1);
  const ComplexMatrix a2 = (uk * at_i(k + 1).adjoint()).bottomRows(m2);
  const ComplexMatrix b2 = (uk * at_minus_i(k).adjoint()).bottomRows(m2);

  auto positive_coupling = [&](const ComplexMatrix& a, const ComplexMatrix& b,
                               const char* name) -> std::pair<ComplexMatrix, double> {
    ComplexMatrix gram = b * b.adjoint();
    ComplexMatrix q;
    try {
      CholeskyFactor g = CholeskyFactor::factor(gram, tol);
      q = g.solve(b * a.adjoint()).adjoint();  // least squares for q·b ≈ a
    } catch (const NotPositiveDefinite& e) {
      throw FactorizationFailure("unitary_factor: " + std::string(name) + " block at step " +
                                     std::to_string(k) + " is rank deficient (" + e.what() + ")",
                                 k);
    }
    q = hermitian_part(q);
    const double consistency = (a - q * b).norm() / std::max(1.0, a.norm());
    const double consistency_tol = std::max(1e3 * tol.rel, 1e2 * tol.abs);
    if (consistency > consistency_tol) {
      throw FactorizationFailure("unitary_factor: coupling residual " +
                                     num_str(consistency) + " for " + name + " at step " +
                                     std::to_string(k) + " exceeds " +
                                     num_str(consistency_tol),
                                 k);
    }
    return {q, consistency};
  };

  UnitaryFactor f;
  f.k = k;
  auto [q_breve, cons1] = positive_coupling(a1, b1, "q_breve");
  auto [q_hat, cons2] = positive_coupling(a2, b2, "q_hat");
  f.q_breve = std::move(q_breve);
  f.q_hat = std::move(q_hat);
  f.q_breve_consistency = cons1;
  f.q_hat_consistency = cons2;

  ComplexMatrix sq_breve, sq_hat;
  try {
    sq_breve = hermitian_sqrt(f.q_breve, tol);
    sq_hat = hermitian_sqrt(f.q_hat, tol);
  } catch (const NotPositiveDefinite& e) {
    throw FactorizationFailure("unitary_factor: coupling matrix at step " + std::to_string(k) +
                                   " is not positive definite (" + e.what() + ")",
                               k);
  }

  f.w = ComplexMatrix(m, m);
  f.w.topRows(m1) = sq_breve * b1;
  f.w.bottomRows(m2) = sq_hat * b2;

  f.unitarity_residual = (f.w * f.w.adjoint() - ComplexMatrix::Identity(m, m)).norm();
  f.conjugation_residual = (f.w.adjoint() * sig.j() * f.w - seq.c_tilde(k)).norm();
  return f;
}

namespace {

DiracPotential package_transformed(const GbdtSequence& seq,
                                   std::optional<std::vector<ComplexMatrix>> unitaries) {
  std::vector<ComplexMatrix> c;
  c.reserve(static_cast<std::size_t>(seq.steps()));
  for (int k = 0; k < seq.steps(); ++k) {
    c.push_back(seq.c_tilde(k));
  }
  DiracPotential out(seq.initial().signature(), std::move(c), std::move(unitaries));
  PotentialCheck check = validate_potential(out, seq.tolerance());
  if (!check.pass) {
    throw Error("transformed_potential: validation failed (max involution residual " +
                num_str(check.max_involution_residual) + ", max Hermitian residual " +
                num_str(check.max_hermitian_residual) + ")");
  }
  return out;
}

}  // namespace

DiracPotential transformed_potential(const GbdtSequence& seq) {
  return package_transformed(seq, std::nullopt);
}

DiracPotential transformed_potential(const GbdtSequence& seq,
                                     const std::vector<UnitaryFactor>& factors) {
  if (static_cast<int>(factors.size()) != seq.steps()) {
    throw DimensionMismatch("transformed_potential: got " + std::to_string(factors.size()) +
                            " factors for " + std::to_string(seq.steps()) + " steps");
  }
  std::vector<ComplexMatrix> u;
  u.reserve(factors.size());
  for (int k = 0; k < seq.steps(); ++k) {
    if (factors[static_cast<std::size_t>(k)].k != k) {
      throw DimensionMismatch("transformed_potential: factor list is not in step order");
    }
    u.push_back(factors[static_cast<std::size_t>(k)].w);
  }
  return package_transformed(seq, std::move(u));
}

FundamentalTrajectory transformed_fundamental_direct(const GbdtSequence& seq, Complex z,
                                                     int steps) {
  require_nonzero_z(z, "transformed_fundamental_direct");
  require_step(steps, seq.steps(), "transformed_fundamental_direct");
  const int m = seq.triple().m();
  const Complex i_over_z = kI / z;
  FundamentalTrajectory t;
  t.z = z;
  t.values.reserve(static_cast<std::size_t>(steps) + 1);
  t.values.push_back(ComplexMatrix::Identity(m, m));
  for (int k = 0; k < steps; ++k) {
    const ComplexMatrix step = ComplexMatrix::Identity(m, m) + i_over_z * seq.c_tilde(k);
    t.values.push_back(step * t.values.back());
  }
  return t;
}

FundamentalTrajectory transformed_fundamental_darboux(const GbdtSequence& seq, Complex z,
                                                      int steps) {
  require_nonzero_z(z, "transformed_fundamental_darboux");
  require_step(steps, seq.steps(), "transformed_fundamental_darboux");
  DarbouxEvaluator at_minus_z(seq, -z);
  DarbouxEvaluator at_reflected(seq, -std::conj(z));
  const ComplexMatrix w0_inverse = at_reflected(0).adjoint();

  FundamentalTrajectory base = fundamental_solution(seq.initial(), z, steps);
  FundamentalTrajectory t;
  t.z = z;
  t.values.reserve(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) {
    t.values.push_back(at_minus_z(k) * base.at(k) * w0_inverse);
  }
  return t;
}

double intertwining_residual(const GbdtSequence& seq, const DarbouxEvaluator& ev, int k) {
  require_step(k, seq.steps() - 1, "intertwining_residual");
  const int m = seq.triple().m();
  const Complex i_over_z = kI / ev.z();
  const ComplexMatrix lhs =
      ev(k + 1) * (ComplexMatrix::Identity(m, m) - i_over_z * seq.initial().c(k));
  const ComplexMatrix rhs =
      (ComplexMatrix::Identity(m, m) - i_over_z * seq.c_tilde(k)) * ev(k);
  return (lhs - rhs).norm() / std::max(1.0, lhs.norm());
}

double intertwining_residual(const GbdtSequence& seq, int k, Complex z) {
  require_nonzero_z(z, "intertwining_residual");
  DarbouxEvaluator ev(seq, z);
  return intertwining_residual(seq, ev, k);
}

double stationary_identity_residual(const GbdtSequence& seq, int k) {
  require_step(k, seq.steps() - 1, "stationary_identity_residual");
  const ComplexMatrix& alpha = seq.triple().alpha;
  const ComplexMatrix alpha2 = alpha * alpha;
  const ComplexMatrix y_k = seq.s_inv_lambda(k).adjoint();
  const ComplexMatrix y_k1 = seq.s_inv_lambda(k + 1).adjoint();
  const ComplexMatrix lhs =
      y_k1 * (alpha2 + ComplexMatrix::Identity(alpha.rows(), alpha.cols()));
  const ComplexMatrix rhs = y_k * alpha2 - kI * (seq.c_tilde(k) * (y_k * alpha));
  return (lhs - rhs).norm() / std::max(1.0, lhs.norm());
}

std::vector<Complex> default_z_grid(const ComplexMatrix& alpha, int points) {
  if (points < 1) {
    throw DimensionMismatch("default_z_grid: need at least one point");
  }
  const double s = std::max(alpha.norm(), 1e-8);

  std::vector<Complex> exclusions{Complex(0.0, 0.0)};
  if (alpha.rows() <= kSpectrumDimensionLimit) {
    SpectrumResult sp = spectrum_diagnostic(alpha);
    for (Complex ev : sp.eigenvalues) {
      exclusions.push_back(ev);
      exclusions.push_back(-ev);
      exclusions.push_back(std::conj(ev));
      exclusions.push_back(-std::conj(ev));
    }
  }
  const double clearance = 0.1 * s;
  auto clear = [&](Complex p) {
    for (Complex e : exclusions) {
      if (std::abs(p - e) < clearance) return false;
    }
    return true;
  };

  // One template per band: real axis, upper half-plane, lower half-plane.
  const Complex real_band[4] = {{-1.9, 0.0}, {-0.85, 0.0}, {0.95, 0.0}, {1.8, 0.0}};
  const Complex upper_band[4] = {{0.55, 0.65}, {-0.45, 1.05}, {1.15, 0.5}, {-1.25, 0.85}};
  const Complex lower_band[4] = {{0.65, -0.55}, {-0.55, -0.95}, {1.05, -0.75}, {-1.15, -0.45}};

  std::vector<Complex> grid;
  grid.reserve(static_cast<std::size_t>(points));
  int produced = 0;
  for (int cycle = 0; produced < points; ++cycle) {
    const double radius = 1.0 + 0.5 * cycle;
    for (int idx = 0; idx < 4 && produced < points; ++idx) {
      for (const Complex* band : {real_band, upper_band, lower_band}) {
        if (produced >= points) break;
        Complex p = band[idx] * s * radius;
        int guard = 0;
        while (!clear(p) && guard < 200) {
          p *= 1.17;
          ++guard;
        }
        grid.push_back(p);
        ++produced;
      }
    }
  }
  return grid;
}

}  // namespace gbdt
