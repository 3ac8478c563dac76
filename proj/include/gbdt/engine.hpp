#pragma once

#include <string>
#include <variant>
#include <vector>

#include "gbdt/dirac.hpp"
#include "gbdt/linalg.hpp"

namespace gbdt {

enum class TripleMode { Strict, Weak };

const char* to_string(TripleMode mode);
TripleMode triple_mode_from_string(const std::string& s);  // ParseError on junk

/// The matrix triple {alpha, S0, Lambda0} that parameterizes one transformation.
/// Strict mode demands S0 > 0 and 0, i outside the spectrum of alpha; weak mode
/// only S0 = S0* with alpha and every S_k invertible.
struct GbdtTriple {
  ComplexMatrix alpha;    // n x n
  ComplexMatrix s0;       // n x n
  ComplexMatrix lambda0;  // n x m
  TripleMode mode = TripleMode::Strict;

  int n() const { return static_cast<int>(alpha.rows()); }
  int m() const { return static_cast<int>(lambda0.cols()); }
  void check_dimensions() const;  // throws DimensionMismatch
};

/// ‖alpha·S − S·alpha* − i·Lambda·Lambda*‖_F relative to
/// ‖alpha‖·‖S‖ + ‖Lambda‖² (Frobenius norms).
double identity_residual(const ComplexMatrix& alpha, const ComplexMatrix& s,
                         const ComplexMatrix& lambda);

struct AdmissibilityReport {
  double identity_residual = 0.0;
  double s0_hermitian_residual = 0.0;
  bool s0_positive = false;
  double s0_min_pivot = 0.0;
  double sigma_min_alpha = 0.0;
  double sigma_min_alpha_minus_i = 0.0;
  std::vector<Complex> alpha_spectrum;
  bool spectrum_converged = false;
  /// Some eigenvalue estimate of alpha sits below the real axis beyond
  /// tolerance; for a valid triple this cannot happen, so it flags a
  /// materially violated identity.
  bool negative_imaginary_eigenvalue = false;
  bool alpha_invertible = false;
  bool admissible = false;  // strict verdict
  bool weak_ok = false;     // weak verdict
  std::vector<std::string> failures;
};

AdmissibilityReport validate_triple(const GbdtTriple& t, const Tolerance& tol = {});

struct StepDiagnostics {
  int k = 0;
  double identity_residual = 0.0;    // relative, see identity_residual()
  double s_hermitian_residual = 0.0; // asymmetry of S_k before symmetrization
  double s_min_pivot = 0.0;
  double s_condition = 0.0;
  bool cond_warning = false;
  bool positivity_checked = false;   // true in strict mode
  bool s_positive = false;
  bool has_c_tilde = false;          // k < K only
  double c_involution_residual = 0.0;  // ‖C̃_k² − I‖_F
  double c_hermitian_residual = 0.0;   // ‖C̃_k − C̃_k*‖_F
};

/// Computed trajectories Lambda_0..Lambda_K, S_0..S_K (symmetrized, with
/// cached factorizations) and the transformed potential C̃_0..C̃_{K−1},
/// plus per-step diagnostics. Immutable once built.
class GbdtSequence {
 public:
  int steps() const { return steps_; }
  const GbdtTriple& triple() const { return triple_; }
  const DiracPotential& initial() const { return potential_; }
  const Tolerance& tolerance() const { return tol_; }

  const ComplexMatrix& lambda(int k) const;        // 0..K
  const ComplexMatrix& s(int k) const;             // 0..K
  const ComplexMatrix& c_tilde(int k) const;       // 0..K-1
  const ComplexMatrix& s_inv_lambda(int k) const;  // S_k^{-1} Lambda_k, 0..K
  ComplexMatrix solve_s(int k, const ComplexMatrix& b) const;
  const std::vector<StepDiagnostics>& diagnostics() const { return diag_; }

  double alpha_norm() const { return alpha_norm_; }
  /// Distance below which an evaluation point counts as colliding with
  /// the spectrum of alpha.
  double spectral_threshold() const { return tol_.rel * alpha_norm_; }

 private:
  friend GbdtSequence gbdt_iterate(const GbdtTriple&, const DiracPotential&, int,
                                   const Tolerance&);
  GbdtSequence() = default;

  GbdtTriple triple_;
  DiracPotential potential_;
  Tolerance tol_;
  int steps_ = 0;
  double alpha_norm_ = 0.0;
  std::vector<ComplexMatrix> lambda_;
  std::vector<ComplexMatrix> s_;
  std::vector<ComplexMatrix> c_tilde_;
  std::vector<ComplexMatrix> s_inv_lambda_;
  std::vector<std::variant<CholeskyFactor, LuSolver>> s_factor_;
  std::vector<StepDiagnostics> diag_;
};

/// Runs the coupled recursions for Lambda, S and C̃ through `steps` steps.
/// Strict mode factors every S_k by Cholesky and throws NumericalBreakdown(k)
/// if positivity is lost; weak mode uses pivoted LU and throws SingularS(k)
/// when det S_k vanishes.
GbdtSequence gbdt_iterate(const GbdtTriple& t, const DiracPotential& p, int steps,
                          const Tolerance& tol = {});

struct DarbouxEvaluation {
  int k = 0;
  Complex z;
  ComplexMatrix matrix;
};

/// Evaluates the Darboux matrix w_alpha(k, z) for one sequence at a fixed z,
/// sharing the resolvent factorization across k. Construction refuses z within
/// the spectral threshold of sigma(alpha).
class DarbouxEvaluator {
 public:
  DarbouxEvaluator(const GbdtSequence& seq, Complex z);  // throws SpectralCollision
  ComplexMatrix operator()(int k) const;
  Complex z() const { return z_; }

 private:
  const GbdtSequence* seq_;
  Complex z_;
  LuSolver resolvent_;
};

DarbouxEvaluation darboux_matrix(const GbdtSequence& seq, int k, Complex z);

/// ‖w_alpha(k,z) · w_alpha(k, conj z)* − I‖_F.
double transfer_inverse_residual(const GbdtSequence& seq, int k, Complex z);

struct UnitaryFactor {
  int k = 0;
  ComplexMatrix w;        // m x m, the transformed unitary
  ComplexMatrix q_breve;  // m1 x m1 Hermitian positive
  ComplexMatrix q_hat;    // m2 x m2 Hermitian positive
  double unitarity_residual = 0.0;    // ‖W W* − I‖_F
  double conjugation_residual = 0.0;  // ‖W* j W − C̃_k‖_F
  double q_breve_consistency = 0.0;   // relative ‖A1 − q̆ B1‖
  double q_hat_consistency = 0.0;
};

/// Recovers W_k with C̃_k = W_k* j W_k from the stored initial unitaries by
/// least squares against the half-projection identities at z = ±i.
UnitaryFactor unitary_factor(const GbdtSequence& seq, int k);

/// Packages {C̃_k} as a Dirac potential; validation failures are thrown.
DiracPotential transformed_potential(const GbdtSequence& seq);
/// Same, attaching W_k from previously computed factors as the unitaries.
DiracPotential transformed_potential(const GbdtSequence& seq,
                                     const std::vector<UnitaryFactor>& factors);

FundamentalTrajectory transformed_fundamental_direct(const GbdtSequence& seq, Complex z,
                                                     int steps);
/// Assembles the transformed fundamental solution from Darboux matrices and
/// the initial trajectory; the k = 0 inverse is taken in the closed adjoint
/// form rather than numerically inverted.
FundamentalTrajectory transformed_fundamental_darboux(const GbdtSequence& seq, Complex z,
                                                      int steps);

/// Relative residual of the one-step intertwining identity at (k, z).
double intertwining_residual(const GbdtSequence& seq, int k, Complex z);
double intertwining_residual(const GbdtSequence& seq, const DarbouxEvaluator& ev, int k);

/// Relative residual of the stationary identity relating consecutive
/// Lambda_k* S_k^{-1} rows through alpha^2 + I.
double stationary_identity_residual(const GbdtSequence& seq, int k);

/// Deterministic z-grid: 4 real, 4 upper-half-plane, 4 lower-half-plane
/// points (interleaved), pushed away from sigma(alpha), its sign/conjugate
/// reflections and 0 by at least 0.1·‖alpha‖_F.
std::vector<Complex> default_z_grid(const ComplexMatrix& alpha, int points = 12);

}  // namespace gbdt
