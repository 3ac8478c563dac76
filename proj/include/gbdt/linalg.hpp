#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "gbdt/errors.hpp"

namespace gbdt {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Numerical tolerances shared across the library.
///
/// `rel` bounds relative residuals, `abs` is the absolute floor used by
/// singularity and positivity thresholds, `cond_warn` is the condition-number
/// estimate above which diagnostics raise a warning flag.
struct Tolerance {
  double rel = 1e-10;
  double abs = 1e-13;
  double cond_warn = 1e12;

  void validate() const;  // throws Error on rel/abs < 0 or cond_warn < 1
};

bool all_finite(const ComplexMatrix& a);
void require_finite(const ComplexMatrix& a, const char* what);

/// ‖A − A*‖_F / max(1, ‖A‖_F); zero exactly when A is Hermitian.
double hermitian_residual(const ComplexMatrix& a);

/// (A + A*) / 2
ComplexMatrix hermitian_part(const ComplexMatrix& a);

/// Row-pivoted LU of a square matrix, with singularity detection and a
/// condition estimate. Pivots are compared against abs·(row scale); `solve`
/// refuses once the factorization is flagged singular.
class LuSolver {
 public:
  LuSolver() = default;
  explicit LuSolver(const ComplexMatrix& a, const Tolerance& tol = {});

  bool singular() const { return singular_; }
  double min_pivot() const { return min_pivot_; }
  /// True when the smallest pivot is ≤ abs·scale for a caller-chosen scale.
  bool pivot_below(double scale) const;
  double condition_estimate() const { return condition_; }
  Complex determinant() const;
  Eigen::Index size() const { return lu_.rows(); }

  ComplexMatrix solve(const ComplexMatrix& b) const;  // throws SingularMatrix

 private:
  Eigen::PartialPivLU<ComplexMatrix> lu_;
  double min_pivot_ = 0.0;
  double condition_ = 0.0;
  double abs_tol_ = 1e-13;
  bool singular_ = true;
};

struct SolveResult {
  ComplexMatrix x;
  double condition_estimate = 0.0;
  bool cond_warning = false;
};

ComplexMatrix solve(const ComplexMatrix& a, const ComplexMatrix& b,
                    const Tolerance& tol = {});
SolveResult solve_with_report(const ComplexMatrix& a, const ComplexMatrix& b,
                              const Tolerance& tol = {});

/// Lower-triangular Cholesky factor of the Hermitian part of a matrix.
/// Successful factorization certifies positive definiteness of (A + A*)/2.
class CholeskyFactor {
 public:
  /// throws NotPositiveDefinite when a diagonal pivot is ≤ abs·‖A‖_F
  static CholeskyFactor factor(const ComplexMatrix& a, const Tolerance& tol = {});

  const ComplexMatrix& lower() const { return l_; }
  double min_pivot() const { return min_pivot_; }
  ComplexMatrix solve(const ComplexMatrix& b) const;
  ComplexMatrix reconstruct() const;  // L·L*

 private:
  CholeskyFactor() = default;
  ComplexMatrix l_;
  double min_pivot_ = 0.0;
};

/// e^M by scaling-and-squaring with a Padé kernel; throws Overflow when the
/// result leaves the representable range.
ComplexMatrix matrix_exponential(const ComplexMatrix& m);

/// σ_min(A) of a square matrix; 0 for an exactly singular input.
double smallest_singular_value(const ComplexMatrix& a);

inline constexpr int kSpectrumDimensionLimit = 64;

/// Diagnostic eigenvalue estimates, sorted by (re, im). Non-convergence is
/// reported through the flag, never thrown.
struct SpectrumResult {
  std::vector<Complex> eigenvalues;
  bool converged = false;
};

SpectrumResult spectrum_diagnostic(const ComplexMatrix& a);

/// Seeded Haar-like random unitary: orthonormalized complex Gaussian matrix
/// with the R-diagonal phases normalized. Deterministic in (m, seed).
ComplexMatrix random_unitary(int m, std::uint64_t seed);

/// Principal square root of a Hermitian positive-definite matrix.
ComplexMatrix hermitian_sqrt(const ComplexMatrix& a, const Tolerance& tol = {});

}  // namespace gbdt
