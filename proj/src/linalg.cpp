#include "gbdt/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace gbdt {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_square(const ComplexMatrix& a, const char* what) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw DimensionMismatch(std::string(what) + ": expected a nonempty square matrix, got " +
                            std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

// (0, 1] with 53-bit resolution, deterministic in the engine state.
double uniform_open(std::mt19937_64& eng) {
  return (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;
}

Complex standard_complex_gaussian(std::mt19937_64& eng) {
  const double u1 = uniform_open(eng);
  const double u2 = uniform_open(eng);
  const double r = std::sqrt(-2.0 * std::log(u1));
  return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
}

}  // namespace

void Tolerance::validate() const {
  if (!(rel >= 0.0) || !(abs >= 0.0)) {
    throw Error("Tolerance: rel and abs must be nonnegative");
  }
  if (!(cond_warn >= 1.0)) {
    throw Error("Tolerance: cond_warn must be >= 1");
  }
}

bool all_finite(const ComplexMatrix& a) {
  return a.allFinite();
}

void require_finite(const ComplexMatrix& a, const char* what) {
  if (!all_finite(a)) {
    throw Error(std::string(what) + ": non-finite entries");
  }
}

double hermitian_residual(const ComplexMatrix& a) {
  require_square(a, "hermitian_residual");
  return (a - a.adjoint()).norm() / std::max(1.0, a.norm());
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  return 0.5 * (a + a.adjoint());
}

LuSolver::LuSolver(const ComplexMatrix& a, const Tolerance& tol) {
  tol.validate();
  require_square(a, "LuSolver");
  require_finite(a, "LuSolver");
  abs_tol_ = tol.abs;
  lu_.compute(a);

  // Compare each pivot against the scale of the original row it came from.
  Eigen::VectorXd row_scale = a.cwiseAbs().rowwise().maxCoeff();
  Eigen::VectorXd permuted_scale = lu_.permutationP() * row_scale;
  singular_ = false;
  min_pivot_ = std::numeric_limits<double>::infinity();
  const auto diag = lu_.matrixLU().diagonal();
  for (Eigen::Index j = 0; j < diag.size(); ++j) {
    const double p = std::abs(diag(j));
    min_pivot_ = std::min(min_pivot_, p);
    if (p <= abs_tol_ * permuted_scale(j)) {
      singular_ = true;
    }
  }
  const double rc = singular_ ? 0.0 : lu_.rcond();
  condition_ = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
}

bool LuSolver::pivot_below(double scale) const {
  return singular_ || min_pivot_ <= abs_tol_ * scale;
}

Complex LuSolver::determinant() const {
  return lu_.determinant();
}

ComplexMatrix LuSolver::solve(const ComplexMatrix& b) const {
  if (singular_) {
    throw SingularMatrix("solve: matrix is singular (pivot " + std::to_string(min_pivot_) + ")");
  }
  if (b.rows() != lu_.rows()) {
    throw DimensionMismatch("solve: right-hand side has " + std::to_string(b.rows()) +
                            " rows, expected " + std::to_string(lu_.rows()));
  }
  require_finite(b, "solve: B");
  return lu_.solve(b);
}

ComplexMatrix solve(const ComplexMatrix& a, const ComplexMatrix& b, const Tolerance& tol) {
  return LuSolver(a, tol).solve(b);
}

SolveResult solve_with_report(const ComplexMatrix& a, const ComplexMatrix& b,
                              const Tolerance& tol) {
  LuSolver lu(a, tol);
  SolveResult r;
  r.x = lu.solve(b);
  r.condition_estimate = lu.condition_estimate();
  r.cond_warning = r.condition_estimate > tol.cond_warn;
  return r;
}

CholeskyFactor CholeskyFactor::factor(const ComplexMatrix& a, const Tolerance& tol) {
  tol.validate();
  require_square(a, "cholesky");
  require_finite(a, "cholesky");

  const ComplexMatrix h = hermitian_part(a);
  const Eigen::Index n = h.rows();
  const double pivot_floor = tol.abs * h.norm();

  CholeskyFactor f;
  f.l_ = ComplexMatrix::Zero(n, n);
  f.min_pivot_ = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    Complex s = h(j, j);
    if (j > 0) {
      s -= (f.l_.row(j).head(j) * f.l_.row(j).head(j).adjoint()).value();
    }
    const double d = s.real();
    if (d <= pivot_floor) {
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(d) + " at index " +
                                    std::to_string(j) + " is below the positivity floor " +
                                    std::to_string(pivot_floor),
                                d);
    }
    f.min_pivot_ = std::min(f.min_pivot_, d);
    const double ljj = std::sqrt(d);
    f.l_(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      Complex v = h(i, j);
      if (j > 0) {
        v -= (f.l_.row(i).head(j) * f.l_.row(j).head(j).adjoint()).value();
      }
      f.l_(i, j) = v / ljj;
    }
  }
  return f;
}

ComplexMatrix CholeskyFactor::solve(const ComplexMatrix& b) const {
  if (b.rows() != l_.rows()) {
    throw DimensionMismatch("cholesky solve: right-hand side has " + std::to_string(b.rows()) +
                            " rows, expected " + std::to_string(l_.rows()));
  }
  ComplexMatrix y = l_.triangularView<Eigen::Lower>().solve(b);
  const ComplexMatrix lt = l_.adjoint();
  return lt.triangularView<Eigen::Upper>().solve(y);
}

ComplexMatrix CholeskyFactor::reconstruct() const {
  return l_ * l_.adjoint();
}

ComplexMatrix matrix_exponential(const ComplexMatrix& m) {
  require_square(m, "matrix_exponential");
  require_finite(m, "matrix_exponential");
  ComplexMatrix e = m.exp();
  if (!all_finite(e)) {
    throw Overflow("matrix_exponential: result left the representable range (input norm " +
                   std::to_string(m.norm()) + ")");
  }
  return e;
}

double smallest_singular_value(const ComplexMatrix& a) {
  require_square(a, "smallest_singular_value");
  require_finite(a, "smallest_singular_value");
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(a.rows() - 1);
}

SpectrumResult spectrum_diagnostic(const ComplexMatrix& a) {
  require_square(a, "spectrum_diagnostic");
  require_finite(a, "spectrum_diagnostic");
  if (a.rows() > kSpectrumDimensionLimit) {
    throw Error("spectrum_diagnostic: dimension " + std::to_string(a.rows()) +
                " exceeds the diagnostic limit " + std::to_string(kSpectrumDimensionLimit));
  }
  Eigen::ComplexEigenSolver<ComplexMatrix> es(a, /*computeEigenvectors=*/false);
  SpectrumResult r;
  r.converged = es.info() == Eigen::Success;
  if (r.converged) {
    r.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + a.rows());
    std::sort(r.eigenvalues.begin(), r.eigenvalues.end(), [](Complex x, Complex y) {
      if (x.real() != y.real()) return x.real() < y.real();
      return x.imag() < y.imag();
    });
  }
  return r;
}

ComplexMatrix random_unitary(int m, std::uint64_t seed) {
  if (m < 1) {
    throw DimensionMismatch("random_unitary: m must be positive");
  }
  std::mt19937_64 eng(seed);
  ComplexMatrix g(m, m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      g(r, c) = standard_complex_gaussian(eng);
    }
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  // Fix the phase convention so Q is the factor with positive R diagonal.
  for (int j = 0; j < m; ++j) {
    const Complex d = qr.matrixQR()(j, j);
    const double mag = std::abs(d);
    if (mag > 0.0) {
      q.col(j) *= d / mag;
    }
  }
  return q;
}

ComplexMatrix hermitian_sqrt(const ComplexMatrix& a, const Tolerance& tol) {
  tol.validate();
  require_square(a, "hermitian_sqrt");
  require_finite(a, "hermitian_sqrt");
  const ComplexMatrix h = hermitian_part(a);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  if (es.info() != Eigen::Success) {
    throw Error("hermitian_sqrt: eigendecomposition did not converge");
  }
  const double floor = tol.abs * std::max(1.0, h.norm());
  if (es.eigenvalues().minCoeff() <= floor) {
    throw NotPositiveDefinite("hermitian_sqrt: smallest eigenvalue " +
                                  std::to_string(es.eigenvalues().minCoeff()) +
                                  " is below the positivity floor " + std::to_string(floor),
                              es.eigenvalues().minCoeff());
  }
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

}  // namespace gbdt
