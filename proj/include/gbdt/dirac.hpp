#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gbdt/linalg.hpp"

namespace gbdt {

/// The signature split m = m1 + m2 behind j = diag(I_{m1}, -I_{m2}).
struct SignatureSpec {
  int m1 = 1;
  int m2 = 1;

  SignatureSpec() = default;
  SignatureSpec(int m1_in, int m2_in);  // throws DimensionMismatch unless both >= 1

  int m() const { return m1 + m2; }
  ComplexMatrix j() const;
};

/// Coefficient sequence {C_k} of a discrete skew-selfadjoint Dirac system,
/// optionally with the generating unitaries {U_k} (C_k = U_k* j U_k).
class DiracPotential {
 public:
  DiracPotential() = default;
  DiracPotential(SignatureSpec signature, std::vector<ComplexMatrix> c,
                 std::optional<std::vector<ComplexMatrix>> u = std::nullopt);

  /// C_k = j for every step; U_k = I attached.
  static DiracPotential constant_j(SignatureSpec signature, int steps);
  /// C_k = U_k* j U_k; throws NotUnitary(k) when some U_k fails the tolerance.
  static DiracPotential from_unitaries(SignatureSpec signature,
                                       std::vector<ComplexMatrix> unitaries,
                                       const Tolerance& tol = {});
  /// Seeded random-unitary potential; deterministic in (signature, steps, seed).
  static DiracPotential random(SignatureSpec signature, int steps, std::uint64_t seed);

  const SignatureSpec& signature() const { return signature_; }
  int steps() const { return static_cast<int>(c_.size()); }
  const ComplexMatrix& c(int k) const;
  bool has_unitaries() const { return u_.has_value(); }
  const ComplexMatrix& u(int k) const;

 private:
  SignatureSpec signature_;
  std::vector<ComplexMatrix> c_;
  std::optional<std::vector<ComplexMatrix>> u_;
};

/// Per-step residuals of the defining potential properties C_k = C_k*,
/// C_k^2 = I, and (when unitaries are stored) C_k = U_k* j U_k.
struct PotentialCheck {
  struct Step {
    int k = 0;
    double hermitian_residual = 0.0;    // ‖C_k − C_k*‖_F
    double involution_residual = 0.0;   // ‖C_k² − I‖_F
    double unitary_consistency = 0.0;   // ‖C_k − U_k* j U_k‖_F when U_k stored
  };
  std::vector<Step> steps;
  double max_hermitian_residual = 0.0;
  double max_involution_residual = 0.0;
  double max_unitary_consistency = 0.0;
  bool pass = false;
};

/// Verdict uses the per-step threshold 10·rel·(1 + k).
PotentialCheck validate_potential(const DiracPotential& p, const Tolerance& tol = {});

/// w(0,z), ..., w(K,z) with w(0,z) = I.
struct FundamentalTrajectory {
  Complex z;
  std::vector<ComplexMatrix> values;

  int steps() const { return static_cast<int>(values.size()) - 1; }
  const ComplexMatrix& at(int k) const;
};

/// Iterates w(k+1,z) = (I + (i/z) C_k) w(k,z); z = 0 is rejected
/// (ZeroSpectralParameter), z = ±i is allowed.
FundamentalTrajectory fundamental_solution(const DiracPotential& p, Complex z, int steps);

}  // namespace gbdt
