#include "gbdt/dirac.hpp"

#include <string>
#include <utility>

namespace gbdt {

namespace {

// Per-step seed derivation for random-unitary potentials.
std::uint64_t step_seed(std::uint64_t base, int k) {
  return base + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(k + 1);
}

void require_index(int k, int count, const char* what) {
  if (k < 0 || k >= count) {
    throw DimensionMismatch(std::string(what) + ": index " + std::to_string(k) +
                            " out of range [0, " + std::to_string(count) + ")");
  }
}

}  // namespace

SignatureSpec::SignatureSpec(int m1_in, int m2_in) : m1(m1_in), m2(m2_in) {
  if (m1 < 1 || m2 < 1) {
    throw DimensionMismatch("SignatureSpec: m1 and m2 must be positive, got m1=" +
                            std::to_string(m1) + ", m2=" + std::to_string(m2));
  }
}

ComplexMatrix SignatureSpec::j() const {
  ComplexMatrix out = ComplexMatrix::Zero(m(), m());
  for (int i = 0; i < m1; ++i) out(i, i) = 1.0;
  for (int i = m1; i < m(); ++i) out(i, i) = -1.0;
  return out;
}

DiracPotential::DiracPotential(SignatureSpec signature, std::vector<ComplexMatrix> c,
                               std::optional<std::vector<ComplexMatrix>> u)
    : signature_(signature), c_(std::move(c)), u_(std::move(u)) {
  const int m = signature_.m();
  for (std::size_t k = 0; k < c_.size(); ++k) {
    if (c_[k].rows() != m || c_[k].cols() != m) {
      throw DimensionMismatch("DiracPotential: C_" + std::to_string(k) + " is " +
                              std::to_string(c_[k].rows()) + "x" + std::to_string(c_[k].cols()) +
                              ", expected " + std::to_string(m) + "x" + std::to_string(m));
    }
    require_finite(c_[k], "DiracPotential: C_k");
  }
  if (u_ && u_->size() != c_.size()) {
    throw DimensionMismatch("DiracPotential: got " + std::to_string(u_->size()) +
                            " unitaries for " + std::to_string(c_.size()) + " steps");
  }
}

DiracPotential DiracPotential::constant_j(SignatureSpec signature, int steps) {
  if (steps < 0) {
    throw DimensionMismatch("DiracPotential::constant_j: negative step count");
  }
  const ComplexMatrix j = signature.j();
  const ComplexMatrix id = ComplexMatrix::Identity(signature.m(), signature.m());
  std::vector<ComplexMatrix> c(static_cast<std::size_t>(steps), j);
  std::vector<ComplexMatrix> u(static_cast<std::size_t>(steps), id);
  return DiracPotential(signature, std::move(c), std::move(u));
}

DiracPotential DiracPotential::from_unitaries(SignatureSpec signature,
                                              std::vector<ComplexMatrix> unitaries,
                                              const Tolerance& tol) {
  tol.validate();
  const int m = signature.m();
  const ComplexMatrix j = signature.j();
  const ComplexMatrix id = ComplexMatrix::Identity(m, m);
  // Accept anything a reasonable generator can produce; reject the rest loudly.
  const double unitary_tol = std::max(1e-8, 100.0 * tol.rel);
  std::vector<ComplexMatrix> c;
  c.reserve(unitaries.size());
  for (std::size_t k = 0; k < unitaries.size(); ++k) {
    const ComplexMatrix& uk = unitaries[k];
    if (uk.rows() != m || uk.cols() != m) {
      throw DimensionMismatch("from_unitaries: U_" + std::to_string(k) + " is " +
                              std::to_string(uk.rows()) + "x" + std::to_string(uk.cols()) +
                              ", expected " + std::to_string(m) + "x" + std::to_string(m));
    }
    require_finite(uk, "from_unitaries: U_k");
    const double res = (uk * uk.adjoint() - id).norm();
    if (res > unitary_tol) {
      throw NotUnitary("from_unitaries: U_" + std::to_string(k) + " has unitarity residual " +
                           std::to_string(res),
                       static_cast<int>(k));
    }
    c.push_back(uk.adjoint() * j * uk);
  }
  return DiracPotential(signature, std::move(c), std::move(unitaries));
}

DiracPotential DiracPotential::random(SignatureSpec signature, int steps, std::uint64_t seed) {
  if (steps < 0) {
    throw DimensionMismatch("DiracPotential::random: negative step count");
  }
  std::vector<ComplexMatrix> u;
  u.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    u.push_back(random_unitary(signature.m(), step_seed(seed, k)));
  }
  return from_unitaries(signature, std::move(u));
}

const ComplexMatrix& DiracPotential::c(int k) const {
  require_index(k, steps(), "DiracPotential::c");
  return c_[static_cast<std::size_t>(k)];
}

const ComplexMatrix& DiracPotential::u(int k) const {
  if (!u_) {
    throw InvalidRequest("DiracPotential::u: no unitaries stored for this potential");
  }
  require_index(k, steps(), "DiracPotential::u");
  return (*u_)[static_cast<std::size_t>(k)];
}

PotentialCheck validate_potential(const DiracPotential& p, const Tolerance& tol) {
  tol.validate();
  const int m = p.signature().m();
  const ComplexMatrix id = ComplexMatrix::Identity(m, m);
  const ComplexMatrix j = p.signature().j();
  PotentialCheck out;
  out.pass = true;
  for (int k = 0; k < p.steps(); ++k) {
    PotentialCheck::Step s;
    s.k = k;
    const ComplexMatrix& c = p.c(k);
    s.hermitian_residual = (c - c.adjoint()).norm();
    s.involution_residual = (c * c - id).norm();
    if (p.has_unitaries()) {
      s.unitary_consistency = (c - p.u(k).adjoint() * j * p.u(k)).norm();
    }
    const double threshold = 10.0 * tol.rel * (1.0 + k);
    if (s.hermitian_residual > threshold || s.involution_residual > threshold ||
        s.unitary_consistency > threshold) {
      out.pass = false;
    }
    out.max_hermitian_residual = std::max(out.max_hermitian_residual, s.hermitian_residual);
    out.max_involution_residual = std::max(out.max_involution_residual, s.involution_residual);
    out.max_unitary_consistency = std::max(out.max_unitary_consistency, s.unitary_consistency);
    out.steps.push_back(s);
  }
  return out;
}

const ComplexMatrix& FundamentalTrajectory::at(int k) const {
  require_index(k, static_cast<int>(values.size()), "FundamentalTrajectory::at");
  return values[static_cast<std::size_t>(k)];
}

FundamentalTrajectory fundamental_solution(const DiracPotential& p, Complex z, int steps) {
  if (z == Complex(0.0, 0.0)) {
    throw ZeroSpectralParameter("fundamental_solution: z = 0");
  }
  if (steps < 0 || steps > p.steps()) {
    throw DimensionMismatch("fundamental_solution: requested " + std::to_string(steps) +
                            " steps, potential has " + std::to_string(p.steps()));
  }
  const int m = p.signature().m();
  const Complex i_over_z = Complex(0.0, 1.0) / z;
  FundamentalTrajectory t;
  t.z = z;
  t.values.reserve(static_cast<std::size_t>(steps) + 1);
  t.values.push_back(ComplexMatrix::Identity(m, m));
  for (int k = 0; k < steps; ++k) {
    const ComplexMatrix step = ComplexMatrix::Identity(m, m) + i_over_z * p.c(k);
    t.values.push_back(step * t.values.back());
  }
  return t;
}

}  // namespace gbdt
