#pragma once

#include <vector>

#include "gbdt/engine.hpp"

namespace gbdt {

/// Block data behind the explicit solution Psi(t) = Y e^{i t alpha}:
/// Y_k = Lambda_k* S_k^{-1} for k = 0..K, plus the transformed potential
/// blocks coupling consecutive rows.
struct SolutionGenerator {
  ComplexMatrix alpha;
  std::vector<ComplexMatrix> y_blocks;  // m x n, k = 0..K
  std::vector<ComplexMatrix> c_tilde;   // k = 0..K-1

  int blocks() const { return static_cast<int>(y_blocks.size()); }
};

SolutionGenerator build_generator(const GbdtSequence& seq, int k_max);

struct PsiSample {
  double t = 0.0;
  std::vector<ComplexMatrix> blocks;  // Psi_k(t) = Y_k e^{i t alpha}
};

PsiSample sample_psi(const SolutionGenerator& gen, double t);

struct BlockResidual {
  int k = 0;
  double residual = 0.0;
  double scale = 1.0;
};

/// Scaled residuals of the second-order block system at time t, one per
/// coupled block pair (k, k+1), k = 0..k_max-1. Derivatives are analytic.
std::vector<BlockResidual> nonstationary_block_residuals(const SolutionGenerator& gen, double t,
                                                         int k_max);
std::vector<double> nonstationary_residual(const SolutionGenerator& gen, double t, int k_max);

/// Time-independent form of the same identity (the exponential factored out).
std::vector<BlockResidual> stationary_block_residuals(const SolutionGenerator& gen, int k_max);

/// Central-difference cross-check of the analytic first and second
/// derivatives; returns per-block max discrepancy, O(h^2) for smooth data.
std::vector<double> finite_difference_check(const SolutionGenerator& gen, double t, double h,
                                            int k_max);

/// {-1, -0.5, 0, 0.5, 1} scaled by min(1, 1/‖alpha‖_F).
std::vector<double> default_t_grid(const ComplexMatrix& alpha);

}  // namespace gbdt
