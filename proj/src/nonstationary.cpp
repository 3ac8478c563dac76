#include "gbdt/nonstationary.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gbdt {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_block_range(const SolutionGenerator& gen, int k_max, const char* what) {
  if (k_max < 0 || k_max + 1 > gen.blocks()) {
    throw DimensionMismatch(std::string(what) + ": need blocks 0.." + std::to_string(k_max) +
                            ", generator has " + std::to_string(gen.blocks()));
  }
  if (k_max > static_cast<int>(gen.c_tilde.size())) {
    throw DimensionMismatch(std::string(what) + ": need " + std::to_string(k_max) +
                            " coupling blocks, generator has " +
                            std::to_string(gen.c_tilde.size()));
  }
}

void require_finite_time(double t, const char* what) {
  if (!std::isfinite(t)) {
    throw Error(std::string(what) + ": non-finite t");
  }
}

}  // namespace

SolutionGenerator build_generator(const GbdtSequence& seq, int k_max) {
  if (k_max < 0 || k_max > seq.steps()) {
    throw DimensionMismatch("build_generator: k_max " + std::to_string(k_max) +
                            " out of range [0, " + std::to_string(seq.steps()) + "]");
  }
  SolutionGenerator gen;
  gen.alpha = seq.triple().alpha;
  gen.y_blocks.reserve(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) {
    gen.y_blocks.push_back(seq.s_inv_lambda(k).adjoint());  // Y_k = Lambda_k* S_k^{-1}
  }
  gen.c_tilde.reserve(static_cast<std::size_t>(std::min(k_max, seq.steps() - 1)) + 1);
  for (int k = 0; k < k_max; ++k) {
    gen.c_tilde.push_back(seq.c_tilde(k));
  }
  return gen;
}

PsiSample sample_psi(const SolutionGenerator& gen, double t) {
  require_finite_time(t, "sample_psi");
  const ComplexMatrix propagator = matrix_exponential(kI * t * gen.alpha);
  PsiSample sample;
  sample.t = t;
  sample.blocks.reserve(gen.y_blocks.size());
  for (const ComplexMatrix& y : gen.y_blocks) {
    sample.blocks.push_back(y * propagator);
  }
  return sample;
}

namespace {

double residual_scale(const SolutionGenerator& gen, int k, double alpha_norm_sq) {
  const double yk = gen.y_blocks[static_cast<std::size_t>(k)].norm();
  const double yk1 = gen.y_blocks[static_cast<std::size_t>(k) + 1].norm();
  return std::max(1.0, yk * alpha_norm_sq + yk1 * (alpha_norm_sq + 1.0));
}

}  // namespace

std::vector<BlockResidual> nonstationary_block_residuals(const SolutionGenerator& gen, double t,
                                                         int k_max) {
  require_finite_time(t, "nonstationary_block_residuals");
  require_block_range(gen, k_max, "nonstationary_block_residuals");
  const ComplexMatrix propagator = matrix_exponential(kI * t * gen.alpha);
  const ComplexMatrix alpha2 = gen.alpha * gen.alpha;
  const double alpha_norm_sq = gen.alpha.norm() * gen.alpha.norm();

  std::vector<BlockResidual> out;
  out.reserve(static_cast<std::size_t>(k_max));
  for (int k = 0; k < k_max; ++k) {
    const ComplexMatrix& yk = gen.y_blocks[static_cast<std::size_t>(k)];
    const ComplexMatrix& yk1 = gen.y_blocks[static_cast<std::size_t>(k) + 1];
    const ComplexMatrix psi_k1 = yk1 * propagator;
    const ComplexMatrix dpsi_k = yk * (kI * gen.alpha) * propagator;
    const ComplexMatrix ddpsi_k = -(yk * alpha2) * propagator;
    const ComplexMatrix ddpsi_k1 = -(yk1 * alpha2) * propagator;
    const ComplexMatrix res =
        ddpsi_k - ddpsi_k1 + gen.c_tilde[static_cast<std::size_t>(k)] * dpsi_k + psi_k1;
    BlockResidual r;
    r.k = k;
    r.scale = residual_scale(gen, k, alpha_norm_sq);
    r.residual = res.norm() / r.scale;
    out.push_back(r);
  }
  return out;
}

std::vector<double> nonstationary_residual(const SolutionGenerator& gen, double t, int k_max) {
  std::vector<double> out;
  for (const BlockResidual& r : nonstationary_block_residuals(gen, t, k_max)) {
    out.push_back(r.residual);
  }
  return out;
}

std::vector<BlockResidual> stationary_block_residuals(const SolutionGenerator& gen, int k_max) {
  require_block_range(gen, k_max, "stationary_block_residuals");
  const ComplexMatrix alpha2 = gen.alpha * gen.alpha;
  const double alpha_norm_sq = gen.alpha.norm() * gen.alpha.norm();
  std::vector<BlockResidual> out;
  out.reserve(static_cast<std::size_t>(k_max));
  for (int k = 0; k < k_max; ++k) {
    const ComplexMatrix& yk = gen.y_blocks[static_cast<std::size_t>(k)];
    const ComplexMatrix& yk1 = gen.y_blocks[static_cast<std::size_t>(k) + 1];
    const ComplexMatrix res =
        -(yk * alpha2) + yk1 * alpha2 + kI * (gen.c_tilde[static_cast<std::size_t>(k)] * yk) * gen.alpha + yk1;
    BlockResidual r;
    r.k = k;
    r.scale = residual_scale(gen, k, alpha_norm_sq);
    r.residual = res.norm() / r.scale;
    out.push_back(r);
  }
  return out;
}

std::vector<double> finite_difference_check(const SolutionGenerator& gen, double t, double h,
                                            int k_max) {
  require_finite_time(t, "finite_difference_check");
  if (!(h > 0.0)) {
    throw Error("finite_difference_check: h must be positive");
  }
  require_block_range(gen, std::max(k_max - 1, 0), "finite_difference_check");
  if (k_max > gen.blocks()) {
    throw DimensionMismatch("finite_difference_check: k_max exceeds block count");
  }
  const ComplexMatrix e0 = matrix_exponential(kI * t * gen.alpha);
  const ComplexMatrix ep = matrix_exponential(kI * (t + h) * gen.alpha);
  const ComplexMatrix em = matrix_exponential(kI * (t - h) * gen.alpha);
  const ComplexMatrix alpha2 = gen.alpha * gen.alpha;

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(k_max));
  for (int k = 0; k < k_max; ++k) {
    const ComplexMatrix& y = gen.y_blocks[static_cast<std::size_t>(k)];
    const ComplexMatrix p0 = y * e0;
    const ComplexMatrix pp = y * ep;
    const ComplexMatrix pm = y * em;
    const ComplexMatrix d1_fd = (pp - pm) / (2.0 * h);
    const ComplexMatrix d2_fd = (pp - 2.0 * p0 + pm) / (h * h);
    const ComplexMatrix d1 = y * (kI * gen.alpha) * e0;
    const ComplexMatrix d2 = -(y * alpha2) * e0;
    out.push_back(std::max((d1_fd - d1).norm(), (d2_fd - d2).norm()));
  }
  return out;
}

std::vector<double> default_t_grid(const ComplexMatrix& alpha) {
  const double scale = std::min(1.0, 1.0 / std::max(alpha.norm(), 1e-8));
  return {-scale, -0.5 * scale, 0.0, 0.5 * scale, scale};
}

}  // namespace gbdt
