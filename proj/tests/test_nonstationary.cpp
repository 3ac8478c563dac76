#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gbdt/nonstationary.hpp"
#include "support/corpus.hpp"

using namespace gbdt;

namespace {

constexpr Complex I{0.0, 1.0};

GbdtTriple scalar_triple() {
  GbdtTriple t;
  t.alpha = ComplexMatrix::Constant(1, 1, Complex(0.0, 2.0));
  t.s0 = ComplexMatrix::Constant(1, 1, 1.0);
  t.lambda0 = ComplexMatrix::Zero(1, 2);
  t.lambda0(0, 0) = 2.0;
  t.mode = TripleMode::Strict;
  return t;
}

GbdtSequence scalar_sequence(int steps) {
  const DiracPotential p = DiracPotential::constant_j(SignatureSpec(1, 1), steps);
  return gbdt_iterate(scalar_triple(), p, steps);
}

GbdtSequence zero_sequence(int steps) {
  GbdtTriple t;
  t.alpha = ComplexMatrix::Identity(2, 2);
  t.s0 = ComplexMatrix::Identity(2, 2);
  t.lambda0 = ComplexMatrix::Zero(2, 3);
  t.mode = TripleMode::Strict;
  const DiracPotential p = DiracPotential::random(SignatureSpec(1, 2), steps, 77);
  return gbdt_iterate(t, p, steps);
}

}  // namespace

TEST_SUITE("nonstationary") {

TEST_CASE("build_generator: zero data gives zero blocks") {
  const GbdtSequence seq = zero_sequence(5);
  const SolutionGenerator gen = build_generator(seq, 5);
  REQUIRE(gen.blocks() == 6);
  for (const ComplexMatrix& y : gen.y_blocks) {
    CHECK(y.norm() == 0.0);
  }
}

TEST_CASE("build_generator: scalar fixture values and the defining residual") {
  const GbdtSequence seq = scalar_sequence(3);
  const SolutionGenerator gen = build_generator(seq, 3);
  // Y_0 = Lambda_0*/S_0 = [2; 0],  Y_1 = [3; 0] / (9/4) = [4/3; 0]
  CHECK(std::abs(gen.y_blocks[0](0, 0) - 2.0) <= 1e-12);
  CHECK(std::abs(gen.y_blocks[0](1, 0)) <= 1e-12);
  CHECK(std::abs(gen.y_blocks[1](0, 0) - 4.0 / 3.0) <= 1e-12);
  CHECK(std::abs(gen.y_blocks[1](1, 0)) <= 1e-12);
  for (int k = 0; k <= 3; ++k) {
    CHECK((gen.y_blocks[static_cast<std::size_t>(k)] * seq.s(k) - seq.lambda(k).adjoint())
              .norm() <= 1e-12);
  }
}

TEST_CASE("sample_psi: t = 0 returns the blocks, fixture value at t = 1") {
  const GbdtSequence seq = scalar_sequence(2);
  const SolutionGenerator gen = build_generator(seq, 2);
  const PsiSample at0 = sample_psi(gen, 0.0);
  for (std::size_t k = 0; k < gen.y_blocks.size(); ++k) {
    CHECK((at0.blocks[k] - gen.y_blocks[k]).norm() == 0.0);
  }
  // e^{i·1·(2i)} = e^{-2}: Psi_0(1) = [2 e^{-2}; 0]
  const PsiSample at1 = sample_psi(gen, 1.0);
  CHECK(std::abs(at1.blocks[0](0, 0) - 2.0 * std::exp(-2.0)) <= 1e-12);
  CHECK(std::abs(at1.blocks[0](1, 0)) <= 1e-12);
}

TEST_CASE("sample_psi: zero data stays zero for any t") {
  const GbdtSequence seq = zero_sequence(3);
  const SolutionGenerator gen = build_generator(seq, 3);
  for (double t : {-2.0, 0.0, 1.5}) {
    const PsiSample sample = sample_psi(gen, t);
    for (const ComplexMatrix& block : sample.blocks) {
      CHECK(block.norm() == 0.0);
    }
  }
}

TEST_CASE("nonstationary residual: zero data vanishes") {
  const GbdtSequence seq = zero_sequence(4);
  const SolutionGenerator gen = build_generator(seq, 4);
  for (double t : default_t_grid(gen.alpha)) {
    for (double r : nonstationary_residual(gen, t, 4)) {
      CHECK(r == 0.0);
    }
  }
}

TEST_CASE("nonstationary residual: scalar fixture across a t-grid") {
  const GbdtSequence seq = scalar_sequence(3);
  const SolutionGenerator gen = build_generator(seq, 3);
  for (double t : {0.0, 0.5, 1.0}) {
    for (double r : nonstationary_residual(gen, t, 3)) {
      CHECK(r <= 1e-10);
    }
  }
}

TEST_CASE("nonstationary residual: random strict triple, K = 15") {
  const auto draw = testing::make_strict_triple(101, 3, 4, 2);
  const DiracPotential p = DiracPotential::random(draw.signature, 15, draw.potential_seed);
  const GbdtSequence seq = gbdt_iterate(draw.triple, p, 15);
  const SolutionGenerator gen = build_generator(seq, 15);
  for (double t : default_t_grid(gen.alpha)) {
    for (double r : nonstationary_residual(gen, t, 15)) {
      CHECK(r <= 1e-8);
    }
  }
}

TEST_CASE("residuals are constant in t and match the stationary form at t = 0") {
  const auto draw = testing::make_strict_triple(103, 2, 3, 1);
  const DiracPotential p = DiracPotential::random(draw.signature, 10, draw.potential_seed);
  const GbdtSequence seq = gbdt_iterate(draw.triple, p, 10);
  const SolutionGenerator gen = build_generator(seq, 10);
  const std::vector<double> grid = default_t_grid(gen.alpha);

  std::vector<double> max_r(10, 0.0), min_r(10, 1e300);
  for (double t : grid) {
    const auto rs = nonstationary_residual(gen, t, 10);
    for (int k = 0; k < 10; ++k) {
      max_r[static_cast<std::size_t>(k)] =
          std::max(max_r[static_cast<std::size_t>(k)], rs[static_cast<std::size_t>(k)]);
      min_r[static_cast<std::size_t>(k)] =
          std::min(min_r[static_cast<std::size_t>(k)], rs[static_cast<std::size_t>(k)]);
    }
  }
  for (int k = 0; k < 10; ++k) {
    if (max_r[static_cast<std::size_t>(k)] > 1e-11) {
      CHECK(max_r[static_cast<std::size_t>(k)] /
                std::max(min_r[static_cast<std::size_t>(k)], 1e-300) <=
            10.0);
    }
  }

  const auto sampled = nonstationary_block_residuals(gen, 0.0, 10);
  const auto stationary = stationary_block_residuals(gen, 10);
  REQUIRE(sampled.size() == stationary.size());
  for (std::size_t k = 0; k < sampled.size(); ++k) {
    CHECK(std::abs(sampled[k].residual - stationary[k].residual) <= 1e-10);
  }
}

TEST_CASE("finite differences: fixture accuracy and second-order convergence") {
  const GbdtSequence seq = scalar_sequence(3);
  const SolutionGenerator gen = build_generator(seq, 3);

  const auto d_small = finite_difference_check(gen, 0.3, 1e-4, gen.blocks());
  for (double d : d_small) {
    CHECK(d <= 1e-6);
  }

  // truncation-dominated step: halving h divides the error by about 4
  const auto d1 = finite_difference_check(gen, 0.3, 1e-2, gen.blocks());
  const auto d2 = finite_difference_check(gen, 0.3, 5e-3, gen.blocks());
  const double worst1 = *std::max_element(d1.begin(), d1.end());
  const double worst2 = *std::max_element(d2.begin(), d2.end());
  CHECK(worst1 / worst2 == doctest::Approx(4.0).epsilon(0.25));

  const GbdtSequence zseq = zero_sequence(3);
  const SolutionGenerator zgen = build_generator(zseq, 3);
  for (double d : finite_difference_check(zgen, 0.1, 1e-3, zgen.blocks())) {
    CHECK(d == 0.0);
  }
}

TEST_CASE("default_t_grid keeps the exponent well conditioned") {
  const ComplexMatrix alpha = 5.0 * ComplexMatrix::Identity(2, 2);
  const std::vector<double> grid = default_t_grid(alpha);
  REQUIRE(grid.size() == 5);
  CHECK(grid[2] == 0.0);
  for (double t : grid) {
    CHECK(std::abs(t) * alpha.norm() <= 1.0 + 1e-12);
  }
}

TEST_CASE("argument validation") {
  const GbdtSequence seq = scalar_sequence(2);
  const SolutionGenerator gen = build_generator(seq, 2);
  CHECK_THROWS_AS(build_generator(seq, 3), DimensionMismatch);
  CHECK_THROWS_AS(nonstationary_residual(gen, 0.0, 3), DimensionMismatch);
  CHECK_THROWS_AS(finite_difference_check(gen, 0.0, -1.0, 2), Error);
  CHECK_THROWS_AS(sample_psi(gen, std::numeric_limits<double>::infinity()), Error);
}

}  // TEST_SUITE
