#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support/oracles.hpp"
#include "tucktree/baseline.hpp"
#include "tucktree/linalg.hpp"

using namespace tucktree;
namespace oracle = tucktree::testing;

namespace {

double rel_residual(const DenseTensor& x, const TuckerFactors& f) {
  const DenseTensor rec = reconstruct(f);
  double sq = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double d = x.data()[i] - rec.data()[i];
    sq += d * d;
  }
  return std::sqrt(sq) / frobenius_norm(x);
}

}  // namespace

TEST_CASE("default_block_size") {
  CHECK(default_block_size(1) == 1);
  CHECK(default_block_size(2) == 1);
  CHECK(default_block_size(256) == 16);
  CHECK(default_block_size(2033) == 92);
  CHECK_THROWS_AS(default_block_size(0), std::invalid_argument);
}

TEST_CASE("build_blocks tiles the timespan") {
  std::mt19937_64 rng(300);
  const DenseTensor x = oracle::random_tensor(Shape{10, 4, 3}, rng);
  AlsConfig cfg;
  cfg.seed = 17;

  const BlockIndex index = build_blocks(x, 4, std::vector<Index>{2, 2, 2}, cfg);
  REQUIRE(index.blocks.size() == 3);  // 4 + 4 + 2
  CHECK(index.blocks[0].dim(0) == 4);
  CHECK(index.blocks[2].dim(0) == 2);
  Index covered = 0;
  for (const TuckerFactors& b : index.blocks) covered += b.dim(0);
  CHECK(covered == 10);

  CHECK_THROWS_AS(build_blocks(x, 0, std::vector<Index>{2, 2, 2}, cfg),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_blocks(x, 11, std::vector<Index>{2, 2, 2}, cfg),
                  std::invalid_argument);
}

TEST_CASE("one block of size T behaves like plain ALS") {
  std::mt19937_64 rng(301);
  const DenseTensor x = reconstruct(oracle::random_tucker(
      std::vector<Index>{8, 5, 4}, std::vector<Index>{2, 2, 2}, rng));
  AlsConfig cfg;
  cfg.seed = 23;
  const std::vector<Index> ranks = {2, 2, 2};

  const BlockIndex index = build_blocks(x, 8, ranks, cfg);
  REQUIRE(index.blocks.size() == 1);
  const TuckerFactors direct = brute_force_range(x, 0, 8, ranks, cfg);
  CHECK(std::abs(rel_residual(x, index.blocks[0]) - rel_residual(x, direct)) <= 1e-8);

  const TuckerFactors via_query = block_range_query(index, 0, 8);
  CHECK(std::abs(rel_residual(x, via_query) - rel_residual(x, direct)) <= 1e-8);
}

TEST_CASE("block size one yields per-slice decompositions") {
  std::mt19937_64 rng(302);
  const DenseTensor x = oracle::random_tensor(Shape{5, 4, 3}, rng);
  AlsConfig cfg;
  const BlockIndex index = build_blocks(x, 1, std::vector<Index>{2, 2, 2}, cfg);
  REQUIRE(index.blocks.size() == 5);
  for (const TuckerFactors& b : index.blocks) CHECK(b.dim(0) == 1);
}

TEST_CASE("block_range_query trims boundary blocks") {
  std::mt19937_64 rng(303);
  const DenseTensor x = reconstruct(oracle::random_tucker(
      std::vector<Index>{12, 5, 4}, std::vector<Index>{2, 2, 2}, rng));
  AlsConfig cfg;
  cfg.seed = 29;
  const std::vector<Index> ranks = {2, 2, 2};
  const BlockIndex index = build_blocks(x, 4, ranks, cfg);

  SUBCASE("aligned single block") {
    const TuckerFactors f = block_range_query(index, 4, 8);
    CHECK(f.dim(0) == 4);
    CHECK(rel_residual(slice_temporal(x, 4, 8), f) <= 1e-6);
  }

  SUBCASE("spanning several blocks") {
    const TuckerFactors f = block_range_query(index, 2, 11);
    CHECK(f.dim(0) == 9);
    // exact data, so the stitched result stays exact
    CHECK(rel_residual(slice_temporal(x, 2, 11), f) <= 1e-6);
  }

  SUBCASE("sub-block range") {
    const TuckerFactors f = block_range_query(index, 5, 7);
    CHECK(f.dim(0) == 2);
    const TuckerFactors brute = brute_force_range(x, 5, 7, ranks, cfg);
    CHECK(rel_residual(slice_temporal(x, 5, 7), f) <=
          rel_residual(slice_temporal(x, 5, 7), brute) + 1e-6);
  }

  SUBCASE("invalid ranges") {
    CHECK_THROWS_AS(block_range_query(index, 3, 3), std::invalid_argument);
    CHECK_THROWS_AS(block_range_query(index, 0, 13), std::invalid_argument);
  }
}

TEST_CASE("brute_force_range") {
  std::mt19937_64 rng(304);
  const DenseTensor x = reconstruct(oracle::random_tucker(
      std::vector<Index>{9, 5, 4}, std::vector<Index>{2, 2, 2}, rng));
  AlsConfig cfg;
  cfg.seed = 31;
  const std::vector<Index> ranks = {2, 2, 2};

  SUBCASE("full range equals tucker_als") {
    AlsConfig als = cfg;
    als.ranks = ranks;
    const TuckerFactors direct = tucker_als(x, als);
    const TuckerFactors ranged = brute_force_range(x, 0, 9, ranks, cfg);
    for (std::size_t n = 0; n < direct.factors.size(); ++n) {
      CHECK(direct.factors[n] == ranged.factors[n]);
    }
  }

  SUBCASE("single slice with full clamped ranks is exact") {
    const TuckerFactors f =
        brute_force_range(x, 4, 5, std::vector<Index>{9, 5, 4}, cfg);
    CHECK(rel_residual(slice_temporal(x, 4, 5), f) <= 1e-10);
  }

  SUBCASE("any range of exact low-rank data is recovered") {
    const TuckerFactors f = brute_force_range(x, 2, 7, ranks, cfg);
    CHECK(rel_residual(slice_temporal(x, 2, 7), f) <= 1e-6);
  }

  SUBCASE("invalid range") {
    CHECK_THROWS_AS(brute_force_range(x, 5, 2, ranks, cfg), std::invalid_argument);
  }
}

TEST_CASE("generate_synthetic calibrates the noise level") {
  SynthSpec spec;
  spec.shape = {24, 8, 6};
  spec.true_ranks = {3, 3, 3};
  spec.seed = 71;

  SUBCASE("noiseless tensors are exactly low-rank") {
    spec.noise = 0.0;
    const DenseTensor x = generate_synthetic(spec);
    AlsConfig cfg;
    cfg.ranks = {3, 3, 3};
    cfg.seed = 7;
    CHECK(rel_residual(x, tucker_als(x, cfg)) <= 1e-6);
  }

  SUBCASE("noise level matches the request within 1 percent") {
    for (double eps : {0.01, 0.1, 0.3}) {
      spec.noise = eps;
      const DenseTensor x = generate_synthetic(spec);
      SynthSpec clean = spec;
      clean.noise = 0.0;
      const DenseTensor w = generate_synthetic(clean);
      double diff_sq = 0.0;
      for (Index i = 0; i < x.size(); ++i) {
        const double d = x.data()[i] - w.data()[i];
        diff_sq += d * d;
      }
      const double measured = std::sqrt(diff_sq) / frobenius_norm(x);
      CHECK(std::abs(measured - eps) <= 0.01 * eps);
    }
  }

  SUBCASE("from-scratch ALS residual sits at the noise floor") {
    spec.noise = 0.1;
    const DenseTensor x = generate_synthetic(spec);
    AlsConfig cfg;
    cfg.ranks = {3, 3, 3};
    cfg.seed = 7;
    const double resid = rel_residual(x, tucker_als(x, cfg));
    CHECK(resid == doctest::Approx(0.1).epsilon(0.2));
    CHECK(std::abs(resid - 0.1) <= 0.02);
  }

  SUBCASE("same seed gives bit-identical tensors") {
    spec.noise = 0.05;
    const DenseTensor a = generate_synthetic(spec);
    const DenseTensor b = generate_synthetic(spec);
    REQUIRE(a.size() == b.size());
    for (Index i = 0; i < a.size(); ++i) CHECK(a.data()[i] == b.data()[i]);
  }

  SUBCASE("input validation") {
    SynthSpec bad = spec;
    bad.true_ranks = {30, 3, 3};
    CHECK_THROWS_AS(generate_synthetic(bad), std::invalid_argument);
    bad = spec;
    bad.noise = 1.0;
    CHECK_THROWS_AS(generate_synthetic(bad), std::invalid_argument);
  }
}
