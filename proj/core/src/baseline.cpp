#include "tucktree/baseline.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "tucktree/linalg.hpp"
#include "tucktree/stitch.hpp"

namespace tucktree {

Index default_block_size(Index timespan) {
  if (timespan < 1) throw std::invalid_argument("default_block_size: timespan must be >= 1");
  Index log = 0;
  Index pow = 1;
  while (pow < timespan) {
    pow *= 2;
    ++log;
  }
  if (log == 0) return 1;
  return std::max<Index>(1, timespan / (2 * log));
}

BlockIndex build_blocks(const DenseTensor& x, Index block_size,
                        std::span<const Index> ranks, const AlsConfig& cfg) {
  if (x.order() < 2) throw std::invalid_argument("build_blocks: order must be >= 2");
  const Index t = x.dim(0);
  if (block_size < 1 || block_size > t) {
    throw std::invalid_argument("build_blocks: block size must be in [1, T]");
  }
  BlockIndex index;
  index.block_size = block_size;
  index.timespan = t;
  index.nontemporal.assign(x.shape().dims().begin() + 1, x.shape().dims().end());
  index.ranks.assign(ranks.begin(), ranks.end());
  index.als = cfg;
  index.als.ranks.assign(ranks.begin(), ranks.end());
  for (Index begin = 0; begin < t; begin += block_size) {
    const Index end = std::min(t, begin + block_size);
    index.blocks.push_back(tucker_als(slice_temporal(x, begin, end), index.als));
  }
  return index;
}

TuckerFactors block_range_query(const BlockIndex& index, Index ts, Index te,
                                AlsTrace* trace) {
  if (ts < 0 || ts >= te || te > index.timespan) {
    throw std::invalid_argument("block_range_query: invalid range");
  }
  const Index b = index.block_size;
  std::vector<TuckerFactors> parts;
  for (Index k = ts / b; k * b < te; ++k) {
    const Index block_begin = k * b;
    const Index block_end = std::min(index.timespan, block_begin + b);
    const TuckerFactors& stored = index.blocks[static_cast<std::size_t>(k)];
    const Index lo = std::max(ts, block_begin) - block_begin;
    const Index hi = std::min(te, block_end) - block_begin;
    if (lo == 0 && hi == block_end - block_begin) {
      parts.push_back(stored);
    } else {
      parts.push_back(partial_hit_factors(stored, lo, hi));
    }
  }
  return stitch(parts, index.ranks, index.als, trace);
}

TuckerFactors brute_force_range(const DenseTensor& x, Index ts, Index te,
                                std::span<const Index> ranks, const AlsConfig& cfg) {
  if (ts < 0 || ts >= te || te > x.dim(0)) {
    throw std::invalid_argument("brute_force_range: invalid range");
  }
  AlsConfig als = cfg;
  als.ranks.assign(ranks.begin(), ranks.end());
  return tucker_als(slice_temporal(x, ts, te), als);
}

DenseTensor generate_synthetic(const SynthSpec& spec) {
  const Shape shape((std::vector<Index>(spec.shape)));
  if (shape.order() < 2) throw std::invalid_argument("generate_synthetic: order must be >= 2");
  if (spec.true_ranks.size() != spec.shape.size()) {
    throw std::invalid_argument("generate_synthetic: one true rank per mode required");
  }
  for (Index n = 0; n < shape.order(); ++n) {
    const Index r = spec.true_ranks[static_cast<std::size_t>(n)];
    if (r < 1 || r > shape.dim(n)) {
      throw std::invalid_argument("generate_synthetic: true ranks must be in [1, extent]");
    }
  }
  if (!(spec.noise >= 0.0 && spec.noise < 1.0)) {
    throw std::invalid_argument("generate_synthetic: noise must be in [0, 1)");
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  TuckerFactors truth;
  for (Index n = 0; n < shape.order(); ++n) {
    truth.factors.push_back(random_orthonormal(
        shape.dim(n), spec.true_ranks[static_cast<std::size_t>(n)], rng));
  }
  truth.core = DenseTensor(Shape(std::vector<Index>(spec.true_ranks)));
  for (double& v : truth.core.data()) v = normal(rng);

  DenseTensor w = reconstruct(truth);
  if (spec.noise == 0.0) return w;

  const double w_sq = squared_norm(w);
  if (w_sq == 0.0) throw std::runtime_error("generate_synthetic: degenerate zero signal");

  DenseTensor e(shape);
  for (double& v : e.data()) v = normal(rng);
  // Remove the component along w so the calibration below is exact.
  double dot = 0.0;
  for (Index i = 0; i < e.size(); ++i) dot += e.data()[i] * w.data()[i];
  for (Index i = 0; i < e.size(); ++i) {
    e.data()[i] -= dot / w_sq * w.data()[i];
  }
  const double e_norm = frobenius_norm(e);
  if (e_norm == 0.0) throw std::runtime_error("generate_synthetic: degenerate noise draw");
  // With e orthogonal to w, ||x||^2 = ||w||^2 + c^2 ||e||^2; choose c so that
  // c ||e|| / ||x|| equals the requested noise level.
  const double c = spec.noise * std::sqrt(w_sq) /
                   (e_norm * std::sqrt(1.0 - spec.noise * spec.noise));
  for (Index i = 0; i < e.size(); ++i) {
    w.data()[i] += c * e.data()[i];
  }
  return w;
}

}  // namespace tucktree
