#include "tucktree/tucker.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "tucktree/linalg.hpp"

namespace tucktree {

namespace {

void check_factor_shapes(const DenseTensor& x, const TuckerFactors& f) {
  if (f.order() != x.order()) {
    throw std::invalid_argument("factor count does not match tensor order");
  }
  for (Index n = 0; n < x.order(); ++n) {
    if (f.factors[static_cast<std::size_t>(n)].rows() != x.dim(n)) {
      throw std::invalid_argument("factor rows do not match tensor extent at mode " +
                                  std::to_string(n));
    }
  }
}

std::vector<Eigen::MatrixXd> init_factors(const Shape& shape,
                                          std::span<const Index> ranks,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Eigen::MatrixXd> factors;
  factors.reserve(static_cast<std::size_t>(shape.order()));
  for (Index n = 0; n < shape.order(); ++n) {
    factors.push_back(
        random_orthonormal(shape.dim(n), ranks[static_cast<std::size_t>(n)], rng));
  }
  return factors;
}

}  // namespace

std::vector<Index> clamp_ranks(std::span<const Index> requested, const Shape& shape) {
  if (static_cast<Index>(requested.size()) != shape.order()) {
    throw std::invalid_argument("clamp_ranks: one rank per mode required");
  }
  std::vector<Index> ranks(requested.begin(), requested.end());
  for (Index n = 0; n < shape.order(); ++n) {
    auto& r = ranks[static_cast<std::size_t>(n)];
    if (r < 1) throw std::invalid_argument("clamp_ranks: ranks must be >= 1");
    r = std::min(r, shape.dim(n));
  }
  return ranks;
}

Eigen::MatrixXd update_factor(const DenseTensor& x, const TuckerFactors& current,
                              Index mode) {
  check_factor_shapes(x, current);
  DenseTensor projected = x;
  for (Index m = 0; m < x.order(); ++m) {
    if (m == mode) continue;
    projected = mode_product(
        projected, current.factors[static_cast<std::size_t>(m)].transpose(), m);
  }
  return leading_left_singular_vectors(matricize(projected, mode),
                                       current.rank(mode));
}

DenseTensor core_of(const DenseTensor& x, std::span<const Eigen::MatrixXd> factors) {
  if (static_cast<Index>(factors.size()) != x.order()) {
    throw std::invalid_argument("core_of: one factor per mode required");
  }
  DenseTensor acc = x;
  for (Index n = 0; n < x.order(); ++n) {
    acc = mode_product(acc, factors[static_cast<std::size_t>(n)].transpose(), n);
  }
  return acc;
}

DenseTensor reconstruct(const TuckerFactors& f) {
  DenseTensor acc = f.core;
  for (Index n = 0; n < f.order(); ++n) {
    acc = mode_product(acc, f.factors[static_cast<std::size_t>(n)], n);
  }
  return acc;
}

TuckerFactors tucker_als(const DenseTensor& x, const AlsConfig& cfg, AlsTrace* trace) {
  if (cfg.max_iters < 1) throw std::invalid_argument("tucker_als: max_iters must be >= 1");
  if (cfg.tol <= 0.0) throw std::invalid_argument("tucker_als: tol must be > 0");
  const std::vector<Index> ranks = clamp_ranks(cfg.ranks, x.shape());

  TuckerFactors f;
  f.factors = init_factors(x.shape(), ranks, cfg.seed);
  f.core = DenseTensor(Shape(ranks));
  if (trace != nullptr) *trace = AlsTrace{};

  const double norm_sq = squared_norm(x);
  if (norm_sq == 0.0) {
    if (trace != nullptr) trace->converged = true;
    return f;
  }
  const double norm = std::sqrt(norm_sq);

  double prev_fit = std::numeric_limits<double>::quiet_NaN();
  for (int sweep = 0; sweep < cfg.max_iters; ++sweep) {
    for (Index n = 0; n < x.order(); ++n) {
      f.factors[static_cast<std::size_t>(n)] = update_factor(x, f, n);
    }
    f.core = core_of(x, f.factors);
    const double residual_sq = std::max(0.0, norm_sq - squared_norm(f.core));
    if (trace != nullptr) trace->objective.push_back(residual_sq);
    const double fit = 1.0 - std::sqrt(residual_sq) / norm;
    if (sweep > 0 && std::abs(fit - prev_fit) < cfg.tol) {
      if (trace != nullptr) trace->converged = true;
      break;
    }
    prev_fit = fit;
  }
  return f;
}

double relative_error(const DenseTensor& x, const TuckerFactors& candidate,
                      const TuckerFactors& reference) {
  const auto residual = [&x](const TuckerFactors& f) {
    const DenseTensor rec = reconstruct(f);
    if (rec.shape() != x.shape()) {
      throw std::invalid_argument("relative_error: reconstruction shape mismatch");
    }
    double sq = 0.0;
    const std::span<const double> a = x.data();
    const std::span<const double> b = rec.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      sq += d * d;
    }
    return std::sqrt(sq);
  };
  const double cand = residual(candidate);
  const double ref = residual(reference);
  if (ref == 0.0) {
    return cand == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return cand / ref - 1.0;
}

}  // namespace tucktree
