#include "tucktree/stitch.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "tucktree/linalg.hpp"

namespace tucktree {

namespace {

void check_parts(std::span<const TuckerFactors> parts) {
  if (parts.empty()) throw std::invalid_argument("stitch: at least one part required");
  const Index p = parts[0].order();
  if (p < 1) throw std::invalid_argument("stitch: parts must have at least one mode");
  for (const TuckerFactors& part : parts) {
    if (part.order() != p) throw std::invalid_argument("stitch: part order mismatch");
    for (Index m = 1; m < p; ++m) {
      if (part.dim(m) != parts[0].dim(m)) {
        throw std::invalid_argument("stitch: non-temporal shape mismatch across parts");
      }
    }
  }
}

Index total_temporal(std::span<const TuckerFactors> parts) {
  Index total = 0;
  for (const TuckerFactors& part : parts) total += part.dim(0);
  return total;
}

}  // namespace

TuckerFactors partial_hit_factors(const TuckerFactors& stored, Index begin, Index end) {
  const Index len = stored.dim(0);
  if (begin < 0 || begin >= end || end > len) {
    throw std::invalid_argument("partial_hit_factors: invalid sub-range");
  }
  const QrResult qr = thin_qr(stored.factors[0].middleRows(begin, end - begin));
  TuckerFactors out;
  out.core = mode_product(stored.core, qr.r, 0);
  out.factors = stored.factors;
  out.factors[0] = qr.q;
  return out;
}

Eigen::MatrixXd stitch_temporal_unfolding(std::span<const TuckerFactors> parts,
                                          std::span<const Eigen::MatrixXd> factors) {
  check_parts(parts);
  const Index p = parts[0].order();
  if (static_cast<Index>(factors.size()) != p) {
    throw std::invalid_argument("stitch_temporal_unfolding: one factor per mode required");
  }
  Index cols = 1;
  for (Index m = 1; m < p; ++m) cols *= factors[static_cast<std::size_t>(m)].cols();
  Eigen::MatrixXd z(total_temporal(parts), cols);
  Index row = 0;
  for (const TuckerFactors& part : parts) {
    DenseTensor acc = part.core;
    for (Index m = p - 1; m >= 1; --m) {
      acc = mode_product(acc,
                         factors[static_cast<std::size_t>(m)].transpose() *
                             part.factors[static_cast<std::size_t>(m)],
                         m);
    }
    // row block = V^(1) * M_0(acc); the part-length tensor never exists
    z.middleRows(row, part.dim(0)).noalias() = part.factors[0] * matricize(acc, 0);
    row += part.dim(0);
  }
  return z;
}

Eigen::MatrixXd stitch_nontemporal_unfolding(std::span<const TuckerFactors> parts,
                                             Index mode,
                                             std::span<const Eigen::MatrixXd> factors) {
  check_parts(parts);
  const Index p = parts[0].order();
  if (mode < 1 || mode >= p) {
    throw std::invalid_argument("stitch_nontemporal_unfolding: mode must be non-temporal");
  }
  if (static_cast<Index>(factors.size()) != p) {
    throw std::invalid_argument("stitch_nontemporal_unfolding: one factor per mode required");
  }
  Index cols = 1;
  for (Index m = 0; m < p; ++m) {
    if (m != mode) cols *= factors[static_cast<std::size_t>(m)].cols();
  }
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(parts[0].dim(mode), cols);
  Index offset = 0;
  for (const TuckerFactors& part : parts) {
    DenseTensor acc = part.core;
    for (Index m = 0; m < p; ++m) {
      if (m == mode) continue;
      const Eigen::MatrixXd w =
          m == 0 ? Eigen::MatrixXd(factors[0].middleRows(offset, part.dim(0)).transpose() *
                                   part.factors[0])
                 : Eigen::MatrixXd(factors[static_cast<std::size_t>(m)].transpose() *
                                   part.factors[static_cast<std::size_t>(m)]);
      acc = mode_product(acc, w, m);
    }
    acc = mode_product(acc, part.factors[static_cast<std::size_t>(mode)], mode);
    z += matricize(acc, mode);
    offset += part.dim(0);
  }
  return z;
}

TuckerFactors stitch(std::span<const TuckerFactors> parts,
                     std::span<const Index> requested_ranks, const AlsConfig& cfg,
                     AlsTrace* trace) {
  check_parts(parts);
  const Index p = parts[0].order();
  if (p < 2) throw std::invalid_argument("stitch: parts must have order >= 2");
  if (static_cast<Index>(requested_ranks.size()) != p) {
    throw std::invalid_argument("stitch: one rank per mode required");
  }
  if (cfg.max_iters < 1) throw std::invalid_argument("stitch: max_iters must be >= 1");
  if (cfg.tol <= 0.0) throw std::invalid_argument("stitch: tol must be > 0");

  const Index total_len = total_temporal(parts);
  std::vector<Index> dims(static_cast<std::size_t>(p));
  dims[0] = total_len;
  for (Index m = 1; m < p; ++m) dims[static_cast<std::size_t>(m)] = parts[0].dim(m);
  const std::vector<Index> ranks = clamp_ranks(requested_ranks, Shape(dims));

  if (trace != nullptr) *trace = AlsTrace{};

  // ||implied concatenation||^2; part factors are orthonormal, so each
  // part's norm equals its core norm.
  double norm_sq = 0.0;
  for (const TuckerFactors& part : parts) norm_sq += squared_norm(part.core);

  std::mt19937_64 rng(cfg.seed);
  TuckerFactors f;
  f.factors.resize(static_cast<std::size_t>(p));
  f.factors[0] = Eigen::MatrixXd::Zero(total_len, ranks[0]);
  for (Index m = 1; m < p; ++m) {
    f.factors[static_cast<std::size_t>(m)] =
        random_orthonormal(dims[static_cast<std::size_t>(m)],
                           ranks[static_cast<std::size_t>(m)], rng);
  }
  f.core = DenseTensor(Shape(ranks));

  if (norm_sq == 0.0) {
    f.factors[0] = random_orthonormal(total_len, ranks[0], rng);
    if (trace != nullptr) trace->converged = true;
    return f;
  }
  const double norm = std::sqrt(norm_sq);

  double prev_fit = std::numeric_limits<double>::quiet_NaN();
  for (int sweep = 0; sweep < cfg.max_iters; ++sweep) {
    f.factors[0] = leading_left_singular_vectors(
        stitch_temporal_unfolding(parts, f.factors), ranks[0]);
    Eigen::MatrixXd z;
    for (Index m = 1; m < p; ++m) {
      z = stitch_nontemporal_unfolding(parts, m, f.factors);
      f.factors[static_cast<std::size_t>(m)] =
          leading_left_singular_vectors(z, ranks[static_cast<std::size_t>(m)]);
    }
    // z is the mode-(p-1) unfolding projected by every other factor; folding
    // it and projecting the last mode yields the optimal core.
    std::vector<Index> zdims(static_cast<std::size_t>(p));
    zdims[0] = f.factors[0].cols();
    for (Index m = 1; m + 1 < p; ++m) {
      zdims[static_cast<std::size_t>(m)] = f.factors[static_cast<std::size_t>(m)].cols();
    }
    zdims[static_cast<std::size_t>(p - 1)] = dims[static_cast<std::size_t>(p - 1)];
    f.core = mode_product(from_matricization(z, Shape(zdims), p - 1),
                          f.factors[static_cast<std::size_t>(p - 1)].transpose(), p - 1);

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

}  // namespace tucktree
