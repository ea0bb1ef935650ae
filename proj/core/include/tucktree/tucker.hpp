#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

#include "tucktree/tensor.hpp"

namespace tucktree {

inline constexpr std::uint64_t kDefaultSeed = 20240117;

/// Alternating-least-squares settings. Convergence is measured on the change
/// of the fit 1 - ||x - reconstruction||_F / ||x||_F between full sweeps.
struct AlsConfig {
  int max_iters = 20;
  double tol = 0.01;
  std::vector<Index> ranks;  // requested target sizes, one per mode
  std::uint64_t seed = kDefaultSeed;
};

/// Per-sweep diagnostics: objective[k] is the squared residual after sweep k.
struct AlsTrace {
  std::vector<double> objective;
  bool converged = false;
};

/// Core tensor plus one column-orthonormal factor matrix per mode.
/// The implied full tensor core x_1 U^(1) ... x_p U^(p) is never materialized
/// except through reconstruct().
struct TuckerFactors {
  DenseTensor core;                      // shape (r_1, ..., r_p)
  std::vector<Eigen::MatrixXd> factors;  // factors[n] is D_n x r_n

  Index order() const { return static_cast<Index>(factors.size()); }
  Index dim(Index mode) const { return factors[static_cast<std::size_t>(mode)].rows(); }
  Index rank(Index mode) const { return factors[static_cast<std::size_t>(mode)].cols(); }
};

/// Effective ranks: requested ranks clamped per mode to the tensor extent.
std::vector<Index> clamp_ranks(std::span<const Index> requested, const Shape& shape);

/// Tucker decomposition by alternating least squares. Deterministic for a
/// fixed (x, cfg): factor initialization derives from cfg.seed. An all-zero
/// input yields a zero core with deterministic orthonormal factors.
TuckerFactors tucker_als(const DenseTensor& x, const AlsConfig& cfg,
                         AlsTrace* trace = nullptr);

/// One ALS step for a mode: the leading left singular vectors of the mode-n
/// unfolding of x projected by all other factors' transposes. The target
/// rank is the current column count of factors[mode].
Eigen::MatrixXd update_factor(const DenseTensor& x, const TuckerFactors& current,
                              Index mode);

/// x projected onto the factors: x x_1 U^(1)T ... x_p U^(p)T.
DenseTensor core_of(const DenseTensor& x, std::span<const Eigen::MatrixXd> factors);

DenseTensor reconstruct(const TuckerFactors& f);

/// Residual of candidate relative to reference on x:
///   ||x - rec(candidate)||_F / ||x - rec(reference)||_F - 1.
/// Returns 0 when both residuals are zero, +infinity when only the
/// reference residual is zero.
double relative_error(const DenseTensor& x, const TuckerFactors& candidate,
                      const TuckerFactors& reference);

}  // namespace tucktree
