#pragma once

#include <span>
#include <vector>

#include "tucktree/tucker.hpp"

namespace tucktree {

/// Exact re-factoring of a temporal sub-range [begin, end) of a stored
/// decomposition: the kept rows of the temporal factor are QR-factored into
/// Q R, Q becomes the new temporal factor and the core absorbs R via a
/// mode-1 product. Non-temporal factors are unchanged. The implied tensor of
/// the result equals the temporal slice of the input's implied tensor.
TuckerFactors partial_hit_factors(const TuckerFactors& stored, Index begin, Index end);

/// Mode-0 unfolding of the implied concatenation of the parts, projected by
/// the transposes of factors[1..p-1]. Row block i comes from part i alone;
/// the concatenated tensor is never formed. factors[0] is ignored.
Eigen::MatrixXd stitch_temporal_unfolding(std::span<const TuckerFactors> parts,
                                          std::span<const Eigen::MatrixXd> factors);

/// Mode-n (n >= 1) unfolding of the implied concatenation, projected by the
/// transposes of all other factors; factors[0] contributes per-part row
/// blocks at the parts' temporal offsets. Assembled as a sum of per-part
/// small products.
Eigen::MatrixXd stitch_nontemporal_unfolding(std::span<const TuckerFactors> parts,
                                             Index mode,
                                             std::span<const Eigen::MatrixXd> factors);

/// ALS on the implied concatenation of the parts, assembling every unfolding
/// from the parts' cores and factors. The temporal rank is clamped to the
/// total temporal extent, non-temporal ranks to their mode extents.
TuckerFactors stitch(std::span<const TuckerFactors> parts,
                     std::span<const Index> requested_ranks, const AlsConfig& cfg,
                     AlsTrace* trace = nullptr);

}  // namespace tucktree
