#pragma once

#include <span>
#include <vector>

#include "tucktree/tucker.hpp"

namespace tucktree {

/// Fixed-size block preprocessing: block k covers [k*b, (k+1)*b), the last
/// block possibly short. Queries stitch covering blocks, trimming boundary
/// blocks regardless of the covered fraction.
struct BlockIndex {
  Index block_size = 0;
  Index timespan = 0;
  std::vector<Index> nontemporal;
  std::vector<Index> ranks;  // requested target sizes, one per mode
  AlsConfig als;
  std::vector<TuckerFactors> blocks;
};

/// max(1, floor(T / (2 ceil(log2 T)))).
Index default_block_size(Index timespan);

BlockIndex build_blocks(const DenseTensor& x, Index block_size,
                        std::span<const Index> ranks, const AlsConfig& cfg);

TuckerFactors block_range_query(const BlockIndex& index, Index ts, Index te,
                                AlsTrace* trace = nullptr);

/// From-scratch ALS on the explicit sub-tensor; the reference decomposition
/// for relative_error.
TuckerFactors brute_force_range(const DenseTensor& x, Index ts, Index te,
                                std::span<const Index> ranks, const AlsConfig& cfg);

/// Synthetic tensor x = w + e: w is the reconstruction of seeded random
/// orthonormal factors with a unit-normal core at the true ranks, e is
/// unit-normal noise orthogonalized against w and scaled so that
/// ||e||_F / ||x||_F equals noise.
struct SynthSpec {
  std::vector<Index> shape;       // (T, D_2, ..., D_p)
  std::vector<Index> true_ranks;  // one per mode, each <= extent
  double noise = 0.0;             // in [0, 1)
  std::uint64_t seed = kDefaultSeed;
};

DenseTensor generate_synthetic(const SynthSpec& spec);

}  // namespace tucktree
