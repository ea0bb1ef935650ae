#pragma once

#include <optional>
#include <vector>

#include "tucktree/sst.hpp"
#include "tucktree/stitch.hpp"

namespace tucktree {

enum class HitFlag : std::uint8_t {
  Entire = 0,   // the node's full range lies inside the query
  Partial = 1,  // overlap of at least theta * node length, not contained
};

struct HitEntry {
  NodeId node = kNoNode;
  Index begin = 0;  // intersection of the query with the node's range
  Index end = 0;
  HitFlag flag = HitFlag::Entire;

  Index length() const { return end - begin; }
};

/// Ordered by begin; the intersections disjointly tile the query range.
using HitSet = std::vector<HitEntry>;

/// Top-down search for the smallest hit set of [ts, te): a leaf or
/// intermediate node is accepted as soon as the query covers at least a
/// theta fraction of its range, otherwise the search descends into the
/// overlapping children. theta defaults to the tree's configured threshold.
/// Read-only over the tree snapshot, as are all query operations here.
HitSet recall(const StreamSegmentTree& tree, Index ts, Index te,
              std::optional<double> theta = std::nullopt);

struct QueryResult {
  TuckerFactors factors;
  HitSet hits;
};

/// Tucker decomposition of the temporal sub-range [ts, te): recall, per-hit
/// factors (stored for entire hits, QR-trimmed for partial hits), then
/// stitch. The temporal rank clamps to min(rank, te - ts).
TuckerFactors range_query(const StreamSegmentTree& tree, Index ts, Index te,
                          std::optional<double> theta = std::nullopt);

/// range_query plus the hit set it used.
QueryResult range_query_detailed(const StreamSegmentTree& tree, Index ts, Index te,
                                 std::optional<double> theta = std::nullopt,
                                 AlsTrace* trace = nullptr);

}  // namespace tucktree
