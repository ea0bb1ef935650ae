#include "tucktree/query.hpp"

#include <stdexcept>

namespace tucktree {

namespace {

void collect_hits(const StreamSegmentTree& tree, NodeId id, Index ts, Index te,
                  double theta, HitSet& out) {
  const Node& v = tree.node(id);
  const Index overlap = std::min(te, v.end) - std::max(ts, v.begin);
  if (v.kind != NodeKind::Placeholder &&
      static_cast<double>(overlap) >= theta * static_cast<double>(v.length())) {
    const bool contained = v.begin >= ts && v.end <= te;
    out.push_back(HitEntry{id, std::max(ts, v.begin), std::min(te, v.end),
                           contained ? HitFlag::Entire : HitFlag::Partial});
    return;
  }
  if (v.left != kNoNode && te <= tree.node(v.left).end) {
    collect_hits(tree, v.left, ts, te, theta, out);
  } else if (v.right != kNoNode && ts >= tree.node(v.right).begin) {
    collect_hits(tree, v.right, ts, te, theta, out);
  } else {
    if (v.left == kNoNode || v.right == kNoNode) {
      throw std::logic_error("recall: query spans an unmaterialized range");
    }
    collect_hits(tree, v.left, ts, te, theta, out);
    collect_hits(tree, v.right, ts, te, theta, out);
  }
}

}  // namespace

HitSet recall(const StreamSegmentTree& tree, Index ts, Index te,
              std::optional<double> theta_opt) {
  if (ts < 0 || ts >= te || te > tree.timespan()) {
    throw std::invalid_argument("recall: query range must satisfy 0 <= ts < te <= T");
  }
  const double theta = theta_opt.value_or(tree.config().theta);
  if (!(theta > 0.0 && theta < 1.0)) {
    throw std::invalid_argument("recall: theta must be in (0, 1)");
  }
  HitSet out;
  collect_hits(tree, tree.root(), ts, te, theta, out);
  return out;
}

QueryResult range_query_detailed(const StreamSegmentTree& tree, Index ts, Index te,
                                 std::optional<double> theta, AlsTrace* trace) {
  QueryResult result;
  result.hits = recall(tree, ts, te, theta);
  std::vector<TuckerFactors> parts;
  parts.reserve(result.hits.size());
  for (const HitEntry& hit : result.hits) {
    const Node& v = tree.node(hit.node);
    if (!v.decomposition) {
      throw std::logic_error("range_query: hit node has no decomposition");
    }
    if (hit.flag == HitFlag::Entire) {
      parts.push_back(*v.decomposition);
    } else {
      parts.push_back(
          partial_hit_factors(*v.decomposition, hit.begin - v.begin, hit.end - v.begin));
    }
  }
  result.factors = stitch(parts, tree.config().ranks, tree.config().als, trace);
  return result;
}

TuckerFactors range_query(const StreamSegmentTree& tree, Index ts, Index te,
                          std::optional<double> theta) {
  return range_query_detailed(tree, ts, te, theta).factors;
}

}  // namespace tucktree
