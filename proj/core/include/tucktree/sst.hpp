#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tucktree/stitch.hpp"
#include "tucktree/tucker.hpp"

namespace tucktree {

/// Node ids are assigned in creation order starting at 1; 0 means "none".
/// Ids never change once assigned, in particular not when the root is
/// promoted.
using NodeId = Index;
inline constexpr NodeId kNoNode = 0;

enum class NodeKind : std::uint8_t {
  Leaf = 0,          // range [t, t+1), carries a decomposition
  Intermediate = 1,  // fully observed, two children, carries a decomposition
  Placeholder = 2,   // straddles the write frontier, no decomposition
};

struct Node {
  NodeId id = kNoNode;
  Index begin = 0;  // half-open time range [begin, end)
  Index end = 0;
  NodeKind kind = NodeKind::Placeholder;
  NodeId left = kNoNode;
  NodeId right = kNoNode;
  std::optional<TuckerFactors> decomposition;

  Index length() const { return end - begin; }
};

struct TreeConfig {
  std::vector<Index> nontemporal;  // (D_2, ..., D_p), at least one extent
  std::vector<Index> ranks;        // requested target sizes, one per mode
  double theta = 0.7;              // pruning threshold for range queries
  AlsConfig als;                   // shared ALS settings (ranks field unused)
};

/// Append-only binary tree over the observed timespan [0, T). Leaf and
/// intermediate nodes store preprocessed Tucker decompositions of their
/// ranges; placeholder nodes reserve future ranges along the right spine.
/// Appending splits ranges at the midpoint and promotes a fresh root with a
/// doubled range whenever the old root is full, which keeps the height at
/// ceil(log2 T) + 1.
///
/// Concurrency: append requires exclusive access; between appends the tree
/// is immutable and safe for any number of concurrent readers.
class StreamSegmentTree {
 public:
  explicit StreamSegmentTree(TreeConfig cfg);

  /// Rebuilds a tree from persisted parts. Node ids must be 1..nodes.size()
  /// in order; semantic invariants are checked by validate(), not here.
  static StreamSegmentTree from_parts(TreeConfig cfg, std::vector<Node> nodes,
                                      NodeId root, Index timespan,
                                      Index stitch_count);

  /// Appends one tensor slice of the configured non-temporal shape,
  /// extending the timespan from T to T+1. On shape mismatch the tree is
  /// left unchanged.
  void append(const DenseTensor& slice);

  Index timespan() const { return timespan_; }

  /// Longest root-to-node path, counted in nodes. 0 for an empty tree.
  Index height() const;

  /// Structural invariant check; returns human-readable violations, one per
  /// finding (empty means valid). Covers leaf tiling, adjoint children,
  /// kind/decomposition consistency, placeholder positioning, the root
  /// range, and the height law.
  std::vector<std::string> validate() const;

  /// Cumulative number of stitch operations performed by appends, i.e. one
  /// per intermediate node ever completed.
  Index stitch_count() const { return stitch_count_; }

  /// Number of nodes visited or created by the most recent append.
  Index last_append_node_touches() const { return last_touches_; }

  const TreeConfig& config() const { return cfg_; }
  NodeId root() const { return root_; }
  Index node_count() const { return static_cast<Index>(nodes_.size()); }
  const Node& node(NodeId id) const;
  std::span<const Node> nodes() const { return nodes_; }

 private:
  NodeId create_node(Index begin, Index end);
  Node& node_mut(NodeId id) { return nodes_[static_cast<std::size_t>(id - 1)]; }
  void insert(NodeId id, Index t, const DenseTensor& slice);
  TuckerFactors preprocess_leaf(const DenseTensor& slice) const;

  TreeConfig cfg_;
  std::vector<Node> nodes_;
  NodeId root_ = kNoNode;
  Index timespan_ = 0;
  Index stitch_count_ = 0;
  Index last_touches_ = 0;
};

}  // namespace tucktree
