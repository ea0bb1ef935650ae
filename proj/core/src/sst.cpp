#include "tucktree/sst.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace tucktree {

namespace {

Index ceil_log2(Index n) {
  Index log = 0;
  Index pow = 1;
  while (pow < n) {
    pow *= 2;
    ++log;
  }
  return log;
}

std::string node_label(const Node& n) {
  return "node " + std::to_string(n.id) + " [" + std::to_string(n.begin) + "," +
         std::to_string(n.end) + ")";
}

}  // namespace

StreamSegmentTree::StreamSegmentTree(TreeConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.nontemporal.empty()) {
    throw std::invalid_argument("StreamSegmentTree: non-temporal shape required");
  }
  for (Index d : cfg_.nontemporal) {
    if (d < 1) throw std::invalid_argument("StreamSegmentTree: extents must be >= 1");
  }
  if (cfg_.ranks.size() != cfg_.nontemporal.size() + 1) {
    throw std::invalid_argument("StreamSegmentTree: one rank per mode required");
  }
  for (Index r : cfg_.ranks) {
    if (r < 1) throw std::invalid_argument("StreamSegmentTree: ranks must be >= 1");
  }
  if (!(cfg_.theta > 0.0 && cfg_.theta < 1.0)) {
    throw std::invalid_argument("StreamSegmentTree: theta must be in (0, 1)");
  }
}

StreamSegmentTree StreamSegmentTree::from_parts(TreeConfig cfg, std::vector<Node> nodes,
                                                NodeId root, Index timespan,
                                                Index stitch_count) {
  StreamSegmentTree tree(std::move(cfg));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id != static_cast<NodeId>(i + 1)) {
      throw std::invalid_argument("from_parts: node ids must be 1..N in order");
    }
  }
  if (root < 0 || root > static_cast<NodeId>(nodes.size())) {
    throw std::invalid_argument("from_parts: root id out of range");
  }
  tree.nodes_ = std::move(nodes);
  tree.root_ = root;
  tree.timespan_ = timespan;
  tree.stitch_count_ = stitch_count;
  return tree;
}

const Node& StreamSegmentTree::node(NodeId id) const {
  if (id < 1 || id > static_cast<NodeId>(nodes_.size())) {
    throw std::out_of_range("unknown node id " + std::to_string(id));
  }
  return nodes_[static_cast<std::size_t>(id - 1)];
}

NodeId StreamSegmentTree::create_node(Index begin, Index end) {
  Node n;
  n.id = static_cast<NodeId>(nodes_.size() + 1);
  n.begin = begin;
  n.end = end;
  n.kind = NodeKind::Placeholder;
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

TuckerFactors StreamSegmentTree::preprocess_leaf(const DenseTensor& slice) const {
  std::vector<Index> dims;
  dims.reserve(cfg_.nontemporal.size() + 1);
  dims.push_back(1);
  dims.insert(dims.end(), cfg_.nontemporal.begin(), cfg_.nontemporal.end());
  DenseTensor x(Shape(dims), std::vector<double>(slice.data().begin(), slice.data().end()));
  AlsConfig als = cfg_.als;
  als.ranks = cfg_.ranks;  // clamped inside tucker_als (temporal becomes 1)
  return tucker_als(x, als);
}

void StreamSegmentTree::append(const DenseTensor& slice) {
  if (slice.shape().dims() != cfg_.nontemporal) {
    throw std::invalid_argument("append: slice shape does not match tree");
  }
  const Index t = timespan_;
  last_touches_ = 0;
  if (t == 0) {
    root_ = create_node(0, 1);
  } else if (node(root_).end == t) {
    // Old root is full: promote a placeholder root over a doubled range.
    const NodeId promoted = create_node(0, 2 * t);
    node_mut(promoted).left = root_;
    root_ = promoted;
  }
  insert(root_, t, slice);
  ++timespan_;
}

void StreamSegmentTree::insert(NodeId id, Index t, const DenseTensor& slice) {
  ++last_touches_;
  if (node(id).begin == t && node(id).end == t + 1) {
    TuckerFactors leaf = preprocess_leaf(slice);
    Node& v = node_mut(id);
    v.decomposition = std::move(leaf);
    v.kind = NodeKind::Leaf;
    return;
  }
  const Index mid = (node(id).begin + node(id).end) / 2;
  if (t < mid) {
    if (node(id).left == kNoNode) {
      const NodeId child = create_node(node(id).begin, mid);
      node_mut(id).left = child;
    }
    insert(node(id).left, t, slice);
  } else {
    if (node(id).right == kNoNode) {
      const NodeId child = create_node(mid, node(id).end);
      node_mut(id).right = child;
    }
    insert(node(id).right, t, slice);
    if (node(id).end == t + 1) {
      // Fully observed now: stitch the children into this node.
      const TuckerFactors parts[2] = {*node(node(id).left).decomposition,
                                      *node(node(id).right).decomposition};
      TuckerFactors merged = stitch(parts, cfg_.ranks, cfg_.als);
      Node& v = node_mut(id);
      v.decomposition = std::move(merged);
      v.kind = NodeKind::Intermediate;
      ++stitch_count_;
    }
  }
}

Index StreamSegmentTree::height() const {
  if (root_ == kNoNode) return 0;
  std::function<Index(NodeId)> depth = [&](NodeId id) -> Index {
    const Node& v = node(id);
    Index best = 0;
    if (v.left != kNoNode) best = std::max(best, depth(v.left));
    if (v.right != kNoNode) best = std::max(best, depth(v.right));
    return best + 1;
  };
  return depth(root_);
}

std::vector<std::string> StreamSegmentTree::validate() const {
  std::vector<std::string> violations;
  const auto flag = [&violations](std::string msg) { violations.push_back(std::move(msg)); };

  if (timespan_ == 0) {
    if (root_ != kNoNode) flag("empty tree has a root");
    return violations;
  }
  if (root_ == kNoNode) {
    flag("non-empty tree has no root");
    return violations;
  }

  const Index p = static_cast<Index>(cfg_.nontemporal.size()) + 1;
  const auto valid_id = [this](NodeId id) {
    return id >= 1 && id <= static_cast<NodeId>(nodes_.size());
  };

  for (const Node& v : nodes_) {
    if (v.begin < 0 || v.begin >= v.end) flag(node_label(v) + ": malformed range");
    if ((v.left != kNoNode && !valid_id(v.left)) ||
        (v.right != kNoNode && !valid_id(v.right))) {
      flag(node_label(v) + ": child id unknown");
      continue;
    }
    switch (v.kind) {
      case NodeKind::Leaf:
        if (v.length() != 1) flag(node_label(v) + ": leaf range must have length 1");
        if (v.left != kNoNode || v.right != kNoNode) {
          flag(node_label(v) + ": leaf must not have children");
        }
        if (!v.decomposition) flag(node_label(v) + ": leaf is missing its decomposition");
        break;
      case NodeKind::Intermediate: {
        if (v.left == kNoNode || v.right == kNoNode) {
          flag(node_label(v) + ": intermediate must have two children");
          break;
        }
        const Node& l = node(v.left);
        const Node& r = node(v.right);
        if (l.begin != v.begin || l.end != r.begin || r.end != v.end) {
          flag(node_label(v) + ": children ranges are not adjoint");
        }
        if (l.kind == NodeKind::Placeholder || r.kind == NodeKind::Placeholder) {
          flag(node_label(v) + ": intermediate has a placeholder child");
        }
        if (!v.decomposition) {
          flag(node_label(v) + ": intermediate is missing its decomposition");
        }
        break;
      }
      case NodeKind::Placeholder: {
        if (v.decomposition) flag(node_label(v) + ": placeholder carries a decomposition");
        if (!(v.begin < timespan_ && timespan_ <= v.end)) {
          flag(node_label(v) + ": placeholder does not straddle the write frontier");
        }
        if (v.left == kNoNode && v.right != kNoNode) {
          flag(node_label(v) + ": placeholder has a right child without a left child");
        }
        if (v.left == kNoNode && v.right == kNoNode) {
          flag(node_label(v) + ": placeholder has no children");
        }
        if (v.left != kNoNode && v.right != kNoNode) {
          const Node& l = node(v.left);
          const Node& r = node(v.right);
          if (l.begin != v.begin || l.end != r.begin || r.end != v.end) {
            flag(node_label(v) + ": children ranges are not adjoint");
          }
        } else if (v.left != kNoNode) {
          const Node& l = node(v.left);
          if (l.begin != v.begin || l.end != (v.begin + v.end) / 2) {
            flag(node_label(v) + ": left child range does not match the midpoint split");
          }
        }
        break;
      }
      default:
        flag(node_label(v) + ": unknown node kind");
    }
    if (v.kind != NodeKind::Placeholder && v.end > timespan_) {
      flag(node_label(v) + ": materialized node extends past the timespan");
    }
    if (v.decomposition) {
      const TuckerFactors& f = *v.decomposition;
      if (f.order() != p) {
        flag(node_label(v) + ": decomposition order mismatch");
      } else {
        if (f.dim(0) != v.length()) {
          flag(node_label(v) + ": temporal factor rows do not match the range");
        }
        for (Index m = 1; m < p; ++m) {
          if (f.dim(m) != cfg_.nontemporal[static_cast<std::size_t>(m - 1)]) {
            flag(node_label(v) + ": non-temporal factor rows mismatch at mode " +
                 std::to_string(m));
          }
        }
        for (Index m = 0; m < p; ++m) {
          if (f.core.dim(m) != f.rank(m)) {
            flag(node_label(v) + ": core extent does not match factor columns");
          }
        }
      }
    }
  }

  // Leaf tiling of [0, T).
  std::vector<const Node*> leaves;
  for (const Node& v : nodes_) {
    if (v.kind == NodeKind::Leaf) leaves.push_back(&v);
  }
  std::sort(leaves.begin(), leaves.end(),
            [](const Node* a, const Node* b) { return a->begin < b->begin; });
  Index expected = 0;
  for (const Node* leaf : leaves) {
    if (leaf->begin != expected) {
      flag(node_label(*leaf) + ": leaf tiling gap or overlap at " + std::to_string(expected));
      break;
    }
    expected = leaf->end;
  }
  if (expected != timespan_ && violations.empty()) {
    flag("leaves cover [0," + std::to_string(expected) + ") but timespan is " +
         std::to_string(timespan_));
  }

  const Node& r = node(root_);
  const Index span = timespan_ == 1 ? 1 : (Index{1} << ceil_log2(timespan_));
  if (r.begin != 0 || r.end != span) {
    flag(node_label(r) + ": root range should be [0," + std::to_string(span) + ")");
  }
  const Index expected_height = ceil_log2(timespan_) + 1;
  if (height() != expected_height) {
    flag("height " + std::to_string(height()) + " violates the height law " +
         std::to_string(expected_height));
  }
  return violations;
}

}  // namespace tucktree
