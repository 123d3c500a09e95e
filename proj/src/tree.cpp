#include "nestedeg/tree.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nestedeg/errors.hpp"

namespace nestedeg {

Bin Bin::unit(std::size_t dim) {
  return Bin(std::vector<Interval>(dim, Interval{0.0, 1.0, true}));
}

Bin::Bin(std::vector<Interval> axes) : axes_(std::move(axes)) {
  for (const auto& a : axes_) {
    if (!(a.lo < a.hi)) throw InputError("bin interval must satisfy lo < hi");
    if (a.hi_closed != (a.hi == 1.0)) throw InputError("bin interval is closed iff hi == 1");
  }
}

bool Bin::contains(std::span<const double> x) const {
  if (x.size() != axes_.size()) return false;
  for (std::size_t j = 0; j < axes_.size(); ++j) {
    if (!axes_[j].contains(x[j])) return false;
  }
  return true;
}

double Bin::squared_diameter() const {
  double s = 0.0;
  for (const auto& a : axes_) s += a.length() * a.length();
  return s;
}

double Bin::diameter() const { return std::sqrt(squared_diameter()); }

std::pair<Bin, Bin> Bin::split(std::size_t axis) const {
  const Interval& parent = axes_.at(axis);
  const double tau = 0.5 * (parent.lo + parent.hi);
  auto left = axes_;
  auto right = axes_;
  left[axis] = Interval{parent.lo, tau, false};
  right[axis] = Interval{tau, parent.hi, parent.hi_closed};
  return {Bin(std::move(left)), Bin(std::move(right))};
}

RangeTracker::RangeTracker(std::size_t dim) : lower_(dim, 0.0), upper_(dim, 0.0) {}

void RangeTracker::observe(std::span<const double> x) {
  if (empty_) {
    lower_.assign(x.begin(), x.end());
    upper_.assign(x.begin(), x.end());
    empty_ = false;
    return;
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    lower_[j] = std::min(lower_[j], x[j]);
    upper_[j] = std::max(upper_[j], x[j]);
  }
}

double RangeTracker::squared_diameter() const {
  if (empty_) return 0.0;
  double s = 0.0;
  for (std::size_t j = 0; j < lower_.size(); ++j) {
    const double w = upper_[j] - lower_[j];
    s += w * w;
  }
  return s;
}

RangeTracker RangeTracker::from_bounds(std::vector<double> lower, std::vector<double> upper) {
  RangeTracker r;
  if (lower.size() != upper.size()) throw InputError("range tracker bounds differ in size");
  r.lower_ = std::move(lower);
  r.upper_ = std::move(upper);
  r.empty_ = r.lower_.empty();
  return r;
}

NestedEgTree::NestedEgTree(std::size_t dim, LossSpec loss_spec, bool effective_range)
    : dim_(dim), loss_(loss_spec), effective_range_(effective_range) {
  if (dim_ == 0) throw InputError("tree dimension must be >= 1");
  loss_.validate();
  lipschitz_ = lipschitz_constant(loss_);
  TreeNode root;
  root.bin = Bin::unit(dim_);
  root.eg.lipschitz = lipschitz_;
  nodes_.push_back(std::move(root));
}

NestedEgTree NestedEgTree::from_nodes(std::size_t dim, LossSpec loss_spec, bool effective_range,
                                      std::vector<TreeNode> nodes, std::uint64_t steps) {
  NestedEgTree tree(dim, loss_spec, effective_range);
  if (nodes.empty() || !(nodes[0].id == NodeId{})) throw InputError("node list must start with the root (0,1)");
  if (!(nodes[0].bin == Bin::unit(dim))) throw InputError("root bin must be [0,1]^d");
  std::uint32_t height = 0;
  std::vector<bool> has_parent(nodes.size(), false);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& n = nodes[k];
    if (n.bin.dim() != dim) throw InputError("node bin dimension mismatch");
    if (n.eg.lipschitz != tree.lipschitz_ || n.eg.steps != n.count) {
      throw InputError("node EG state inconsistent with the loss or the node count");
    }
    const bool has_left = n.left != TreeNode::kNone;
    const bool has_right = n.right != TreeNode::kNone;
    if (has_left != has_right) throw InputError("inner node must have two children");
    if (has_left) {
      const auto l = static_cast<std::size_t>(n.left);
      const auto r = static_cast<std::size_t>(n.right);
      if (l >= nodes.size() || r >= nodes.size() || l <= k || r <= k) {
        throw InputError("child index out of range");
      }
      if (!(nodes[l].id == n.id.left_child()) || !(nodes[r].id == n.id.right_child())) {
        throw InputError("child (h,i) labels inconsistent with parent");
      }
      if (has_parent[l] || has_parent[r]) throw InputError("node listed as the child of two parents");
      has_parent[l] = has_parent[r] = true;
      if (n.split_axis != n.id.depth % dim) throw InputError("split axis must be h mod d");
      const auto [lb, rb] = n.bin.split(n.split_axis);
      if (!(nodes[l].bin == lb) || !(nodes[r].bin == rb) || n.threshold != lb.axis(n.split_axis).hi) {
        throw InputError("child bins do not halve the parent bin");
      }
    } else {
      height = std::max(height, n.id.depth);
    }
  }
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    if (!has_parent[k]) throw InputError("node (" + std::to_string(nodes[k].id.depth) + "," +
                                         std::to_string(nodes[k].id.index) + ") is unreachable");
  }
  tree.nodes_ = std::move(nodes);
  tree.height_ = height;
  tree.steps_ = steps;
  return tree;
}

void NestedEgTree::check_point(std::span<const double> x) const {
  if (x.size() != dim_) {
    throw InputError("covariate has dimension " + std::to_string(x.size()) + ", tree expects " +
                     std::to_string(dim_));
  }
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("covariate outside [0,1]^d: " + std::to_string(v));
  }
}

LeafRef NestedEgTree::route(std::span<const double> x) const {
  check_point(x);
  std::size_t k = 0;
  while (!nodes_[k].is_leaf()) {
    const auto& n = nodes_[k];
    k = static_cast<std::size_t>(x[n.split_axis] >= n.threshold ? n.right : n.left);
  }
  return LeafRef{k, nodes_[k].id};
}

TreePrediction NestedEgTree::predict(std::span<const double> x) {
  const LeafRef leaf = route(x);
  pending_ = leaf;
  pending_x_.assign(x.begin(), x.end());
  return TreePrediction{eg_predict(nodes_[leaf.node].eg), leaf};
}

void NestedEgTree::update(const LeafRef& leaf, double pred, double outcome) {
  if (leaf.node >= nodes_.size() || !(nodes_[leaf.node].id == leaf.id)) {
    throw ContractError("leaf reference does not name a node of this tree");
  }
  if (!nodes_[leaf.node].is_leaf()) {
    throw ContractError("stale leaf reference: node has already been split");
  }
  if (!pending_ || !(*pending_ == leaf)) {
    throw ContractError("update must follow the predict that produced this leaf");
  }
  TreeNode& node = nodes_[leaf.node];
  node.eg = eg_update(node.eg, pred, outcome, loss_);
  node.count += 1;
  if (effective_range_) node.range.observe(pending_x_);
  ++steps_;
  pending_.reset();
  if (split_condition(node)) split(leaf.node);
}

bool NestedEgTree::split_condition(const TreeNode& node) const {
  const double measure2 = effective_range_ ? node.range.squared_diameter() : node.bin.squared_diameter();
  // measure 0 means diam^-2 = +inf: never split.
  if (measure2 <= 0.0) return false;
  return static_cast<double>(node.count + 1) * measure2 >= 1.0;
}

void NestedEgTree::split(std::size_t node_index) {
  const std::size_t axis = nodes_[node_index].id.depth % dim_;
  auto [left_bin, right_bin] = nodes_[node_index].bin.split(axis);

  TreeNode left;
  left.id = nodes_[node_index].id.left_child();
  left.bin = std::move(left_bin);
  left.eg.lipschitz = lipschitz_;
  if (effective_range_) left.range = RangeTracker(dim_);

  TreeNode right;
  right.id = nodes_[node_index].id.right_child();
  right.bin = std::move(right_bin);
  right.eg.lipschitz = lipschitz_;
  if (effective_range_) right.range = RangeTracker(dim_);

  const double tau = right.bin.axis(axis).lo;
  nodes_.push_back(std::move(left));
  nodes_.push_back(std::move(right));

  TreeNode& parent = nodes_[node_index];
  parent.left = static_cast<std::int64_t>(nodes_.size() - 2);
  parent.right = static_cast<std::int64_t>(nodes_.size() - 1);
  parent.split_axis = axis;
  parent.threshold = tau;
  height_ = std::max(height_, parent.id.depth + 1);
}

TreeStats NestedEgTree::stats() const {
  TreeStats s;
  s.nodes = nodes_.size();
  s.height = height_;
  s.steps = steps_;
  for (const auto& n : nodes_) {
    if (n.is_leaf()) s.leaves.push_back(LeafCount{n.id, n.count});
  }
  std::sort(s.leaves.begin(), s.leaves.end(),
            [](const LeafCount& a, const LeafCount& b) { return a.id < b.id; });
  return s;
}

}  // namespace nestedeg
