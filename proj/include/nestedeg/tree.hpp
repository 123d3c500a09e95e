#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "nestedeg/eg.hpp"
#include "nestedeg/loss.hpp"

namespace nestedeg {

// One coordinate of a bin: [lo, hi) or, when the interval touches 1, [lo, 1].
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool hi_closed = true;

  bool contains(double v) const { return v >= lo && (hi_closed ? v <= hi : v < hi); }
  double length() const { return hi - lo; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

// Axis-aligned hyper-rectangle of [0,1]^d.
class Bin {
 public:
  static Bin unit(std::size_t dim);
  explicit Bin(std::vector<Interval> axes);

  std::size_t dim() const { return axes_.size(); }
  const Interval& axis(std::size_t j) const { return axes_[j]; }
  const std::vector<Interval>& axes() const { return axes_; }

  bool contains(std::span<const double> x) const;
  double squared_diameter() const;
  double diameter() const;

  // Halves coordinate `axis` at its midpoint. The left half is [lo, tau), the
  // right half [tau, hi) or [tau, 1] when the parent is closed at 1.
  std::pair<Bin, Bin> split(std::size_t axis) const;

  friend bool operator==(const Bin&, const Bin&) = default;

 private:
  std::vector<Interval> axes_;
};

// Bounding box of the covariates routed to a node (effective-range variant).
class RangeTracker {
 public:
  RangeTracker() = default;
  explicit RangeTracker(std::size_t dim);

  void observe(std::span<const double> x);
  bool empty() const { return empty_; }
  double squared_diameter() const;
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

  static RangeTracker from_bounds(std::vector<double> lower, std::vector<double> upper);

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  bool empty_ = true;
};

// Position (h, i) of a node: depth h >= 0, index i in [1, 2^h].
struct NodeId {
  std::uint32_t depth = 0;
  std::uint64_t index = 1;

  NodeId left_child() const { return {depth + 1, 2 * index - 1}; }
  NodeId right_child() const { return {depth + 1, 2 * index}; }

  friend bool operator==(const NodeId&, const NodeId&) = default;
  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

struct TreeNode {
  static constexpr std::int64_t kNone = -1;

  NodeId id;
  Bin bin = Bin::unit(1);
  std::uint64_t count = 0;  // observations predicted while this node was a leaf
  EgState eg;
  std::int64_t left = kNone;  // arena indices of the children
  std::int64_t right = kNone;
  std::size_t split_axis = 0;
  double threshold = 0.0;
  RangeTracker range;

  bool is_leaf() const { return left == kNone; }
};

// Handle returned by predict and consumed by the matching update.
struct LeafRef {
  std::size_t node = 0;
  NodeId id;

  friend bool operator==(const LeafRef&, const LeafRef&) = default;
};

struct TreePrediction {
  double value = 0.5;
  LeafRef leaf;
};

struct LeafCount {
  NodeId id;
  std::uint64_t count = 0;
};

struct TreeStats {
  std::size_t nodes = 1;
  std::uint32_t height = 0;
  std::uint64_t steps = 0;
  std::vector<LeafCount> leaves;
};

/// Nested EG regression tree over [0,1]^d.
///
/// Each leaf runs its own EgState on the observations routed to it. After the
/// update of leaf (h,i), the leaf is split when
///
///     count + 1 >= diam^-2
///
/// where diam is the Euclidean diameter of its bin (or, with the effective
/// range variant, of the bounding box of the covariates it has seen). The split
/// halves coordinate (h mod d) at the bin midpoint; children start with a fresh
/// EgState and a zero count, the triggering observation stays in the parent.
///
/// predict() and update() must alternate; update() checks the leaf handle.
class NestedEgTree {
 public:
  NestedEgTree(std::size_t dim, LossSpec loss_spec, bool effective_range = false);

  // Rebuilds a tree from a node arena (see tree_from_json). Node 0 is the root.
  static NestedEgTree from_nodes(std::size_t dim, LossSpec loss_spec, bool effective_range,
                                 std::vector<TreeNode> nodes, std::uint64_t steps);

  std::size_t dim() const { return dim_; }
  const LossSpec& loss_spec() const { return loss_; }
  bool effective_range() const { return effective_range_; }

  LeafRef route(std::span<const double> x) const;
  TreePrediction predict(std::span<const double> x);
  void update(const LeafRef& leaf, double pred, double outcome);

  TreeStats stats() const;
  std::size_t node_count() const { return nodes_.size(); }
  std::uint32_t height() const { return height_; }
  std::uint64_t steps() const { return steps_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }

 private:
  void check_point(std::span<const double> x) const;
  bool split_condition(const TreeNode& node) const;
  void split(std::size_t node_index);

  std::size_t dim_;
  LossSpec loss_;
  bool effective_range_;
  double lipschitz_;
  std::vector<TreeNode> nodes_;
  std::uint32_t height_ = 0;
  std::uint64_t steps_ = 0;

  std::optional<LeafRef> pending_;
  std::vector<double> pending_x_;
};

}  // namespace nestedeg
