#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prodrange/metric.hpp"

namespace prodrange {

/// A greedy (farthest-point) ordering. All vectors are indexed by rank.
/// Rank 0 is the seed: its insertion radius is +infinity and it is its own
/// parent.
struct GreedyPermutation {
  std::vector<PointId> order;
  std::vector<double> insertion_radius;
  std::vector<PointId> parent;

  std::size_t size() const { return order.size(); }
};

/// Exact O(n^2) farthest-point ordering of `points` under `metric`.
///
/// Starts at `seed` (defaults to points.front()). Ties in the farthest-point
/// choice and in the nearest-predecessor assignment go to the smaller
/// PointId.
GreedyPermutation greedy_permutation(const Metric& metric, std::span<const PointId> points,
                                     std::optional<PointId> seed = std::nullopt);

/// Binary ball tree induced by a greedy permutation.
///
/// Every point hangs below its nearest predecessor; a center's children are
/// ordered by rank. Splitting the node (c, children[j..]) yields the right
/// child rooted at children[j] and the left child (c, children[j+1..]).
///
/// Nodes are stored in preorder and each node's points form a contiguous
/// slice of leaf_points(). A node's radius is the smallest value that bounds
/// every center-to-point distance in the subtree and every descendant radius,
/// so radii never increase going down.
class GreedyTree {
 public:
  static constexpr std::uint32_t npos = ~std::uint32_t{0};

  struct Node {
    PointId center;
    double radius = 0;
    std::uint32_t left = npos;
    std::uint32_t right = npos;
    std::uint32_t begin = 0;  // slice of leaf_points()
    std::uint32_t end = 0;

    bool is_leaf() const { return left == npos; }
    std::uint32_t count() const { return end - begin; }
  };

  /// The empty tree; only meaningful as the identity of merge().
  GreedyTree() = default;

  /// Assembles a tree from preorder nodes (center, radius, left, right).
  /// Slices are recomputed; structural defects (bad child indices, repeated
  /// or missing points) throw InputError. Radius or greedy-order defects are
  /// accepted and left to verify_greedy_tree().
  static GreedyTree assemble(Metric metric, GreedyPermutation permutation, std::vector<Node> nodes);

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return leaf_points_.size(); }
  const Node& root() const { return nodes_.front(); }
  const Node& node(std::uint32_t i) const { return nodes_[i]; }
  std::span<const Node> nodes() const { return nodes_; }
  std::span<const PointId> leaf_points() const { return leaf_points_; }
  std::span<const PointId> points(const Node& v) const {
    return std::span<const PointId>(leaf_points_).subspan(v.begin, v.count());
  }
  std::span<const PointId> points(std::uint32_t i) const { return points(nodes_[i]); }
  const GreedyPermutation& permutation() const { return permutation_; }
  /// Unset only for the empty tree.
  const std::optional<Metric>& metric() const { return metric_; }
  /// Maximum number of splits from the root to any leaf.
  std::size_t height() const;

 private:
  std::optional<Metric> metric_;
  GreedyPermutation permutation_;
  std::vector<Node> nodes_;
  std::vector<PointId> leaf_points_;
};

GreedyTree build_greedy_tree(const GreedyPermutation& gp, const Metric& metric);
GreedyTree build_greedy_tree(const Metric& metric, std::span<const PointId> points);

enum class MergeMode {
  fast,     // greedy order over the union, pruned with the input trees
  rebuild,  // plain greedy_permutation over the union
};

/// Greedy tree over points(a) + points(b). Non-destructive. The union is
/// ordered from whichever root center has the larger eccentricity over the
/// union (ties to the smaller id); both modes give identical trees.
GreedyTree merge(const GreedyTree& a, const GreedyTree& b, const Metric& metric,
                 MergeMode mode = MergeMode::fast);

struct Violation {
  std::string path;  // e.g. "root.L.R"
  std::string message;
};

struct VerifyReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Exhaustive O(n^2) check of every node and permutation invariant.
VerifyReport verify_greedy_tree(const GreedyTree& t, const Metric& metric);

}  // namespace prodrange
