#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "prodrange/greedy_tree.hpp"
#include "prodrange/metric.hpp"

namespace prodrange {

/// (q, r_1..r_m, epsilon). Radii follow the factor order of the structure
/// being queried.
struct ProductQuery {
  Location q;
  std::vector<double> radii;
  double epsilon = 0;

  /// max r_i / min r_i
  double aspect_ratio() const;
  /// Throws InputError on epsilon < 0, non-positive radii or a radius count
  /// other than `factors`.
  void validate(std::size_t factors) const;
};

struct SearchStats {
  std::size_t width = 0;   // max heap size
  std::size_t height = 0;  // max splits along one point's node chain
  std::size_t splits = 0;
  std::size_t output_size = 0;
  std::vector<std::uint64_t> dist_evals;  // per factor of the product metric

  std::uint64_t total_evals() const;
  /// Folds a sub-search into this one: max of width/height, sums of the rest.
  void absorb(const SearchStats& other);
};

/// Disjoint tree nodes whose points over-approximate a query range.
struct NodeCover {
  const GreedyTree* tree = nullptr;
  std::vector<std::uint32_t> nodes;

  std::size_t point_count() const;
  std::vector<PointId> points() const;  // sorted
};

/// State handed to a SearchObserver after every loop iteration.
struct SearchSnapshot {
  const GreedyTree& tree;
  std::span<const std::uint32_t> heap;
  std::span<const std::uint32_t> output;
  double popped_radius;
};

using SearchObserver = std::function<void(const SearchSnapshot&)>;

struct CoverResult {
  NodeCover cover;
  SearchStats stats;
};

struct RangeResult {
  std::vector<PointId> points;  // sorted
  SearchStats stats;
};

/// Heap-driven product range search over a greedy tree whose metric is the
/// product of the queried factors. `radii[j]` applies to the tree metric's
/// j-th factor. Every node in the cover lies inside the (1 + epsilon)
/// expanded range, and the cover holds every point of the exact range.
/// Splitting stops once the largest heap radius is at most
/// (epsilon / 2) * min radii.
CoverResult product_range_cover(const GreedyTree& t, const Location& q, std::span<const double> radii,
                                double epsilon, const SearchObserver& observer = {});

RangeResult product_range_query(const GreedyTree& t, const ProductQuery& query,
                                const SearchObserver& observer = {});

/// Single-radius search; on a multi-factor tree r applies to every factor,
/// i.e. to the product distance.
CoverResult range_cover(const GreedyTree& t, const Location& q, double r, double epsilon,
                        const SearchObserver& observer = {});

RangeResult range_report(const GreedyTree& t, const Location& q, double r, double epsilon,
                         const SearchObserver& observer = {});

}  // namespace prodrange
