#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "prodrange/greedy_tree.hpp"
#include "prodrange/search.hpp"

namespace prodrange {

/// Cascading greedy range tree: a greedy tree under the first factor whose
/// every node owns a greedy range tree over the node's points under the
/// remaining factors. With one factor it is a plain greedy tree.
class GreedyRangeTree {
 public:
  GreedyRangeTree(GreedyTree primary, std::vector<GreedyRangeTree> aux);

  const GreedyTree& primary() const { return primary_; }
  bool is_base() const { return aux_.empty(); }
  /// Auxiliary structure of primary node `node`; requires !is_base().
  const GreedyRangeTree& aux(std::uint32_t node) const { return aux_.at(node); }
  std::span<const GreedyRangeTree> aux() const { return aux_; }
  /// Global factor indices, one per cascade level.
  std::vector<std::size_t> factors() const;
  std::size_t levels() const;

 private:
  GreedyTree primary_;
  std::vector<GreedyRangeTree> aux_;
};

/// Builds the primary tree under factors[0], then every auxiliary bottom-up
/// by merging the children's auxiliaries.
GreedyRangeTree build_grt(std::shared_ptr<const ProductMetric> space, std::span<const PointId> points,
                          std::vector<std::size_t> factors, MergeMode mode = MergeMode::fast);

/// All factors of `space` in order.
GreedyRangeTree build_grt(std::shared_ptr<const ProductMetric> space, std::span<const PointId> points,
                          MergeMode mode = MergeMode::fast);

/// Attaches auxiliaries (factors `rest`) to an existing primary tree.
GreedyRangeTree cascade(GreedyTree primary, std::span<const std::size_t> rest, MergeMode mode = MergeMode::fast);

/// Level-by-level query: cover under factor 1, recurse into each cover
/// node's auxiliary with the remaining radii, report at the last level.
RangeResult grt_query(const GreedyRangeTree& grt, const ProductQuery& query);

struct LevelSize {
  std::size_t trees = 0;
  std::size_t nodes = 0;
  std::size_t leaves = 0;
};

/// Per cascade level totals; level 0 is the primary tree.
std::vector<LevelSize> space_report(const GreedyRangeTree& grt);

}  // namespace prodrange
