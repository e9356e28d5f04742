#include "prodrange/range_tree.hpp"

#include <algorithm>
#include <optional>

namespace prodrange {

GreedyRangeTree::GreedyRangeTree(GreedyTree primary, std::vector<GreedyRangeTree> aux)
    : primary_(std::move(primary)), aux_(std::move(aux)) {
  if (!aux_.empty() && aux_.size() != primary_.nodes().size())
    throw InputError("a greedy range tree needs one auxiliary per primary node");
}

std::vector<std::size_t> GreedyRangeTree::factors() const {
  std::vector<std::size_t> out;
  const GreedyRangeTree* g = this;
  for (;;) {
    auto f = g->primary_.metric()->factors();
    out.insert(out.end(), f.begin(), f.end());
    if (g->is_base()) break;
    g = &g->aux_.front();
  }
  return out;
}

std::size_t GreedyRangeTree::levels() const {
  std::size_t m = 1;
  for (const GreedyRangeTree* g = this; !g->is_base(); g = &g->aux_.front()) ++m;
  return m;
}

GreedyRangeTree cascade(GreedyTree primary, std::span<const std::size_t> rest, MergeMode mode) {
  if (rest.empty()) return GreedyRangeTree(std::move(primary), {});
  if (primary.empty()) throw InputError("cannot cascade an empty tree");

  const Metric sub = Metric::single(primary.metric()->space_ptr(), rest.front());
  const auto deeper = rest.subspan(1);
  const auto nodes = primary.nodes();

  // Children follow their parent in preorder, so a reverse sweep is bottom-up.
  std::vector<std::optional<GreedyRangeTree>> built(nodes.size());
  for (std::size_t i = nodes.size(); i-- > 0;) {
    const auto& v = nodes[i];
    GreedyTree tree = v.is_leaf()
                          ? build_greedy_tree(sub, std::span<const PointId>(&v.center, 1))
                          : merge(built[v.left]->primary(), built[v.right]->primary(), sub, mode);
    built[i].emplace(cascade(std::move(tree), deeper, mode));
  }

  std::vector<GreedyRangeTree> aux;
  aux.reserve(built.size());
  for (auto& b : built) aux.push_back(std::move(*b));
  return GreedyRangeTree(std::move(primary), std::move(aux));
}

GreedyRangeTree build_grt(std::shared_ptr<const ProductMetric> space, std::span<const PointId> points,
                          std::vector<std::size_t> factors, MergeMode mode) {
  if (factors.empty()) throw ConfigError("a greedy range tree needs m >= 1 factors");
  if (points.empty()) throw InputError("a greedy range tree needs n >= 1 points");
  GreedyTree primary = build_greedy_tree(Metric::single(space, factors.front()), points);
  return cascade(std::move(primary), std::span<const std::size_t>(factors).subspan(1), mode);
}

GreedyRangeTree build_grt(std::shared_ptr<const ProductMetric> space, std::span<const PointId> points,
                          MergeMode mode) {
  std::vector<std::size_t> factors(space->factor_count());
  for (std::size_t i = 0; i < factors.size(); ++i) factors[i] = i;
  return build_grt(std::move(space), points, std::move(factors), mode);
}

namespace {

void collect(const GreedyRangeTree& g, std::size_t level, const ProductQuery& query, std::vector<PointId>& out,
             SearchStats& stats) {
  auto [cover, sub] = product_range_cover(g.primary(), query.q, std::span(&query.radii[level], 1), query.epsilon);
  stats.absorb(sub);
  for (auto node : cover.nodes) {
    if (g.is_base()) {
      auto pts = g.primary().points(node);
      out.insert(out.end(), pts.begin(), pts.end());
    } else {
      collect(g.aux(node), level + 1, query, out, stats);
    }
  }
}

}  // namespace

RangeResult grt_query(const GreedyRangeTree& grt, const ProductQuery& query) {
  query.validate(grt.levels());
  const auto& space = grt.primary().metric()->space();
  query.q.check(space);

  RangeResult result;
  result.stats.dist_evals.assign(space.factor_count(), 0);
  collect(grt, 0, query, result.points, result.stats);
  std::sort(result.points.begin(), result.points.end());
  result.stats.output_size = result.points.size();
  return result;
}

std::vector<LevelSize> space_report(const GreedyRangeTree& grt) {
  std::vector<LevelSize> out;
  std::vector<const GreedyRangeTree*> level{&grt};
  while (!level.empty()) {
    LevelSize size;
    std::vector<const GreedyRangeTree*> next;
    for (const auto* g : level) {
      ++size.trees;
      size.nodes += g->primary().nodes().size();
      size.leaves += g->primary().size();
      for (const auto& a : g->aux()) next.push_back(&a);
    }
    out.push_back(size);
    level = std::move(next);
  }
  return out;
}

}  // namespace prodrange
