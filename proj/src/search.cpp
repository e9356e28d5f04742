#include "prodrange/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace prodrange {

double ProductQuery::aspect_ratio() const {
  if (radii.empty()) return 1;
  auto [lo, hi] = std::minmax_element(radii.begin(), radii.end());
  return *hi / *lo;
}

void ProductQuery::validate(std::size_t factors) const {
  if (!(epsilon >= 0)) throw InputError("epsilon must be >= 0");
  if (radii.size() != factors) {
    throw InputError("query has " + std::to_string(radii.size()) + " radii, expected " + std::to_string(factors));
  }
  for (double r : radii)
    if (!(r > 0) || !std::isfinite(r)) throw InputError("query radii must be positive and finite");
}

std::uint64_t SearchStats::total_evals() const {
  return std::accumulate(dist_evals.begin(), dist_evals.end(), std::uint64_t{0});
}

void SearchStats::absorb(const SearchStats& other) {
  width = std::max(width, other.width);
  height = std::max(height, other.height);
  splits += other.splits;
  output_size += other.output_size;
  if (dist_evals.size() < other.dist_evals.size()) dist_evals.resize(other.dist_evals.size(), 0);
  for (std::size_t i = 0; i < other.dist_evals.size(); ++i) dist_evals[i] += other.dist_evals[i];
}

std::size_t NodeCover::point_count() const {
  std::size_t k = 0;
  for (auto i : nodes) k += tree->node(i).count();
  return k;
}

std::vector<PointId> NodeCover::points() const {
  std::vector<PointId> out;
  out.reserve(point_count());
  for (auto i : nodes) {
    auto pts = tree->points(i);
    out.insert(out.end(), pts.begin(), pts.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

constexpr double kUnknown = std::numeric_limits<double>::quiet_NaN();

struct Entry {
  double radius;
  PointId center;
  std::uint32_t node;
  std::uint32_t cache;  // offset of this node's per-factor distances
  std::uint32_t depth;  // splits above this node
};

// Max-heap on radius; equal radii pop the smaller center first.
struct Lower {
  bool operator()(const Entry& a, const Entry& b) const {
    return a.radius < b.radius || (a.radius == b.radius && b.center < a.center);
  }
};

class ProductSearch {
 public:
  ProductSearch(const GreedyTree& t, const Location& q, std::span<const double> radii, double epsilon)
      : tree_(t), q_(q), radii_(radii), epsilon_(epsilon) {
    const auto& metric = *t.metric();
    space_ = &metric.space();
    factors_ = metric.factors();
    stats_.dist_evals.assign(space_->factor_count(), 0);
    for (double r : radii_) expanded_.push_back((1.0 + epsilon_) * r);
    // A residual node is only viable, so its points may lie r_i + 2r from q;
    // stopping at r <= (eps / 2) min r_i keeps them inside (1 + eps) r_i.
    threshold_ = 0.5 * epsilon_ * *std::min_element(radii_.begin(), radii_.end());
  }

  CoverResult run(const SearchObserver& observer) {
    CoverResult result;
    result.cover.tree = &tree_;
    // The root enters H; it is dropped at once if its ball misses the range.
    stats_.width = 1;
    Entry root = make_entry(0, 0);
    if (viable(root)) push(root);
    while (!heap_.empty() && heap_.front().radius > threshold_) {
      std::pop_heap(heap_.begin(), heap_.end(), Lower{});
      Entry v = heap_.back();
      heap_.pop_back();
      const auto& node = tree_.node(v.node);

      if (contained(v)) {
        output_.push_back(v.node);
      } else if (!node.is_leaf()) {
        ++stats_.splits;
        stats_.height = std::max<std::size_t>(stats_.height, v.depth + 1);
        Entry right = make_entry(node.right, v.depth + 1);
        Entry left = make_entry(node.left, v.depth + 1);
        // Same center, so the parent's distances carry over.
        std::copy_n(cache_.begin() + v.cache, factors_.size(), cache_.begin() + left.cache);
        if (viable(right)) push(right);
        if (viable(left)) push(left);
      }
      if (observer) notify(observer, v.radius);
    }
    for (const auto& e : heap_) output_.push_back(e.node);
    result.cover.nodes = std::move(output_);
    stats_.output_size = result.cover.point_count();
    result.stats = std::move(stats_);
    return result;
  }

 private:
  Entry make_entry(std::uint32_t node, std::uint32_t depth) {
    const auto& v = tree_.node(node);
    const auto offset = static_cast<std::uint32_t>(cache_.size());
    cache_.resize(cache_.size() + factors_.size(), kUnknown);
    return Entry{v.radius, v.center, node, offset, depth};
  }

  double dist(const Entry& e, std::size_t j) {
    double& slot = cache_[e.cache + j];
    if (std::isnan(slot)) {
      slot = q_.distance(*space_, factors_[j], e.center);
      ++stats_.dist_evals[factors_[j]];
    }
    return slot;
  }

  // d_i(q, v) <= r_i + r_v for every factor.
  bool viable(const Entry& e) {
    for (std::size_t j = 0; j < factors_.size(); ++j)
      if (!(dist(e, j) <= radii_[j] + e.radius)) return false;
    return true;
  }

  // d_i(q, v) <= (1 + eps) r_i - r_v for every factor.
  bool contained(const Entry& e) {
    for (std::size_t j = 0; j < factors_.size(); ++j)
      if (!(dist(e, j) <= expanded_[j] - e.radius)) return false;
    return true;
  }

  void push(const Entry& e) {
    heap_.push_back(e);
    std::push_heap(heap_.begin(), heap_.end(), Lower{});
    stats_.width = std::max(stats_.width, heap_.size());
  }

  void notify(const SearchObserver& observer, double popped) {
    heap_nodes_.clear();
    for (const auto& e : heap_) heap_nodes_.push_back(e.node);
    observer(SearchSnapshot{tree_, heap_nodes_, output_, popped});
  }

  const GreedyTree& tree_;
  const Location& q_;
  std::span<const double> radii_;
  double epsilon_;
  const ProductMetric* space_ = nullptr;
  std::span<const std::size_t> factors_;
  std::vector<double> expanded_;
  double threshold_ = 0;

  std::vector<Entry> heap_;
  std::vector<double> cache_;
  std::vector<std::uint32_t> output_;
  std::vector<std::uint32_t> heap_nodes_;
  SearchStats stats_;
};

void check_inputs(const GreedyTree& t, const Location& q, std::span<const double> radii, double epsilon) {
  if (!(epsilon >= 0)) throw InputError("epsilon must be >= 0");
  if (t.empty()) return;
  const auto& metric = *t.metric();
  if (radii.size() != metric.arity()) {
    throw InputError("query has " + std::to_string(radii.size()) + " radii but the tree has " +
                     std::to_string(metric.arity()) + " factors");
  }
  for (double r : radii)
    if (!(r > 0) || !std::isfinite(r)) throw InputError("query radii must be positive and finite");
  q.check(metric.space());
}

}  // namespace

CoverResult product_range_cover(const GreedyTree& t, const Location& q, std::span<const double> radii,
                                double epsilon, const SearchObserver& observer) {
  check_inputs(t, q, radii, epsilon);
  if (t.empty()) return CoverResult{NodeCover{&t, {}}, SearchStats{}};
  return ProductSearch(t, q, radii, epsilon).run(observer);
}

RangeResult product_range_query(const GreedyTree& t, const ProductQuery& query, const SearchObserver& observer) {
  auto [cover, stats] = product_range_cover(t, query.q, query.radii, query.epsilon, observer);
  return RangeResult{cover.points(), std::move(stats)};
}

CoverResult range_cover(const GreedyTree& t, const Location& q, double r, double epsilon,
                        const SearchObserver& observer) {
  const std::size_t arity = t.empty() ? 1 : t.metric()->arity();
  const std::vector<double> radii(arity, r);
  return product_range_cover(t, q, radii, epsilon, observer);
}

RangeResult range_report(const GreedyTree& t, const Location& q, double r, double epsilon,
                         const SearchObserver& observer) {
  auto [cover, stats] = range_cover(t, q, r, epsilon, observer);
  return RangeResult{cover.points(), std::move(stats)};
}

}  // namespace prodrange
