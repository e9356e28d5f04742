#include "prodrange/greedy_tree.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

namespace prodrange {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint32_t npos = GreedyTree::npos;

void require_distinct(std::vector<PointId> ids, const char* what) {
  std::sort(ids.begin(), ids.end());
  auto dup = std::adjacent_find(ids.begin(), ids.end());
  if (dup != ids.end()) throw InputError(std::string(what) + ": point " + std::to_string(dup->index) + " appears twice");
}

// Recomputes leaf_points and node slices; requires preorder layout.
std::vector<PointId> compute_slices(std::vector<GreedyTree::Node>& nodes) {
  std::vector<PointId> leaves;
  for (auto& v : nodes) {
    if (v.is_leaf()) {
      v.begin = static_cast<std::uint32_t>(leaves.size());
      v.end = v.begin + 1;
      leaves.push_back(v.center);
    }
  }
  for (std::size_t i = nodes.size(); i-- > 0;) {
    auto& v = nodes[i];
    if (!v.is_leaf()) {
      v.begin = nodes[v.left].begin;
      v.end = nodes[v.right].end;
    }
  }
  return leaves;
}

}  // namespace

GreedyPermutation greedy_permutation(const Metric& metric, std::span<const PointId> points,
                                     std::optional<PointId> seed) {
  if (points.empty()) throw InputError("greedy permutation needs n >= 1 points");
  require_distinct({points.begin(), points.end()}, "greedy permutation");
  const PointId start = seed.value_or(points.front());
  auto it = std::find(points.begin(), points.end(), start);
  if (it == points.end()) throw InputError("seed " + std::to_string(start.index) + " is not among the points");

  const std::size_t n = points.size();
  std::vector<double> cur(n, kInf);
  std::vector<PointId> par(n, start);
  std::vector<bool> done(n, false);

  GreedyPermutation gp;
  gp.order.reserve(n);
  gp.insertion_radius.reserve(n);
  gp.parent.reserve(n);

  std::size_t next = static_cast<std::size_t>(it - points.begin());
  for (std::size_t rank = 0; rank < n; ++rank) {
    const PointId p = points[next];
    done[next] = true;
    gp.order.push_back(p);
    gp.insertion_radius.push_back(rank == 0 ? kInf : cur[next]);
    gp.parent.push_back(rank == 0 ? p : par[next]);

    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (done[j]) continue;
      const double d = metric(p, points[j]);
      if (d < cur[j] || (d == cur[j] && p < par[j])) {
        cur[j] = d;
        par[j] = p;
      }
      if (best == n || cur[j] > cur[best] || (cur[j] == cur[best] && points[j] < points[best])) best = j;
    }
    next = best;
  }
  return gp;
}

GreedyTree GreedyTree::assemble(Metric metric, GreedyPermutation permutation, std::vector<Node> nodes) {
  if (nodes.empty()) throw InputError("a greedy tree needs at least one node");
  const auto count = static_cast<std::uint32_t>(nodes.size());

  // Walk left-before-right; a well-formed preorder tree visits 0, 1, 2, ...
  std::vector<std::uint32_t> stack{0};
  std::uint32_t expected = 0;
  while (!stack.empty()) {
    const std::uint32_t i = stack.back();
    stack.pop_back();
    if (i != expected) throw InputError("tree nodes are not in preorder at node " + std::to_string(expected));
    ++expected;
    const Node& v = nodes[i];
    if ((v.left == npos) != (v.right == npos))
      throw InputError("node " + std::to_string(i) + " has exactly one child");
    if (v.is_leaf()) continue;
    if (v.left >= count || v.right >= count)
      throw InputError("node " + std::to_string(i) + " has a child index out of range");
    stack.push_back(v.right);
    stack.push_back(v.left);
  }
  if (expected != count) throw InputError("tree has unreachable nodes");

  GreedyTree t;
  t.leaf_points_ = compute_slices(nodes);
  t.nodes_ = std::move(nodes);

  auto sorted_leaves = t.leaf_points_;
  std::sort(sorted_leaves.begin(), sorted_leaves.end());
  if (std::adjacent_find(sorted_leaves.begin(), sorted_leaves.end()) != sorted_leaves.end())
    throw InputError("a point appears in more than one leaf");
  auto sorted_order = permutation.order;
  std::sort(sorted_order.begin(), sorted_order.end());
  if (sorted_order != sorted_leaves) throw InputError("tree leaves do not match its permutation");
  if (permutation.insertion_radius.size() != permutation.size() || permutation.parent.size() != permutation.size())
    throw InputError("permutation arrays have inconsistent lengths");

  t.permutation_ = std::move(permutation);
  t.metric_ = std::move(metric);
  return t;
}

std::size_t GreedyTree::height() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> depth(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& v = nodes_[i];
    if (v.is_leaf()) {
      best = std::max(best, depth[i]);
    } else {
      depth[v.left] = depth[v.right] = depth[i] + 1;
    }
  }
  return best;
}

GreedyTree build_greedy_tree(const GreedyPermutation& gp, const Metric& metric) {
  const std::size_t n = gp.size();
  if (n == 0) throw InputError("building a greedy tree needs n >= 1 points");
  if (gp.parent.size() != n || gp.insertion_radius.size() != n)
    throw InputError("permutation arrays have inconsistent lengths");

  std::unordered_map<std::uint32_t, std::uint32_t> rank_of;
  rank_of.reserve(n);
  for (std::uint32_t r = 0; r < n; ++r) rank_of.emplace(gp.order[r].index, r);

  std::vector<std::vector<std::uint32_t>> children(n);
  for (std::uint32_t r = 1; r < n; ++r) {
    auto it = rank_of.find(gp.parent[r].index);
    if (it == rank_of.end() || it->second >= r)
      throw InputError("parent of rank " + std::to_string(r) + " does not precede it");
    children[it->second].push_back(r);
  }

  struct Task {
    std::uint32_t center_rank;
    std::uint32_t next_child;
    std::uint32_t parent;
    bool right;
  };
  std::vector<GreedyTree::Node> nodes;
  nodes.reserve(2 * n - 1);
  std::vector<Task> stack{{0, 0, npos, false}};
  while (!stack.empty()) {
    const Task t = stack.back();
    stack.pop_back();
    const auto idx = static_cast<std::uint32_t>(nodes.size());
    nodes.push_back(GreedyTree::Node{gp.order[t.center_rank]});
    if (t.parent != npos) (t.right ? nodes[t.parent].right : nodes[t.parent].left) = idx;
    const auto& kids = children[t.center_rank];
    if (t.next_child < kids.size()) {
      stack.push_back({kids[t.next_child], 0, idx, true});
      stack.push_back({t.center_rank, t.next_child + 1, idx, false});
    }
  }

  auto leaves = compute_slices(nodes);
  for (std::size_t i = nodes.size(); i-- > 0;) {
    auto& v = nodes[i];
    if (v.is_leaf()) continue;
    const auto& right = nodes[v.right];
    double ecc = 0;
    for (std::uint32_t k = right.begin; k < right.end; ++k) ecc = std::max(ecc, metric(v.center, leaves[k]));
    v.radius = std::max({nodes[v.left].radius, right.radius, ecc});
  }
  return GreedyTree::assemble(metric, gp, std::move(nodes));
}

GreedyTree build_greedy_tree(const Metric& metric, std::span<const PointId> points) {
  return build_greedy_tree(greedy_permutation(metric, points), metric);
}

namespace {

struct Best {
  double cur = -1;  // < 0: every point below is already ordered
  PointId id{};
  std::uint32_t pos = 0;
};

bool better(const Best& a, const Best& b) { return a.cur > b.cur || (a.cur == b.cur && a.id < b.id); }

// Exact greedy ordering of the union of two trees' points. Each tree node
// keeps the farthest not-yet-ordered point below it; inserting a new center
// p only descends into nodes whose ball could hold a point that p brings
// closer (d(c, p) - radius <= farthest distance below).
class UnionOrdering {
 public:
  UnionOrdering(const Metric& metric, const GreedyTree& a, const GreedyTree& b)
      : metric_(metric), sides_{{&a, 0, {}}, {&b, static_cast<std::uint32_t>(a.size()), {}}} {
    ids_.insert(ids_.end(), a.leaf_points().begin(), a.leaf_points().end());
    ids_.insert(ids_.end(), b.leaf_points().begin(), b.leaf_points().end());
  }

  std::span<const PointId> ids() const { return ids_; }

  GreedyPermutation run(std::uint32_t seed_pos, std::vector<double> seed_dist) {
    const PointId seed = ids_[seed_pos];
    cur_ = std::move(seed_dist);
    par_.assign(ids_.size(), seed);
    cur_[seed_pos] = -1;
    for (auto& s : sides_) {
      s.best.assign(s.tree->nodes().size(), Best{});
      for (std::size_t i = s.best.size(); i-- > 0;) refresh(s, static_cast<std::uint32_t>(i));
    }

    GreedyPermutation gp;
    gp.order.push_back(seed);
    gp.insertion_radius.push_back(kInf);
    gp.parent.push_back(seed);
    for (;;) {
      Best pick = sides_[0].best[0];
      if (better(sides_[1].best[0], pick)) pick = sides_[1].best[0];
      if (pick.cur < 0) break;
      gp.order.push_back(pick.id);
      gp.insertion_radius.push_back(pick.cur);
      gp.parent.push_back(par_[pick.pos]);
      cur_[pick.pos] = -1;
      for (auto& s : sides_) insert(s, pick.id);
    }
    return gp;
  }

 private:
  struct Side {
    const GreedyTree* tree;
    std::uint32_t offset;
    std::vector<Best> best;
  };

  struct Frame {
    std::uint32_t node;
    double dcp;  // d(center(node), p)
    bool expanded;
  };

  void refresh(Side& s, std::uint32_t i) {
    const auto& v = s.tree->node(i);
    if (v.is_leaf()) {
      const std::uint32_t pos = s.offset + v.begin;
      s.best[i] = Best{cur_[pos], ids_[pos], pos};
      return;
    }
    const Best& l = s.best[v.left];
    const Best& r = s.best[v.right];
    s.best[i] = better(r, l) ? r : l;
  }

  void insert(Side& s, PointId p) {
    const auto& t = *s.tree;
    stack_.clear();
    stack_.push_back({0, metric_(t.root().center, p), false});
    while (!stack_.empty()) {
      const Frame f = stack_.back();
      const auto& v = t.node(f.node);
      if (f.expanded) {
        refresh(s, f.node);
        stack_.pop_back();
        continue;
      }
      const Best& below = s.best[f.node];
      const double slack = 1e-12 * (f.dcp + v.radius);
      if (below.cur < 0 || f.dcp - v.radius > below.cur + slack) {
        stack_.pop_back();
        continue;
      }
      if (v.is_leaf()) {
        const std::uint32_t pos = s.offset + v.begin;
        if (cur_[pos] >= 0 && (f.dcp < cur_[pos] || (f.dcp == cur_[pos] && p < par_[pos]))) {
          cur_[pos] = f.dcp;
          par_[pos] = p;
        }
        refresh(s, f.node);
        stack_.pop_back();
        continue;
      }
      stack_.back().expanded = true;
      stack_.push_back({v.right, metric_(t.node(v.right).center, p), false});
      stack_.push_back({v.left, f.dcp, false});  // left child shares the center
    }
  }

  const Metric& metric_;
  Side sides_[2];
  std::vector<PointId> ids_;
  std::vector<double> cur_;
  std::vector<PointId> par_;
  std::vector<Frame> stack_;
};

}  // namespace

GreedyTree merge(const GreedyTree& a, const GreedyTree& b, const Metric& metric, MergeMode mode) {
  for (const GreedyTree* t : {&a, &b}) {
    if (!t->empty() && !(*t->metric() == metric)) throw InputError("merge: tree metric does not match");
  }
  if (b.empty()) return a;
  if (a.empty()) return b;

  std::vector<PointId> all(a.leaf_points().begin(), a.leaf_points().end());
  all.insert(all.end(), b.leaf_points().begin(), b.leaf_points().end());
  require_distinct(all, "merge: overlapping point sets");

  // Seed at the root center with the larger eccentricity over the union.
  const PointId ca = a.root().center, cb = b.root().center;
  std::vector<double> da(all.size()), db(all.size());
  double ea = 0, eb = 0;
  std::uint32_t pa = 0, pb = 0;
  for (std::uint32_t i = 0; i < all.size(); ++i) {
    da[i] = metric(ca, all[i]);
    db[i] = metric(cb, all[i]);
    ea = std::max(ea, da[i]);
    eb = std::max(eb, db[i]);
    if (all[i] == ca) pa = i;
    if (all[i] == cb) pb = i;
  }
  const bool seed_a = ea > eb || (ea == eb && ca < cb);

  if (mode == MergeMode::rebuild) {
    return build_greedy_tree(greedy_permutation(metric, all, seed_a ? ca : cb), metric);
  }
  UnionOrdering ordering(metric, a, b);
  auto gp = seed_a ? ordering.run(pa, std::move(da)) : ordering.run(pb, std::move(db));
  return build_greedy_tree(gp, metric);
}

VerifyReport verify_greedy_tree(const GreedyTree& t, const Metric& metric) {
  VerifyReport report;
  if (t.empty()) return report;
  if (!t.metric() || !(*t.metric() == metric)) {
    report.violations.push_back({"root", "tree metric does not match the given metric"});
    return report;
  }

  const auto nodes = t.nodes();
  std::vector<std::uint32_t> up(nodes.size(), npos);
  for (std::uint32_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].is_leaf()) up[nodes[i].left] = up[nodes[i].right] = i;
  }
  auto path = [&](std::uint32_t i) {
    std::string s;
    while (up[i] != npos) {
      s.insert(0, nodes[up[i]].left == i ? ".L" : ".R");
      i = up[i];
    }
    return "root" + s;
  };
  auto fail = [&](std::uint32_t i, std::string msg) { report.violations.push_back({path(i), std::move(msg)}); };

  const auto& gp = t.permutation();
  std::unordered_map<std::uint32_t, std::uint32_t> rank_of;
  for (std::uint32_t r = 0; r < gp.size(); ++r) rank_of.emplace(gp.order[r].index, r);
  auto rank = [&](PointId p) {
    auto it = rank_of.find(p.index);
    return it == rank_of.end() ? npos : it->second;
  };

  for (std::uint32_t i = 0; i < nodes.size(); ++i) {
    const auto& v = nodes[i];
    double ecc = 0;
    bool has_center = false;
    for (PointId x : t.points(v)) {
      ecc = std::max(ecc, metric(v.center, x));
      has_center = has_center || x == v.center;
    }
    if (!has_center) fail(i, "center is not one of the node's points");
    if (ecc > v.radius) fail(i, "radius < max subtree distance");

    if (v.is_leaf()) {
      if (v.radius != 0) fail(i, "leaf radius must be 0");
      if (v.count() != 1) fail(i, "leaf must hold exactly one point");
      continue;
    }
    const auto& l = nodes[v.left];
    const auto& r = nodes[v.right];
    if (v.count() < 2) fail(i, "internal node must hold at least two points");
    if (l.begin != v.begin || l.end != r.begin || r.end != v.end) fail(i, "children do not partition the node's points");
    if (l.center != v.center) fail(i, "left child must share its parent's center");
    if (l.radius > v.radius) fail(i, "left child radius exceeds parent radius");
    if (r.radius > v.radius) fail(i, "right child radius exceeds parent radius");
    if (metric(v.center, r.center) > v.radius) fail(i, "radius < distance to right child center");
    if (ecc <= v.radius && v.radius != std::max({ecc, l.radius, r.radius})) fail(i, "radius is not tight");

    const auto rc = rank(r.center);
    if (rc == npos || rank(v.center) == npos || gp.parent[rc] != v.center || rc <= rank(v.center))
      fail(i, "right child center is not a later greedy child of the node's center");
    if (!l.is_leaf()) {
      const auto next = rank(nodes[l.right].center);
      if (rc != npos && next != npos && next <= rc) fail(i, "children of a center are not in greedy order");
    }
  }

  // Greedy property and nearest-predecessor parents, by brute force.
  const std::size_t n = gp.size();
  std::vector<double> cur(n, kInf);
  for (std::uint32_t i = 0; i < n; ++i) {
    const PointId p = gp.order[i];
    if (i > 0) {
      if (cur[i] != gp.insertion_radius[i])
        report.violations.push_back({"permutation[" + std::to_string(i) + "]", "insertion radius is not the distance to the prefix"});
      if (gp.insertion_radius[i] > gp.insertion_radius[i - 1])
        report.violations.push_back({"permutation[" + std::to_string(i) + "]", "insertion radii increase"});
      const auto pr = rank(gp.parent[i]);
      if (pr == npos || pr >= i || metric(gp.parent[i], p) != cur[i])
        report.violations.push_back({"permutation[" + std::to_string(i) + "]", "parent is not a nearest predecessor"});
      for (std::uint32_t j = i + 1; j < n; ++j) {
        if (cur[j] > cur[i]) {
          report.violations.push_back({"permutation[" + std::to_string(i) + "]", "a later point is farther from the prefix"});
          break;
        }
      }
    }
    for (std::uint32_t j = i + 1; j < n; ++j) cur[j] = std::min(cur[j], metric(p, gp.order[j]));
  }
  return report;
}

}  // namespace prodrange
