#pragma once

// Fixtures, random instance generators and independent brute-force models
// shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <vector>

#include "prodrange/generate.hpp"
#include "prodrange/greedy_tree.hpp"
#include "prodrange/metric.hpp"
#include "prodrange/search.hpp"

namespace prodrange::testing {

inline PointId pid(std::uint32_t i) { return PointId{i}; }

inline std::vector<PointId> ids(std::initializer_list<std::uint32_t> list) {
  std::vector<PointId> out;
  for (auto i : list) out.push_back(PointId{i});
  return out;
}

/// One abs1d factor "x" over the given values.
inline std::shared_ptr<const ProductMetric> line(const std::vector<double>& xs) {
  std::vector<Coord> col(xs.begin(), xs.end());
  std::vector<FactorSpec> specs{{"x", MetricKind::abs1d, 1}};
  return make_product(specs, {col});
}

/// Two abs1d factors x and y over (x, y) pairs.
inline std::shared_ptr<const ProductMetric> plane(const std::vector<std::pair<double, double>>& pts) {
  std::vector<Coord> xs, ys;
  for (auto [x, y] : pts) {
    xs.emplace_back(x);
    ys.emplace_back(y);
  }
  std::vector<FactorSpec> specs{{"x", MetricKind::abs1d, 1}, {"y", MetricKind::abs1d, 1}};
  return make_product(specs, {xs, ys});
}

/// a=(0,0) b=(2,1) c=(5,5) d=(1,3) e=(9,0), ids 0..4.
inline std::shared_ptr<const ProductMetric> desk() { return plane({{0, 0}, {2, 1}, {5, 5}, {1, 3}, {9, 0}}); }

inline FactorSpec random_spec(std::mt19937_64& rng, std::size_t index) {
  const std::string name = "f" + std::to_string(index);
  switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
    case 0: return {name, MetricKind::abs1d, 1};
    case 1: return {name, MetricKind::l2, std::uniform_int_distribution<std::size_t>(1, 3)(rng)};
    case 2: return {name, MetricKind::l1, std::uniform_int_distribution<std::size_t>(1, 3)(rng)};
    default: return {name, MetricKind::levenshtein, 1};
  }
}

inline std::vector<FactorSpec> random_specs(std::mt19937_64& rng, std::size_t m) {
  std::vector<FactorSpec> specs;
  for (std::size_t i = 0; i < m; ++i) specs.push_back(random_spec(rng, i));
  return specs;
}

/// Random generator kind and seed; grid lattices are sized to fit n points.
inline std::shared_ptr<const ProductMetric> random_space(std::mt19937_64& rng, const std::vector<FactorSpec>& specs,
                                                         std::size_t n) {
  GeneratorOptions g;
  g.kind = static_cast<Generator>(std::uniform_int_distribution<int>(0, 2)(rng));
  g.seed = rng();
  g.clusters = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
  g.grid_extent = static_cast<std::uint32_t>(std::max<std::size_t>(16, n));
  return generate_dataset(specs, n, g);
}

/// Query location: a dataset point, or a perturbed copy of one given as raw
/// coordinates.
inline Location random_location(std::mt19937_64& rng, const ProductMetric& pm) {
  const PointId base{std::uniform_int_distribution<std::uint32_t>(0, static_cast<std::uint32_t>(pm.size() - 1))(rng)};
  if (std::uniform_int_distribution<int>(0, 1)(rng) == 0) return base;
  std::normal_distribution<double> jitter(0.0, 0.05);
  std::vector<Coord> coords;
  for (const auto& f : pm.factors()) {
    Coord c = f.coord(base);
    if (auto* d = std::get_if<double>(&c)) *d += jitter(rng);
    if (auto* v = std::get_if<std::vector<double>>(&c))
      for (auto& x : *v) x += jitter(rng);
    if (auto* s = std::get_if<std::string>(&c); s && !s->empty()) (*s)[0] = (*s)[0] == 'a' ? 'c' : 'a';
    coords.push_back(std::move(c));
  }
  return Location(std::move(coords));
}

/// Radii scaled from the distances to random dataset points, so queries are
/// neither empty nor everything most of the time.
inline std::vector<double> random_radii(std::mt19937_64& rng, const ProductMetric& pm, const Location& q) {
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(pm.size() - 1));
  std::uniform_real_distribution<double> scale(0.3, 1.2);
  std::vector<double> radii;
  for (std::size_t f = 0; f < pm.factor_count(); ++f) {
    const double d = q.distance(pm, f, PointId{pick(rng)});
    radii.push_back(d > 0 ? d * scale(rng) : 0.5);
  }
  return radii;
}

inline ProductQuery random_query(std::mt19937_64& rng, const ProductMetric& pm, double epsilon) {
  Location q = random_location(rng, pm);
  auto radii = random_radii(rng, pm, q);
  return {std::move(q), std::move(radii), epsilon};
}

/// Brute-force farthest-point simulation. Every round recomputes each
/// candidate's distance to the whole prefix from scratch.
inline GreedyPermutation simulate_greedy(const Metric& d, std::vector<PointId> points, PointId seed) {
  GreedyPermutation gp;
  std::vector<PointId> chosen{seed};
  gp.order.push_back(seed);
  gp.insertion_radius.push_back(std::numeric_limits<double>::infinity());
  gp.parent.push_back(seed);
  std::erase(points, seed);
  std::sort(points.begin(), points.end());
  while (!points.empty()) {
    double best = -1;
    PointId best_point{}, best_parent{};
    for (PointId x : points) {
      double near = std::numeric_limits<double>::infinity();
      PointId near_point{};
      for (PointId c : chosen) {
        const double dist = d(x, c);
        if (dist < near || (dist == near && c < near_point)) {
          near = dist;
          near_point = c;
        }
      }
      if (near > best) {  // points are sorted, so the first maximum has the smallest id
        best = near;
        best_point = x;
        best_parent = near_point;
      }
    }
    chosen.push_back(best_point);
    gp.order.push_back(best_point);
    gp.insertion_radius.push_back(best);
    gp.parent.push_back(best_parent);
    std::erase(points, best_point);
  }
  return gp;
}

}  // namespace prodrange::testing
