#include "prodrange/oracle.hpp"

#include <algorithm>
#include <iterator>

namespace prodrange {

ScanResult exact_product_range(const ProductMetric& pm, std::span<const PointId> points, const Location& q,
                               std::span<const double> radii, bool short_circuit) {
  const std::size_t m = pm.factor_count();
  if (radii.size() != m)
    throw InputError("oracle: " + std::to_string(radii.size()) + " radii for " + std::to_string(m) + " factors");
  q.check(pm);

  ScanResult out;
  out.dist_evals.assign(m, 0);
  for (PointId x : points) {
    bool inside = true;
    for (std::size_t i = 0; i < m; ++i) {
      if (!inside && short_circuit) break;
      ++out.dist_evals[i];
      if (!(q.distance(pm, i, x) <= radii[i])) inside = false;
    }
    if (inside) out.points.push_back(x);
  }
  std::sort(out.points.begin(), out.points.end());
  return out;
}

ScanResult expanded_product_range(const ProductMetric& pm, std::span<const PointId> points, const Location& q,
                                  std::span<const double> radii, double epsilon) {
  std::vector<double> grown;
  grown.reserve(radii.size());
  for (double r : radii) grown.push_back((1.0 + epsilon) * r);
  return exact_product_range(pm, points, q, grown);
}

SandwichVerdict sandwich_check(std::span<const PointId> output, std::span<const PointId> exact_inner,
                               std::span<const PointId> expanded_outer) {
  auto sorted = [](std::span<const PointId> s) {
    std::vector<PointId> v(s.begin(), s.end());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  const auto out = sorted(output), inner = sorted(exact_inner), outer = sorted(expanded_outer);

  SandwichVerdict v;
  std::set_difference(inner.begin(), inner.end(), out.begin(), out.end(), std::back_inserter(v.missing));
  std::set_difference(out.begin(), out.end(), outer.begin(), outer.end(), std::back_inserter(v.extra));
  v.pass = v.missing.empty() && v.extra.empty();
  return v;
}

}  // namespace prodrange
