#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "prodrange/metric.hpp"

namespace prodrange {

struct ScanResult {
  std::vector<PointId> points;            // sorted
  std::vector<std::uint64_t> dist_evals;  // per factor
};

/// Linear scan: x is reported iff d_i(x, q) <= radii[i] for every factor.
/// Without short-circuiting this evaluates exactly n * m distances.
ScanResult exact_product_range(const ProductMetric& pm, std::span<const PointId> points, const Location& q,
                               std::span<const double> radii, bool short_circuit = false);

/// Same scan against the (1 + epsilon) expanded radii.
ScanResult expanded_product_range(const ProductMetric& pm, std::span<const PointId> points, const Location& q,
                                  std::span<const double> radii, double epsilon);

struct SandwichVerdict {
  std::vector<PointId> missing;  // in the exact set, absent from output
  std::vector<PointId> extra;    // in output, outside the expanded set
  bool pass = true;
};

/// Checks exact_inner ⊆ output ⊆ expanded_outer. Inputs need not be sorted.
SandwichVerdict sandwich_check(std::span<const PointId> output, std::span<const PointId> exact_inner,
                               std::span<const PointId> expanded_outer);

}  // namespace prodrange
