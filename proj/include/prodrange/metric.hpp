#pragma once

#include <atomic>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "prodrange/errors.hpp"

namespace prodrange {

/// Dense index of a point within a dataset.
struct PointId {
  std::uint32_t index = 0;

  friend constexpr auto operator<=>(PointId, PointId) = default;
};

enum class MetricKind { abs1d, l2, l1, levenshtein };

std::string_view to_string(MetricKind kind);
MetricKind parse_metric_kind(std::string_view text);

struct FactorSpec {
  std::string name;
  MetricKind kind = MetricKind::abs1d;
  std::size_t dim = 1;  // only meaningful for l1/l2
};

/// Coordinate payload of one point under one factor: a scalar (abs1d),
/// a vector (l1/l2) or a string (levenshtein).
using Coord = std::variant<double, std::vector<double>, std::string>;

/// Throws InputError unless `c` has the payload shape `spec` expects.
void validate_coord(const FactorSpec& spec, const Coord& c);

namespace metrics {

double abs_diff(double a, double b);
double l2(std::span<const double> a, std::span<const double> b);
double l1(std::span<const double> a, std::span<const double> b);
/// Unit-cost edit distance.
double levenshtein(std::string_view a, std::string_view b);

}  // namespace metrics

/// One factor metric bound to the coordinate column of a dataset.
///
/// Every call to distance() increments an atomic evaluation counter, so a
/// space may be shared by concurrent readers.
class MetricSpace {
 public:
  MetricSpace(FactorSpec spec, const std::vector<Coord>& column);
  MetricSpace(MetricSpace&& other) noexcept;
  MetricSpace& operator=(MetricSpace&&) = delete;
  MetricSpace(const MetricSpace&) = delete;
  MetricSpace& operator=(const MetricSpace&) = delete;

  const FactorSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  std::size_t size() const { return n_; }

  double distance(PointId x, PointId y) const;
  /// Distance from an out-of-dataset payload to a dataset point.
  double distance(const Coord& q, PointId y) const;

  std::uint64_t eval_count() const { return evals_.load(std::memory_order_relaxed); }
  void reset_eval_count() const { evals_.store(0, std::memory_order_relaxed); }

  Coord coord(PointId x) const;
  void check_coord(const Coord& c) const { validate_coord(spec_, c); }

 private:
  void check_id(PointId x) const;
  double raw(PointId x, PointId y) const;

  FactorSpec spec_;
  std::size_t n_ = 0;
  std::vector<double> numeric_;  // n_ * dim, row-major
  std::vector<std::string> text_;
  mutable std::atomic<std::uint64_t> evals_{0};
};

/// The l-infinity product of m >= 1 factor spaces over one point set.
class ProductMetric {
 public:
  explicit ProductMetric(std::vector<MetricSpace> factors);

  std::size_t factor_count() const { return factors_.size(); }
  std::size_t size() const { return factors_.front().size(); }
  const MetricSpace& factor(std::size_t i) const { return factors_.at(i); }
  std::span<const MetricSpace> factors() const { return factors_; }
  std::optional<std::size_t> find(std::string_view name) const;

  double distance(PointId x, PointId y) const;

  std::vector<std::uint64_t> eval_counts() const;
  void reset_eval_counts() const;
  std::vector<PointId> all_points() const;

 private:
  std::vector<MetricSpace> factors_;
};

/// Max over every factor of `pm`; increments each factor's counter.
double product_distance(const ProductMetric& pm, PointId x, PointId y);

/// The l-infinity product of a selected, ordered subset of a ProductMetric's
/// factors. Trees are built over a Metric; a single-factor Metric is just
/// that factor.
class Metric {
 public:
  Metric(std::shared_ptr<const ProductMetric> space, std::vector<std::size_t> factors);
  static Metric all(std::shared_ptr<const ProductMetric> space);
  static Metric single(std::shared_ptr<const ProductMetric> space, std::size_t factor);

  double operator()(PointId x, PointId y) const;

  const ProductMetric& space() const { return *space_; }
  const std::shared_ptr<const ProductMetric>& space_ptr() const { return space_; }
  std::span<const std::size_t> factors() const { return factors_; }
  std::size_t arity() const { return factors_.size(); }

  friend bool operator==(const Metric& a, const Metric& b) {
    return a.space_ == b.space_ && a.factors_ == b.factors_;
  }

 private:
  std::shared_ptr<const ProductMetric> space_;
  std::vector<std::size_t> factors_;
};

/// A query point: either a dataset point or a per-factor payload list
/// (indexed like the product's factors).
class Location {
 public:
  Location(PointId p) : where_(p) {}  // NOLINT(google-explicit-constructor)
  explicit Location(std::vector<Coord> coords) : where_(std::move(coords)) {}

  bool is_point() const { return std::holds_alternative<PointId>(where_); }
  PointId point() const { return std::get<PointId>(where_); }
  const std::vector<Coord>& coords() const { return std::get<std::vector<Coord>>(where_); }

  double distance(const ProductMetric& pm, std::size_t factor, PointId x) const;
  /// Throws InputError when the location does not fit `pm`.
  void check(const ProductMetric& pm) const;

 private:
  std::variant<PointId, std::vector<Coord>> where_;
};

struct SpreadInfo {
  double diameter = 0;
  double min_distance = 0;  // smallest pairwise distance, possibly 0
  double spread = 0;        // infinity when min_distance == 0
  bool has_duplicates = false;
};

struct DatasetSummary {
  std::size_t n = 0;
  std::vector<SpreadInfo> factors;
  SpreadInfo product;
};

/// Exact all-pairs diameter and spread per factor and for the product.
DatasetSummary dataset_summary(const ProductMetric& pm, std::span<const PointId> points);

}  // namespace prodrange
