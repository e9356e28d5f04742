#include "prodrange/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace prodrange {

std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::abs1d: return "abs1d";
    case MetricKind::l2: return "l2";
    case MetricKind::l1: return "l1";
    case MetricKind::levenshtein: return "levenshtein";
  }
  return "?";
}

MetricKind parse_metric_kind(std::string_view text) {
  if (text == "abs1d") return MetricKind::abs1d;
  if (text == "l2") return MetricKind::l2;
  if (text == "l1") return MetricKind::l1;
  if (text == "levenshtein") return MetricKind::levenshtein;
  throw InputError("unknown metric kind '" + std::string(text) + "'");
}

namespace metrics {

double abs_diff(double a, double b) { return std::fabs(a - b); }

double l2(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double l1(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

double levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return static_cast<double>(row[b.size()]);
}

}  // namespace metrics

namespace {

bool is_numeric(MetricKind k) { return k != MetricKind::levenshtein; }

std::span<const double> as_span(const Coord& c) {
  if (const auto* d = std::get_if<double>(&c)) return {d, 1};
  const auto& v = std::get<std::vector<double>>(c);
  return {v.data(), v.size()};
}

}  // namespace

MetricSpace::MetricSpace(FactorSpec spec, const std::vector<Coord>& column)
    : spec_(std::move(spec)), n_(column.size()) {
  if (spec_.kind == MetricKind::abs1d || spec_.kind == MetricKind::levenshtein) spec_.dim = 1;
  if (spec_.dim == 0) throw ConfigError("factor '" + spec_.name + "': dim must be >= 1");
  if (is_numeric(spec_.kind)) {
    numeric_.reserve(n_ * spec_.dim);
  } else {
    text_.reserve(n_);
  }
  for (std::size_t i = 0; i < column.size(); ++i) {
    check_coord(column[i]);
    if (is_numeric(spec_.kind)) {
      auto s = as_span(column[i]);
      numeric_.insert(numeric_.end(), s.begin(), s.end());
    } else {
      text_.push_back(std::get<std::string>(column[i]));
    }
  }
}

MetricSpace::MetricSpace(MetricSpace&& other) noexcept
    : spec_(std::move(other.spec_)),
      n_(other.n_),
      numeric_(std::move(other.numeric_)),
      text_(std::move(other.text_)),
      evals_(other.evals_.load(std::memory_order_relaxed)) {}

void validate_coord(const FactorSpec& spec, const Coord& c) {
  const std::string where = "factor '" + spec.name + "'";
  switch (spec.kind) {
    case MetricKind::abs1d:
      if (std::holds_alternative<double>(c)) return;
      if (const auto* v = std::get_if<std::vector<double>>(&c); v && v->size() == 1) return;
      throw InputError(where + ": expected a number");
    case MetricKind::l1:
    case MetricKind::l2: {
      if (const auto* v = std::get_if<std::vector<double>>(&c)) {
        if (v->size() == spec.dim) return;
        throw InputError(where + ": expected " + std::to_string(spec.dim) + " coordinates, got " +
                         std::to_string(v->size()));
      }
      if (std::holds_alternative<double>(c) && spec.dim == 1) return;
      throw InputError(where + ": expected an array of " + std::to_string(spec.dim) + " numbers");
    }
    case MetricKind::levenshtein:
      if (std::holds_alternative<std::string>(c)) return;
      throw InputError(where + ": expected a string");
  }
}

void MetricSpace::check_id(PointId x) const {
  if (x.index >= n_) {
    throw InputError("point id " + std::to_string(x.index) + " out of range for factor '" + spec_.name +
                     "' (n = " + std::to_string(n_) + ")");
  }
}

double MetricSpace::raw(PointId x, PointId y) const {
  const std::size_t d = spec_.dim;
  switch (spec_.kind) {
    case MetricKind::abs1d: return metrics::abs_diff(numeric_[x.index], numeric_[y.index]);
    case MetricKind::l2:
      return metrics::l2({numeric_.data() + x.index * d, d}, {numeric_.data() + y.index * d, d});
    case MetricKind::l1:
      return metrics::l1({numeric_.data() + x.index * d, d}, {numeric_.data() + y.index * d, d});
    case MetricKind::levenshtein: return metrics::levenshtein(text_[x.index], text_[y.index]);
  }
  return 0;
}

double MetricSpace::distance(PointId x, PointId y) const {
  check_id(x);
  check_id(y);
  evals_.fetch_add(1, std::memory_order_relaxed);
  return raw(x, y);
}

double MetricSpace::distance(const Coord& q, PointId y) const {
  check_id(y);
  evals_.fetch_add(1, std::memory_order_relaxed);
  const std::size_t d = spec_.dim;
  switch (spec_.kind) {
    case MetricKind::abs1d: return metrics::abs_diff(as_span(q)[0], numeric_[y.index]);
    case MetricKind::l2: return metrics::l2(as_span(q), {numeric_.data() + y.index * d, d});
    case MetricKind::l1: return metrics::l1(as_span(q), {numeric_.data() + y.index * d, d});
    case MetricKind::levenshtein: return metrics::levenshtein(std::get<std::string>(q), text_[y.index]);
  }
  return 0;
}

Coord MetricSpace::coord(PointId x) const {
  check_id(x);
  switch (spec_.kind) {
    case MetricKind::abs1d: return numeric_[x.index];
    case MetricKind::l1:
    case MetricKind::l2: {
      const auto* first = numeric_.data() + x.index * spec_.dim;
      return std::vector<double>(first, first + spec_.dim);
    }
    case MetricKind::levenshtein: return text_[x.index];
  }
  return 0.0;
}

ProductMetric::ProductMetric(std::vector<MetricSpace> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw ConfigError("product metric needs at least one factor");
  for (const auto& f : factors_) {
    if (f.size() != factors_.front().size()) {
      throw InputError("factor '" + f.name() + "' has " + std::to_string(f.size()) + " points, expected " +
                       std::to_string(factors_.front().size()));
    }
  }
}

std::optional<std::size_t> ProductMetric::find(std::string_view name) const {
  for (std::size_t i = 0; i < factors_.size(); ++i)
    if (factors_[i].name() == name) return i;
  return std::nullopt;
}

double ProductMetric::distance(PointId x, PointId y) const {
  double d = 0;
  for (const auto& f : factors_) d = std::max(d, f.distance(x, y));
  return d;
}

std::vector<std::uint64_t> ProductMetric::eval_counts() const {
  std::vector<std::uint64_t> out;
  out.reserve(factors_.size());
  for (const auto& f : factors_) out.push_back(f.eval_count());
  return out;
}

void ProductMetric::reset_eval_counts() const {
  for (const auto& f : factors_) f.reset_eval_count();
}

std::vector<PointId> ProductMetric::all_points() const {
  std::vector<PointId> pts(size());
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = PointId{static_cast<std::uint32_t>(i)};
  return pts;
}

double product_distance(const ProductMetric& pm, PointId x, PointId y) { return pm.distance(x, y); }

Metric::Metric(std::shared_ptr<const ProductMetric> space, std::vector<std::size_t> factors)
    : space_(std::move(space)), factors_(std::move(factors)) {
  if (!space_) throw ConfigError("metric without a space");
  if (factors_.empty()) throw ConfigError("metric needs at least one factor");
  for (auto f : factors_)
    if (f >= space_->factor_count()) throw ConfigError("factor index " + std::to_string(f) + " out of range");
}

Metric Metric::all(std::shared_ptr<const ProductMetric> space) {
  std::vector<std::size_t> idx(space ? space->factor_count() : 0);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return Metric(std::move(space), std::move(idx));
}

Metric Metric::single(std::shared_ptr<const ProductMetric> space, std::size_t factor) {
  return Metric(std::move(space), {factor});
}

double Metric::operator()(PointId x, PointId y) const {
  double d = 0;
  for (auto f : factors_) d = std::max(d, space_->factor(f).distance(x, y));
  return d;
}

double Location::distance(const ProductMetric& pm, std::size_t factor, PointId x) const {
  const auto& space = pm.factor(factor);
  if (is_point()) return space.distance(point(), x);
  return space.distance(coords()[factor], x);
}

void Location::check(const ProductMetric& pm) const {
  if (is_point()) {
    if (point().index >= pm.size())
      throw InputError("query point id " + std::to_string(point().index) + " out of range");
    return;
  }
  if (coords().size() != pm.factor_count()) {
    throw InputError("query has " + std::to_string(coords().size()) + " factor coordinates, expected " +
                     std::to_string(pm.factor_count()));
  }
  for (std::size_t i = 0; i < coords().size(); ++i) pm.factor(i).check_coord(coords()[i]);
}

namespace {

SpreadInfo finish(double diameter, double min_distance) {
  SpreadInfo s;
  s.diameter = diameter;
  s.min_distance = min_distance;
  s.has_duplicates = min_distance == 0;
  s.spread = s.has_duplicates ? std::numeric_limits<double>::infinity() : diameter / min_distance;
  return s;
}

}  // namespace

DatasetSummary dataset_summary(const ProductMetric& pm, std::span<const PointId> points) {
  if (points.size() < 2) throw InputError("dataset summary needs n >= 2 points");
  const std::size_t m = pm.factor_count();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dmax(m, 0), dmin(m, inf);
  double pmax = 0, pmin = inf;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      double prod = 0;
      for (std::size_t f = 0; f < m; ++f) {
        const double d = pm.factor(f).distance(points[i], points[j]);
        dmax[f] = std::max(dmax[f], d);
        dmin[f] = std::min(dmin[f], d);
        prod = std::max(prod, d);
      }
      pmax = std::max(pmax, prod);
      pmin = std::min(pmin, prod);
    }
  }
  DatasetSummary out;
  out.n = points.size();
  for (std::size_t f = 0; f < m; ++f) out.factors.push_back(finish(dmax[f], dmin[f]));
  out.product = finish(pmax, pmin);
  return out;
}

}  // namespace prodrange
