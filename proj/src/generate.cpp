#include "prodrange/generate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <unordered_set>

namespace prodrange {

Generator parse_generator(std::string_view text) {
  if (text == "uniform") return Generator::uniform;
  if (text == "clustered") return Generator::clustered;
  if (text == "grid") return Generator::grid;
  throw InputError("unknown generator '" + std::string(text) + "'");
}

std::string_view to_string(Generator g) {
  switch (g) {
    case Generator::uniform: return "uniform";
    case Generator::clustered: return "clustered";
    case Generator::grid: return "grid";
  }
  return "?";
}

namespace {

constexpr std::string_view kAlphabet = "acgt";

std::string random_string(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> letter(0, kAlphabet.size() - 1);
  std::string s(len(rng), 'a');
  for (auto& c : s) c = kAlphabet[letter(rng)];
  return s;
}

std::string mutate(std::string s, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> edits(0, 3);
  std::uniform_int_distribution<std::size_t> letter(0, kAlphabet.size() - 1);
  for (int e = edits(rng); e > 0; --e) {
    std::uniform_int_distribution<int> op(0, 2);
    std::uniform_int_distribution<std::size_t> at(0, s.empty() ? 0 : s.size() - 1);
    switch (op(rng)) {
      case 0: s.insert(s.begin() + static_cast<std::ptrdiff_t>(s.empty() ? 0 : at(rng)), kAlphabet[letter(rng)]); break;
      case 1: if (s.size() > 1) s.erase(at(rng), 1); break;
      default: if (!s.empty()) s[at(rng)] = kAlphabet[letter(rng)]; break;
    }
  }
  return s;
}

Coord pack(std::vector<double> v, const FactorSpec& spec) {
  if (spec.kind == MetricKind::abs1d) return v.front();
  return v;
}

std::vector<Coord> strings_column(std::size_t n, const GeneratorOptions& opt, std::mt19937_64& rng) {
  std::vector<Coord> col;
  col.reserve(n);
  if (opt.kind == Generator::clustered) {
    std::vector<std::string> bases;
    for (std::size_t c = 0; c < std::max<std::size_t>(1, opt.clusters); ++c) bases.push_back(random_string(rng, 8, 8));
    std::uniform_int_distribution<std::size_t> pick(0, bases.size() - 1);
    for (std::size_t i = 0; i < n; ++i) col.emplace_back(mutate(bases[pick(rng)], rng));
  } else {
    for (std::size_t i = 0; i < n; ++i) col.emplace_back(random_string(rng, 4, 12));
  }
  return col;
}

std::vector<Coord> numeric_column(const FactorSpec& spec, std::size_t n, const GeneratorOptions& opt,
                                  std::mt19937_64& rng) {
  const std::size_t dim = spec.kind == MetricKind::abs1d ? 1 : spec.dim;
  std::vector<Coord> col;
  col.reserve(n);
  switch (opt.kind) {
    case Generator::uniform: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(dim);
        for (auto& x : v) x = u(rng);
        col.push_back(pack(std::move(v), spec));
      }
      break;
    }
    case Generator::clustered: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::normal_distribution<double> g(0.0, opt.cluster_sigma);
      std::vector<std::vector<double>> centers(std::max<std::size_t>(1, opt.clusters), std::vector<double>(dim));
      for (auto& c : centers)
        for (auto& x : c) x = u(rng);
      std::uniform_int_distribution<std::size_t> pick(0, centers.size() - 1);
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v = centers[pick(rng)];
        for (auto& x : v) x += g(rng);
        col.push_back(pack(std::move(v), spec));
      }
      break;
    }
    case Generator::grid: {
      const double cells = std::pow(static_cast<double>(opt.grid_extent), static_cast<double>(dim));
      if (cells < static_cast<double>(n)) {
        throw InputError("grid generator: " + std::to_string(opt.grid_extent) + "^" + std::to_string(dim) +
                         " lattice cells cannot hold " + std::to_string(n) + " distinct points");
      }
      std::uniform_int_distribution<std::uint64_t> axis(0, opt.grid_extent - 1);
      std::unordered_set<std::string> seen;
      while (col.size() < n) {
        std::vector<double> v(dim);
        std::string key;
        for (auto& x : v) {
          x = static_cast<double>(axis(rng));
          key += std::to_string(static_cast<std::uint64_t>(x)) + ',';
        }
        if (seen.insert(key).second) col.push_back(pack(std::move(v), spec));
      }
      break;
    }
  }
  return col;
}

}  // namespace

std::vector<std::vector<Coord>> generate_columns(std::span<const FactorSpec> factors, std::size_t n,
                                                 const GeneratorOptions& options) {
  std::vector<std::vector<Coord>> cols;
  for (std::size_t f = 0; f < factors.size(); ++f) {
    std::mt19937_64 rng(options.seed * 0x9E3779B97F4A7C15ULL + f + 1);
    if (factors[f].kind == MetricKind::levenshtein) {
      cols.push_back(strings_column(n, options, rng));
    } else {
      cols.push_back(numeric_column(factors[f], n, options, rng));
    }
  }
  return cols;
}

std::shared_ptr<const ProductMetric> make_product(std::span<const FactorSpec> factors,
                                                  const std::vector<std::vector<Coord>>& columns) {
  if (factors.size() != columns.size()) throw ConfigError("one column per factor is required");
  std::vector<MetricSpace> spaces;
  spaces.reserve(factors.size());
  for (std::size_t f = 0; f < factors.size(); ++f) spaces.emplace_back(factors[f], columns[f]);
  return std::make_shared<const ProductMetric>(std::move(spaces));
}

std::shared_ptr<const ProductMetric> generate_dataset(std::span<const FactorSpec> factors, std::size_t n,
                                                      const GeneratorOptions& options) {
  return make_product(factors, generate_columns(factors, n, options));
}

std::vector<ProductQuery> generate_workload(const ProductMetric& pm, std::size_t count,
                                            const WorkloadOptions& options) {
  if (pm.size() == 0) throw InputError("cannot draw queries from an empty dataset");
  if (!(options.radius > 0) || !(options.aspect >= 1)) throw ConfigError("workload needs radius > 0 and aspect >= 1");
  const std::size_t m = pm.factor_count();
  std::vector<double> radii(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double t = m == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(m - 1);
    radii[i] = options.radius * std::pow(options.aspect, t);
  }
  std::mt19937_64 rng(options.seed ^ 0xD1B54A32D192ED03ULL);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(pm.size() - 1));
  std::vector<ProductQuery> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back({PointId{pick(rng)}, radii, options.epsilon});
  return out;
}

}  // namespace prodrange
