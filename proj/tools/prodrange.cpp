// prodrange: build, query, verify and benchmark product range search indexes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "prodrange/generate.hpp"
#include "prodrange/io.hpp"
#include "prodrange/oracle.hpp"

using namespace prodrange;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kInputError = 2;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

json spread_json(const SpreadInfo& s) {
  return {{"diameter", s.diameter},
          {"min_distance", s.min_distance},
          {"spread", std::isinf(s.spread) ? json("inf") : json(s.spread)}};
}

io::Index build_index(std::shared_ptr<const ProductMetric> space, std::vector<FactorSpec> specs,
                      io::Structure structure, MergeMode mode) {
  io::Index index;
  index.structure = structure;
  index.factors = std::move(specs);
  index.space = space;
  const auto points = space->all_points();
  if (structure == io::Structure::product_tree) {
    index.tree = build_greedy_tree(Metric::all(space), points);
  } else {
    index.tree = build_grt(space, points, mode);
  }
  return index;
}

/// Runs every query; with threads > 1 queries are split into contiguous
/// blocks. Results stay in workload order.
std::vector<RangeResult> run_queries(const io::Index& index, const std::vector<ProductQuery>& queries,
                                     unsigned threads) {
  std::vector<RangeResult> results(queries.size());
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, queries.size()))));
  if (threads == 1) {
    for (std::size_t i = 0; i < queries.size(); ++i) results[i] = index.query(queries[i]);
    return results;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t block = (queries.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t * block; i < std::min(queries.size(), (t + 1) * block); ++i)
          results[i] = index.query(queries[i]);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

struct Aggregate {
  double width_mean = 0;
  std::size_t width_max = 0;
  std::size_t height_max = 0;
  double splits_mean = 0;
  double evals_mean = 0;
  double k_mean = 0;
  std::vector<std::uint64_t> evals_total;
};

Aggregate aggregate(const std::vector<RangeResult>& results, std::size_t m) {
  Aggregate a;
  a.evals_total.assign(m, 0);
  if (results.empty()) return a;
  for (const auto& r : results) {
    a.width_mean += static_cast<double>(r.stats.width);
    a.width_max = std::max(a.width_max, r.stats.width);
    a.height_max = std::max(a.height_max, r.stats.height);
    a.splits_mean += static_cast<double>(r.stats.splits);
    a.evals_mean += static_cast<double>(r.stats.total_evals());
    a.k_mean += static_cast<double>(r.points.size());
    for (std::size_t f = 0; f < m && f < r.stats.dist_evals.size(); ++f) a.evals_total[f] += r.stats.dist_evals[f];
  }
  const auto q = static_cast<double>(results.size());
  a.width_mean /= q;
  a.splits_mean /= q;
  a.evals_mean /= q;
  a.k_mean /= q;
  return a;
}

// ---------------------------------------------------------------- build

struct BuildArgs {
  std::string data, factors, out, structure = "product-tree", merge = "fast";
  bool no_timings = false;
};

int cmd_build(const BuildArgs& a) {
  auto specs = io::load_factor_config(a.factors);
  auto space = io::load_dataset(a.data, specs);
  const auto structure = io::parse_structure(a.structure);
  const auto mode = a.merge == "rebuild" ? MergeMode::rebuild : MergeMode::fast;

  space->reset_eval_counts();
  const auto t0 = Clock::now();
  auto index = build_index(space, specs, structure, mode);
  const double build_seconds = seconds_since(t0);
  const auto build_evals = space->eval_counts();

  auto out = open_out(a.out);
  out << io::index_json(index).dump() << '\n';

  json report = {{"structure", std::string(io::to_string(structure))},
                 {"n", space->size()},
                 {"m", space->factor_count()},
                 {"build_dist_evals", build_evals}};
  if (space->size() >= 2) {
    const auto pts = space->all_points();
    const auto summary = dataset_summary(*space, pts);
    json per_factor = json::array();
    for (std::size_t f = 0; f < specs.size(); ++f) {
      auto s = spread_json(summary.factors[f]);
      s["name"] = specs[f].name;
      per_factor.push_back(std::move(s));
    }
    report["factors"] = std::move(per_factor);
  }
  if (!a.no_timings) report["build_seconds"] = build_seconds;
  std::cout << report.dump(2) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- query

struct QueryArgs {
  std::string index, workload, out;
  std::optional<double> epsilon_default;
  unsigned threads = 1;
  bool no_timings = false;
};

int cmd_query(const QueryArgs& a) {
  const auto index = io::load_index(a.index);
  const auto queries = io::load_workload(a.workload, *index.space, a.epsilon_default);

  const auto t0 = Clock::now();
  const auto results = run_queries(index, queries, a.threads);
  const double elapsed = seconds_since(t0);

  auto out = open_out(a.out);
  for (std::size_t i = 0; i < results.size(); ++i)
    out << io::result_json({i, results[i].points, results[i].stats}).dump() << '\n';

  const auto agg = aggregate(results, index.space->factor_count());
  json summary = {{"queries", results.size()},
                  {"structure", std::string(io::to_string(index.structure))},
                  {"width_mean", agg.width_mean},
                  {"width_max", agg.width_max},
                  {"height_max", agg.height_max},
                  {"dist_evals", agg.evals_total}};
  if (!a.no_timings) summary["wall_seconds"] = elapsed;
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::string data, factors, workload, results;
  std::optional<double> epsilon_default;
};

std::string id_list(const std::vector<PointId>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? "," : "") + std::to_string(ids[i].index);
  return s;
}

int cmd_verify(const VerifyArgs& a) {
  const auto specs = io::load_factor_config(a.factors);
  const auto space = io::load_dataset(a.data, specs);
  const auto queries = io::load_workload(a.workload, *space, a.epsilon_default);
  const auto records = io::load_results(a.results);

  std::vector<const io::ResultRecord*> by_query(queries.size(), nullptr);
  for (const auto& r : records) {
    if (r.query_index >= queries.size())
      throw InputError(a.results + ": query_index " + std::to_string(r.query_index) + " out of range");
    if (by_query[r.query_index])
      throw InputError(a.results + ": duplicate result for query " + std::to_string(r.query_index));
    by_query[r.query_index] = &r;
  }
  for (std::size_t i = 0; i < queries.size(); ++i)
    if (!by_query[i]) throw InputError(a.results + ": no result for query " + std::to_string(i));

  const auto points = space->all_points();
  std::size_t failures = 0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& q = queries[i];
    const auto inner = exact_product_range(*space, points, q.q, q.radii);
    const auto outer = expanded_product_range(*space, points, q.q, q.radii, q.epsilon);
    const auto verdict = sandwich_check(by_query[i]->points, inner.points, outer.points);
    if (verdict.pass) continue;
    ++failures;
    std::cout << "query " << i << " FAIL";
    if (!verdict.missing.empty()) std::cout << " missing=[" << id_list(verdict.missing) << "]";
    if (!verdict.extra.empty()) std::cout << " extra=[" << id_list(verdict.extra) << "]";
    std::cout << '\n';
  }
  if (failures == 0) {
    std::cout << "all " << queries.size() << " queries pass\n";
    return kOk;
  }
  std::cout << failures << " of " << queries.size() << " queries fail\n";
  return kVerifyFailed;
}

// ---------------------------------------------------------------- stats

int cmd_stats(const std::string& index_path) {
  const auto index = io::load_index(index_path);
  json report = {{"structure", std::string(io::to_string(index.structure))},
                 {"n", index.space->size()},
                 {"m", index.space->factor_count()}};
  json levels = json::array();
  if (const auto* t = std::get_if<GreedyTree>(&index.tree)) {
    levels.push_back({{"level", 0}, {"trees", 1}, {"nodes", t->nodes().size()}, {"leaves", t->size()}});
    report["height"] = t->height();
  } else {
    const auto& g = std::get<GreedyRangeTree>(index.tree);
    const auto sizes = space_report(g);
    std::size_t aux_leaves = 0;
    for (std::size_t l = 0; l < sizes.size(); ++l) {
      levels.push_back({{"level", l}, {"trees", sizes[l].trees}, {"nodes", sizes[l].nodes}, {"leaves", sizes[l].leaves}});
      if (l > 0) aux_leaves += sizes[l].leaves;
    }
    report["aux_leaves"] = aux_leaves;
    report["height"] = g.primary().height();
  }
  report["levels"] = std::move(levels);
  std::cout << report.dump(2) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string factors, out, generator = "uniform", workload_out;
  std::size_t n = 0, queries = 0, clusters = 8;
  std::uint32_t grid_extent = 64;
  double radius = 0.1, aspect = 1, epsilon = 0.5;
  std::uint64_t seed = 1;
};

GeneratorOptions generator_options(const std::string& kind, std::uint64_t seed, std::size_t clusters,
                                   std::uint32_t grid_extent) {
  GeneratorOptions g;
  g.kind = parse_generator(kind);
  g.seed = seed;
  g.clusters = clusters;
  g.grid_extent = grid_extent;
  return g;
}

int cmd_generate(const GenerateArgs& a) {
  const auto specs = io::load_factor_config(a.factors);
  const auto space = generate_dataset(specs, a.n, generator_options(a.generator, a.seed, a.clusters, a.grid_extent));
  auto out = open_out(a.out);
  io::write_dataset(out, *space);
  if (!a.workload_out.empty()) {
    auto wout = open_out(a.workload_out);
    const auto queries = generate_workload(*space, a.queries, {a.seed, a.radius, a.aspect, a.epsilon});
    for (const auto& q : queries) wout << io::query_json(q, *space).dump() << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string factors, sweep = "epsilon", structure = "both", generator = "uniform", merge = "fast", out;
  std::vector<double> values;
  std::size_t n = 1024, queries = 100;
  double epsilon = 0.5, aspect = 1, radius = 0.1;
  std::uint64_t seed = 1;
  std::uint32_t grid_extent = 64;
  unsigned threads = 1;
  bool no_timings = false;
};

std::vector<FactorSpec> default_bench_factors() {
  return {{"a", MetricKind::l2, 2}, {"b", MetricKind::l2, 2}};
}

int cmd_bench(const BenchArgs& a) {
  if (a.sweep != "n" && a.sweep != "epsilon" && a.sweep != "aspect-ratio")
    throw InputError("unknown sweep '" + a.sweep + "' (expected n, epsilon or aspect-ratio)");
  std::vector<io::Structure> structures;
  if (a.structure == "both") {
    structures = {io::Structure::product_tree, io::Structure::grt};
  } else {
    structures = {io::parse_structure(a.structure)};
  }
  const auto specs = a.factors.empty() ? default_bench_factors() : io::load_factor_config(a.factors);
  const auto mode = a.merge == "rebuild" ? MergeMode::rebuild : MergeMode::fast;
  const auto gen = generator_options(a.generator, a.seed, 8, a.grid_extent);

  std::vector<double> values = a.values;
  if (values.empty()) {
    if (a.sweep == "n") values = {128, 256, 512, 1024};
    if (a.sweep == "epsilon") values = {0.1, 0.25, 0.5, 1.0};
    if (a.sweep == "aspect-ratio") values = {1, 2, 4};
  }

  auto out = open_out(a.out);
  out << "structure,sweep,value,n,m,queries,epsilon,aspect,width_mean,width_max,height_max,splits_mean,"
         "dist_evals_mean,oracle_evals,k_mean";
  if (!a.no_timings) out << ",build_seconds,query_seconds";
  out << '\n';

  // One dataset per n; the epsilon and aspect sweeps reuse a single build.
  std::map<std::size_t, std::vector<std::pair<io::Structure, io::Index>>> built;
  std::map<std::pair<std::size_t, int>, double> build_time;
  auto index_for = [&](std::size_t n, io::Structure s) -> const io::Index& {
    auto& slot = built[n];
    for (auto& [kind, idx] : slot)
      if (kind == s) return idx;
    auto space = generate_dataset(specs, n, gen);
    const auto t0 = Clock::now();
    slot.emplace_back(s, build_index(space, specs, s, mode));
    build_time[{n, static_cast<int>(s)}] = seconds_since(t0);
    return slot.back().second;
  };

  for (double v : values) {
    const std::size_t n = a.sweep == "n" ? static_cast<std::size_t>(v) : a.n;
    const double eps = a.sweep == "epsilon" ? v : a.epsilon;
    const double aspect = a.sweep == "aspect-ratio" ? v : a.aspect;
    for (auto s : structures) {
      const auto& index = index_for(n, s);
      const auto queries = generate_workload(*index.space, a.queries, {a.seed, a.radius, aspect, eps});
      const auto t0 = Clock::now();
      const auto results = run_queries(index, queries, a.threads);
      const double qsec = seconds_since(t0);
      const auto agg = aggregate(results, specs.size());
      std::ostringstream row;
      row << io::to_string(s) << ',' << a.sweep << ',' << v << ',' << n << ',' << specs.size() << ','
          << queries.size() << ',' << eps << ',' << aspect << ',' << agg.width_mean << ',' << agg.width_max << ','
          << agg.height_max << ',' << agg.splits_mean << ',' << agg.evals_mean << ',' << n * specs.size() << ','
          << agg.k_mean;
      if (!a.no_timings) row << ',' << build_time[{n, static_cast<int>(s)}] << ',' << qsec;
      out << row.str() << '\n';
    }
  }
  return kOk;
}

const char* kFormats = R"(File formats:
  factor config  JSON array: [{"name": "x", "kind": "abs1d|l2|l1|levenshtein", "dim": 2}]
  dataset        JSON Lines: {"id": 0, "coords": {"x": 1.5, "pos": [0.1, 0.2], "tag": "acgt"}}
                 ids must be exactly 0..n-1
  workload       JSON Lines: {"q": <point id or coords object>, "radii": [r1, ...], "epsilon": e}
  results        JSON Lines: {"query_index": i, "points": [ids],
                              "stats": {"width", "height", "splits", "dist_evals": [per factor], "k"}}
  bench output   CSV, one row per (structure, swept value)
Exit codes: 0 ok, 1 verification failure, 2 input error.)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate product range search over greedy trees and greedy range trees"};
  app.footer(kFormats);
  app.require_subcommand(1);

  BuildArgs build;
  auto* b = app.add_subcommand("build", "Build and serialize an index");
  b->add_option("--data", build.data, "Dataset (JSON Lines)")->required();
  b->add_option("--factors", build.factors, "Factor config (JSON)")->required();
  b->add_option("--out", build.out, "Index output path")->required();
  b->add_option("--structure", build.structure, "grt or product-tree")->check(CLI::IsMember({"grt", "product-tree"}));
  b->add_option("--merge", build.merge, "Merge strategy for grt auxiliaries")->check(CLI::IsMember({"fast", "rebuild"}));
  b->add_flag("--no-timings", build.no_timings, "Omit wall-clock fields from the report");

  QueryArgs query;
  double query_eps = 0;
  auto* q = app.add_subcommand("query", "Run a workload against an index");
  q->add_option("--index", query.index, "Index file")->required();
  q->add_option("--workload", query.workload, "Workload (JSON Lines)")->required();
  q->add_option("--out", query.out, "Results output path")->required();
  auto* q_eps = q->add_option("--epsilon-default", query_eps, "Epsilon for workload lines without one");
  q->add_option("--threads", query.threads, "Worker threads")->check(CLI::PositiveNumber);
  q->add_flag("--no-timings", query.no_timings, "Omit wall-clock fields from the summary");

  VerifyArgs verify;
  double verify_eps = 0;
  auto* v = app.add_subcommand("verify", "Check results against the brute-force oracle");
  v->add_option("--data", verify.data, "Dataset (JSON Lines)")->required();
  v->add_option("--factors", verify.factors, "Factor config (JSON)")->required();
  v->add_option("--workload", verify.workload, "Workload (JSON Lines)")->required();
  v->add_option("--results", verify.results, "Results (JSON Lines)")->required();
  auto* v_eps = v->add_option("--epsilon-default", verify_eps, "Epsilon for workload lines without one");

  std::string stats_index;
  auto* s = app.add_subcommand("stats", "Print the size report of an index");
  s->add_option("--index", stats_index, "Index file")->required();

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic dataset and optionally a workload");
  g->add_option("--factors", gen.factors, "Factor config (JSON)")->required();
  g->add_option("--n", gen.n, "Number of points")->required();
  g->add_option("--out", gen.out, "Dataset output path")->required();
  g->add_option("--generator", gen.generator, "uniform, clustered or grid")
      ->check(CLI::IsMember({"uniform", "clustered", "grid"}));
  g->add_option("--grid-extent", gen.grid_extent, "Lattice side length for the grid generator");
  g->add_option("--clusters", gen.clusters, "Cluster count for the clustered generator");
  g->add_option("--seed", gen.seed, "RNG seed");
  g->add_option("--workload-out", gen.workload_out, "Also write a workload here");
  g->add_option("--queries", gen.queries, "Workload size");
  g->add_option("--radius", gen.radius, "Smallest query radius");
  g->add_option("--aspect", gen.aspect, "Query aspect ratio");
  g->add_option("--epsilon", gen.epsilon, "Query epsilon");

  BenchArgs bench;
  auto* bn = app.add_subcommand("bench", "Sweep n, epsilon or aspect ratio and write a CSV");
  bn->add_option("--sweep", bench.sweep, "n, epsilon or aspect-ratio")
      ->check(CLI::IsMember({"n", "epsilon", "aspect-ratio"}));
  bn->add_option("--values", bench.values, "Swept values (defaults depend on --sweep)")->delimiter(',');
  bn->add_option("--out", bench.out, "CSV output path")->required();
  bn->add_option("--factors", bench.factors, "Factor config (default: two 2-D l2 factors)");
  bn->add_option("--structure", bench.structure, "grt, product-tree or both")
      ->check(CLI::IsMember({"grt", "product-tree", "both"}));
  bn->add_option("--generator", bench.generator, "uniform, clustered or grid")
      ->check(CLI::IsMember({"uniform", "clustered", "grid"}));
  bn->add_option("--grid-extent", bench.grid_extent, "Lattice side length for the grid generator");
  bn->add_option("--n", bench.n, "Points when not sweeping n");
  bn->add_option("--queries", bench.queries, "Queries per row");
  bn->add_option("--epsilon", bench.epsilon, "Epsilon when not sweeping it");
  bn->add_option("--aspect", bench.aspect, "Aspect ratio when not sweeping it");
  bn->add_option("--radius", bench.radius, "Smallest query radius");
  bn->add_option("--seed", bench.seed, "RNG seed");
  bn->add_option("--threads", bench.threads, "Worker threads")->check(CLI::PositiveNumber);
  bn->add_option("--merge", bench.merge, "Merge strategy for grt auxiliaries")->check(CLI::IsMember({"fast", "rebuild"}));
  bn->add_flag("--no-timings", bench.no_timings, "Omit wall-clock columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*b) return cmd_build(build);
    if (*q) {
      if (*q_eps) query.epsilon_default = query_eps;
      return cmd_query(query);
    }
    if (*v) {
      if (*v_eps) verify.epsilon_default = verify_eps;
      return cmd_verify(verify);
    }
    if (*s) return cmd_stats(stats_index);
    if (*g) return cmd_generate(gen);
    if (*bn) return cmd_bench(bench);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kOk;
}
