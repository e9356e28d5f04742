#include <sstream>

#include "doctest.h"
#include "prodrange/io.hpp"
#include "support.hpp"

using namespace prodrange;
using namespace prodrange::testing;
using nlohmann::json;

namespace {

const std::vector<FactorSpec> kDeskSpecs{{"x", MetricKind::abs1d, 1}, {"y", MetricKind::abs1d, 1}};

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("factor config") {
  const auto specs = io::parse_factor_config(json::parse(
      R"([{"name": "x", "kind": "abs1d"}, {"name": "p", "kind": "l2", "dim": 3}, {"name": "s", "kind": "levenshtein"}])"));
  REQUIRE(specs.size() == 3);
  CHECK(specs[1].kind == MetricKind::l2);
  CHECK(specs[1].dim == 3);
  CHECK(io::parse_factor_config(io::factor_config_json(specs)).size() == 3);

  CHECK_THROWS_AS(io::parse_factor_config(json::parse("[]")), ConfigError);
  CHECK_THROWS_AS(io::parse_factor_config(json::parse(R"([{"name": "x", "kind": "cosine"}])")), InputError);
  CHECK_THROWS_AS(io::parse_factor_config(json::parse(R"([{"name": "p", "kind": "l1"}])")), InputError);
  CHECK_THROWS_AS(io::parse_factor_config(json::parse(R"([{"name": "x", "kind": "abs1d"}, {"name": "x", "kind": "abs1d"}])")),
                  InputError);
}

TEST_CASE("dataset round trip with mixed factor kinds") {
  const std::vector<FactorSpec> specs{{"x", MetricKind::abs1d, 1}, {"p", MetricKind::l1, 2}, {"s", MetricKind::levenshtein, 1}};
  auto pm = generate_dataset(specs, 20, {Generator::clustered, 4});
  std::stringstream buf;
  io::write_dataset(buf, *pm);
  auto back = io::read_dataset(buf, specs);
  REQUIRE(back->size() == 20);
  for (PointId x : pm->all_points())
    for (std::size_t f = 0; f < 3; ++f) REQUIRE(back->factor(f).coord(x) == pm->factor(f).coord(x));
}

TEST_CASE("dataset records may come in any id order") {
  std::istringstream in(R"({"id": 1, "coords": {"x": 5, "y": 6}}
{"id": 0, "coords": {"x": 1, "y": 2}}
)");
  auto pm = io::read_dataset(in, kDeskSpecs);
  CHECK(std::get<double>(pm->factor(0).coord(pid(0))) == 1);
  CHECK(std::get<double>(pm->factor(1).coord(pid(1))) == 6);
}

TEST_CASE("dataset errors carry line numbers") {
  auto read = [](const std::string& text) {
    return error_of([&] {
      std::istringstream in(text);
      io::read_dataset(in, kDeskSpecs, "d.jsonl");
    });
  };
  CHECK(read("{\"id\": 0, \"coords\": {\"x\": 1, \"y\": 2}}\n{\"id\": 1, \"coords\": {\"x\": 1}}\n")
            .starts_with("d.jsonl:2: missing coordinate for factor 'y'"));
  CHECK(read("{\"id\": 0, \"coords\": {\"x\": 1, \"y\": 2}}\n\n{not json\n").starts_with("d.jsonl:3:"));
  CHECK(read("{\"id\": 0, \"coords\": {\"x\": 1, \"y\": 2}}\n{\"id\": 0, \"coords\": {\"x\": 1, \"y\": 2}}\n")
            .starts_with("d.jsonl:2: duplicate id 0"));
  CHECK(read("{\"id\": 3, \"coords\": {\"x\": 1, \"y\": 2}}\n").starts_with("d.jsonl:1: id 3 out of range"));
  CHECK(read("{\"id\": 0, \"coords\": {\"x\": \"a\", \"y\": 2}}\n").starts_with("d.jsonl:1: factor 'x'"));
  CHECK(read("").find("n ≥ 1 required") != std::string::npos);
}

TEST_CASE("workload parsing") {
  auto pm = desk();
  std::istringstream in(R"({"q": 0, "radii": [2, 2], "epsilon": 0.5}
{"q": {"x": 4, "y": 4}, "radii": [1, 3]}
)");
  const auto qs = io::read_workload(in, *pm, 0.25);
  REQUIRE(qs.size() == 2);
  CHECK(qs[0].q.is_point());
  CHECK(qs[0].epsilon == 0.5);
  CHECK_FALSE(qs[1].q.is_point());
  CHECK(qs[1].epsilon == 0.25);
  CHECK(qs[1].aspect_ratio() == 3);

  std::stringstream again;
  for (const auto& q : qs) again << io::query_json(q, *pm).dump() << '\n';
  const auto round = io::read_workload(again, *pm);
  CHECK(round[1].radii == qs[1].radii);

  auto bad = [&](const std::string& text, std::optional<double> eps = std::nullopt) {
    return error_of([&] {
      std::istringstream w(text);
      io::read_workload(w, *pm, eps, "w.jsonl");
    });
  };
  CHECK(bad(R"({"q": 0, "radii": [2], "epsilon": 0})").starts_with("w.jsonl:1: query has 1 radii"));
  CHECK(bad(R"({"q": 0, "radii": [2, 2]})").starts_with("w.jsonl:1: missing field 'epsilon'"));
  CHECK(bad(R"({"q": 9, "radii": [2, 2], "epsilon": 0})").starts_with("w.jsonl:1: query point id 9"));
  CHECK(bad(R"({"q": 0, "radii": [2, 2], "epsilon": -1})").starts_with("w.jsonl:1: epsilon"));
}

TEST_CASE("results round trip") {
  SearchStats s;
  s.width = 3;
  s.height = 2;
  s.splits = 4;
  s.output_size = 2;
  s.dist_evals = {7, 5};
  std::stringstream buf;
  buf << io::result_json({0, ids({1, 3}), s}).dump() << '\n';
  const auto back = io::read_results(buf);
  REQUIRE(back.size() == 1);
  CHECK(back[0].points == ids({1, 3}));
  CHECK(back[0].stats.dist_evals == s.dist_evals);
  CHECK(back[0].stats.width == 3);

  std::istringstream truncated(R"({"query_index": 0, "points": [1, 3], "st)");
  CHECK(error_of([&] { io::read_results(truncated, "r.jsonl"); }).starts_with("r.jsonl:1:"));
}

TEST_CASE("tree round trip is lossless") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto specs = random_specs(rng, 1 + trial % 2);
    auto pm = random_space(rng, specs, 1 + trial * 5);
    const auto m = Metric::all(pm);
    const auto t = build_greedy_tree(m, pm->all_points());
    const std::string text = io::tree_to_json(t).dump();
    const auto back = io::tree_from_json(json::parse(text), m);
    REQUIRE(io::tree_to_json(back).dump() == text);
    for (std::size_t i = 0; i < t.nodes().size(); ++i) {
      REQUIRE(back.node(static_cast<std::uint32_t>(i)).radius == t.node(static_cast<std::uint32_t>(i)).radius);
      REQUIRE(back.node(static_cast<std::uint32_t>(i)).center == t.node(static_cast<std::uint32_t>(i)).center);
    }
    REQUIRE(verify_greedy_tree(back, m).ok());
  }
}

TEST_CASE("tree documents are checked against the metric") {
  auto pm = desk();
  const auto t = build_greedy_tree(Metric::all(pm), pm->all_points());
  auto j = io::tree_to_json(t);
  CHECK_THROWS_AS(io::tree_from_json(j, Metric::single(pm, 0)), InputError);
  j["version"] = 7;
  CHECK_THROWS_AS(io::tree_from_json(j, Metric::all(pm)), InputError);
  auto k = io::tree_to_json(t);
  k["nodes"][1]["left"] = 99;
  CHECK_THROWS_AS(io::tree_from_json(k, Metric::all(pm)), InputError);
}

TEST_CASE("grt round trip") {
  std::mt19937_64 rng(22);
  const auto specs = random_specs(rng, 3);
  auto pm = random_space(rng, specs, 30);
  const auto g = build_grt(pm, pm->all_points());
  const std::string text = io::grt_to_json(g).dump();
  const std::vector<std::size_t> f{0, 1, 2};
  CHECK(io::grt_to_json(io::grt_from_json(json::parse(text), pm, f)).dump() == text);
}

TEST_CASE("index round trip answers queries identically") {
  auto pm = desk();
  for (auto s : {io::Structure::product_tree, io::Structure::grt}) {
    io::Index index;
    index.structure = s;
    index.factors = kDeskSpecs;
    index.space = pm;
    if (s == io::Structure::grt) {
      index.tree = build_grt(pm, pm->all_points());
    } else {
      index.tree = build_greedy_tree(Metric::all(pm), pm->all_points());
    }
    const auto back = io::index_from_json(json::parse(io::index_json(index).dump()));
    CHECK(back.structure == s);
    CHECK(io::index_json(back).dump() == io::index_json(index).dump());
    const ProductQuery q{pid(0), {2, 2}, 0};
    CHECK(back.query(q).points == ids({0, 1}));
  }
}

}  // TEST_SUITE
