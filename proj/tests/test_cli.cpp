#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "prodrange/io.hpp"
#include "prodrange/oracle.hpp"
#include "support.hpp"

using namespace prodrange;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kBin = PRODRANGE_CLI;
const fs::path kData = PRODRANGE_TEST_DATA;

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Sandbox {
 public:
  Sandbox() {
    static int counter = 0;
    dir_ = fs::temp_directory_path() / ("prodrange_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(dir_);
  }
  ~Sandbox() { fs::remove_all(dir_); }

  fs::path operator/(const std::string& name) const { return dir_ / name; }

  Run run(const std::string& args) const {
    const auto out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = kBin + " " + args + " > " + out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

 private:
  fs::path dir_;
};

std::string data(const std::string& name) { return (kData / name).string(); }

std::string desk_build(const Sandbox& box, const std::string& structure, const std::string& out) {
  const auto r = box.run("build --data " + data("desk.jsonl") + " --factors " + data("desk_factors.json") +
                         " --structure " + structure + " --out " + (box / out).string() + " --no-timings");
  REQUIRE(r.code == 0);
  return r.out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

/// Column `name` of the rows whose structure column equals `structure`.
std::vector<double> column(const std::vector<std::vector<std::string>>& csv, const std::string& structure,
                           const std::string& name) {
  const auto& header = csv.front();
  const auto col = static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  REQUIRE(col < header.size());
  std::vector<double> out;
  for (std::size_t i = 1; i < csv.size(); ++i)
    if (csv[i][0] == structure) out.push_back(std::stod(csv[i][col]));
  return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("build reports n and m for the desk dataset") {
  Sandbox box;
  const auto report = json::parse(desk_build(box, "product-tree", "pt.json"));
  CHECK(report["n"] == 5);
  CHECK(report["m"] == 2);
  CHECK(report["factors"][0]["spread"] == 9.0);
  CHECK(report["factors"][1]["spread"] == "inf");
}

TEST_CASE("grt with one factor serializes the same tree as the product tree") {
  Sandbox box;
  for (const std::string s : {"grt", "product-tree"}) {
    const auto r = box.run("build --data " + data("desk.jsonl") + " --factors " + data("desk_x_only.json") +
                           " --structure " + s + " --out " + (box / (s + ".json")).string());
    REQUIRE(r.code == 0);
  }
  const auto a = json::parse(slurp(box / "grt.json"));
  const auto b = json::parse(slurp(box / "product-tree.json"));
  CHECK(a["tree"].dump() == b["tree"].dump());
}

TEST_CASE("empty dataset is rejected") {
  Sandbox box;
  const auto r = box.run("build --data " + data("empty.jsonl") + " --factors " + data("desk_factors.json") +
                         " --out " + (box / "e.json").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("n ≥ 1 required") != std::string::npos);
}

TEST_CASE("malformed dataset lines are reported with line numbers") {
  Sandbox box;
  std::ofstream(box / "bad.jsonl") << "{\"id\": 0, \"coords\": {\"x\": 0, \"y\": 0}}\n{\"id\": 1, \"coords\": {\"x\": 0}}\n";
  const auto r = box.run("build --data " + (box / "bad.jsonl").string() + " --factors " + data("desk_factors.json") +
                         " --out " + (box / "e.json").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("bad.jsonl:2:") != std::string::npos);
}

TEST_CASE("desk workload through both structures passes verify") {
  Sandbox box;
  for (const std::string s : {"grt", "product-tree"}) {
    desk_build(box, s, s + ".json");
    const auto q = box.run("query --index " + (box / (s + ".json")).string() + " --workload " +
                           data("desk_workload.jsonl") + " --epsilon-default 0.1 --out " +
                           (box / (s + ".results")).string());
    REQUIRE(q.code == 0);
    const auto v = box.run("verify --data " + data("desk.jsonl") + " --factors " + data("desk_factors.json") +
                           " --workload " + data("desk_workload.jsonl") + " --epsilon-default 0.1 --results " +
                           (box / (s + ".results")).string());
    CHECK(v.code == 0);
    CHECK(v.out == "all 5 queries pass\n");
  }
}

TEST_CASE("epsilon 0 results equal the oracle") {
  Sandbox box;
  desk_build(box, "product-tree", "pt.json");
  std::ofstream(box / "w.jsonl") << "{\"q\": 0, \"radii\": [2, 2], \"epsilon\": 0}\n"
                                    "{\"q\": {\"x\": 4, \"y\": 1}, \"radii\": [5, 1], \"epsilon\": 0}\n"
                                    "{\"q\": 2, \"radii\": [4, 4], \"epsilon\": 0}\n";
  REQUIRE(box.run("query --index " + (box / "pt.json").string() + " --workload " + (box / "w.jsonl").string() +
                  " --out " + (box / "r.jsonl").string())
              .code == 0);

  const std::vector<FactorSpec> specs{{"x", MetricKind::abs1d, 1}, {"y", MetricKind::abs1d, 1}};
  auto pm = io::load_dataset(data("desk.jsonl"), specs);
  const auto queries = io::load_workload(box / "w.jsonl", *pm);
  const auto results = io::load_results(box / "r.jsonl");
  REQUIRE(results.size() == queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto oracle = exact_product_range(*pm, pm->all_points(), queries[i].q, queries[i].radii).points;
    json a = json::array(), b = json::array();
    for (auto p : oracle) a.push_back(p.index);
    for (auto p : results[i].points) b.push_back(p.index);
    CHECK(a.dump() == b.dump());
  }
}

TEST_CASE("mismatched factor count in a workload") {
  Sandbox box;
  desk_build(box, "grt", "g.json");
  std::ofstream(box / "w.jsonl") << "{\"q\": 0, \"radii\": [2], \"epsilon\": 0}\n";
  const auto r = box.run("query --index " + (box / "g.json").string() + " --workload " + (box / "w.jsonl").string() +
                         " --out " + (box / "r.jsonl").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("w.jsonl:1:") != std::string::npos);
}

TEST_CASE("verify catches a planted extra point and truncated files") {
  Sandbox box;
  desk_build(box, "product-tree", "pt.json");
  std::ofstream(box / "w.jsonl") << "{\"q\": 0, \"radii\": [2, 2], \"epsilon\": 0}\n"
                                    "{\"q\": 2, \"radii\": [1, 1], \"epsilon\": 0}\n";
  REQUIRE(box.run("query --index " + (box / "pt.json").string() + " --workload " + (box / "w.jsonl").string() +
                  " --out " + (box / "r.jsonl").string())
              .code == 0);
  const std::string verify = "verify --data " + data("desk.jsonl") + " --factors " + data("desk_factors.json") +
                             " --workload " + (box / "w.jsonl").string() + " --results ";
  CHECK(box.run(verify + (box / "r.jsonl").string()).code == 0);

  // Query 1 is exactly {c}; add e.
  std::string text = slurp(box / "r.jsonl");
  const auto pos = text.find("\"points\":[2]");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 12, "\"points\":[2,4]");
  std::ofstream(box / "planted.jsonl") << text;
  const auto planted = box.run(verify + (box / "planted.jsonl").string());
  CHECK(planted.code == 1);
  CHECK(planted.out.find("query 1 FAIL extra=[4]") != std::string::npos);

  const std::string full = slurp(box / "r.jsonl");
  std::ofstream(box / "cut.jsonl") << full.substr(0, full.size() - 15);
  const auto cut = box.run(verify + (box / "cut.jsonl").string());
  CHECK(cut.code == 2);
  CHECK(cut.err.find("cut.jsonl:2:") != std::string::npos);

  std::ofstream(box / "short.jsonl") << full.substr(0, full.find('\n') + 1);
  CHECK(box.run(verify + (box / "short.jsonl").string()).code == 2);
}

TEST_CASE("stats reports per-level sizes") {
  Sandbox box;
  desk_build(box, "grt", "g.json");
  const auto r = box.run("stats --index " + (box / "g.json").string());
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["levels"].size() == 2);
  CHECK(j["levels"][0]["leaves"] == 5);
  CHECK(j["aux_leaves"] == j["levels"][1]["leaves"]);
}

TEST_CASE("reports are deterministic and thread count does not change results") {
  Sandbox box;
  const std::string bench = "bench --sweep epsilon --n 300 --queries 20 --seed 4 --no-timings --out ";
  REQUIRE(box.run(bench + (box / "a.csv").string()).code == 0);
  REQUIRE(box.run(bench + (box / "b.csv").string() + " --threads 3").code == 0);
  CHECK(slurp(box / "a.csv") == slurp(box / "b.csv"));

  REQUIRE(box.run("generate --factors " + data("desk_factors.json") + " --n 200 --seed 9 --out " +
                  (box / "d.jsonl").string() + " --workload-out " + (box / "w.jsonl").string() +
                  " --queries 30 --radius 0.2 --aspect 2")
              .code == 0);
  const std::string build = "build --data " + (box / "d.jsonl").string() + " --factors " + data("desk_factors.json") +
                            " --structure grt --no-timings --out ";
  const auto b1 = box.run(build + (box / "i1.json").string());
  const auto b2 = box.run(build + (box / "i2.json").string() + " --merge rebuild");
  REQUIRE(b1.code == 0);
  REQUIRE(b2.code == 0);
  CHECK(slurp(box / "i1.json") == slurp(box / "i2.json"));

  const std::string query = "query --index " + (box / "i1.json").string() + " --workload " +
                            (box / "w.jsonl").string() + " --no-timings --out ";
  REQUIRE(box.run(query + (box / "r1.jsonl").string()).code == 0);
  REQUIRE(box.run(query + (box / "r4.jsonl").string() + " --threads 4").code == 0);
  CHECK(slurp(box / "r1.jsonl") == slurp(box / "r4.jsonl"));
}

TEST_CASE("bench trends") {
  Sandbox box;
  SUBCASE("width is nonincreasing in epsilon") {
    REQUIRE(box.run("bench --sweep epsilon --values 0.1,0.25,0.5,1.0 --n 1024 --queries 100 --no-timings --out " +
                    (box / "eps.csv").string())
                .code == 0);
    const auto csv = read_csv(box / "eps.csv");
    for (const std::string s : {"product-tree", "grt"}) {
      const auto w = column(csv, s, "width_max");
      REQUIRE(w.size() == 4);
      for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] <= w[i - 1]);
    }
  }
  SUBCASE("width grows sublinearly in n") {
    REQUIRE(box.run("bench --sweep n --values 128,256,512,1024 --epsilon 0.5 --queries 100 --no-timings --out " +
                    (box / "n.csv").string())
                .code == 0);
    const auto csv = read_csv(box / "n.csv");
    for (const std::string s : {"product-tree", "grt"}) {
      const auto w = column(csv, s, "width_max");
      REQUIRE(w.size() == 4);
      CHECK(w[3] / w[0] < 1024.0 / 128.0);
    }
  }
  SUBCASE("width is nondecreasing in the aspect ratio on the product tree") {
    REQUIRE(box.run("bench --sweep aspect-ratio --values 1,2,4 --structure product-tree --n 1024 --queries 100 "
                    "--no-timings --out " +
                    (box / "a.csv").string())
                .code == 0);
    const auto w = column(read_csv(box / "a.csv"), "product-tree", "width_max");
    REQUIRE(w.size() == 3);
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] >= w[i - 1]);
  }
}

TEST_CASE("usage errors exit with 2") {
  Sandbox box;
  CHECK(box.run("").code == 2);
  CHECK(box.run("build --data x").code == 2);
  CHECK(box.run("query --index /nonexistent.json --workload x --out y").code == 2);
  CHECK(box.run("--help").code == 0);
}

}  // TEST_SUITE
