#pragma once

// File formats:
//   factor config  JSON array   [{"name": "x", "kind": "abs1d|l2|l1|levenshtein", "dim": 2}, ...]
//   dataset        JSON Lines   {"id": 0, "coords": {"x": 1.5, "pos": [0.1, 0.2], "tag": "acgt"}}
//   workload       JSON Lines   {"q": <id or coords object>, "radii": [r1, ..], "epsilon": e}
//   results        JSON Lines   {"query_index": i, "points": [ids], "stats": {...}}
//   index          JSON         dataset + factor config + serialized structure

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "prodrange/greedy_tree.hpp"
#include "prodrange/range_tree.hpp"
#include "prodrange/search.hpp"

namespace prodrange::io {

using nlohmann::json;

std::vector<FactorSpec> parse_factor_config(const json& j);
json factor_config_json(std::span<const FactorSpec> factors);
std::vector<FactorSpec> load_factor_config(const std::filesystem::path& path);

Coord parse_coord(const json& j, const FactorSpec& spec);
json coord_json(const Coord& c);
json coords_json(const ProductMetric& pm, PointId x);
std::vector<Coord> parse_coords(const json& j, std::span<const FactorSpec> factors);

/// Reads a dataset; ids must be exactly 0..n-1 in any order. Errors carry
/// "<source>:<line>:".
std::shared_ptr<const ProductMetric> read_dataset(std::istream& in, std::span<const FactorSpec> factors,
                                                  const std::string& source = "dataset");
std::shared_ptr<const ProductMetric> load_dataset(const std::filesystem::path& path,
                                                  std::span<const FactorSpec> factors);
void write_dataset(std::ostream& out, const ProductMetric& pm);

/// `epsilon_default` fills in lines that omit "epsilon".
std::vector<ProductQuery> read_workload(std::istream& in, const ProductMetric& pm,
                                        std::optional<double> epsilon_default = std::nullopt,
                                        const std::string& source = "workload");
std::vector<ProductQuery> load_workload(const std::filesystem::path& path, const ProductMetric& pm,
                                        std::optional<double> epsilon_default = std::nullopt);
json query_json(const ProductQuery& query, const ProductMetric& pm);

struct ResultRecord {
  std::size_t query_index = 0;
  std::vector<PointId> points;
  SearchStats stats;
};

json result_json(const ResultRecord& r);
std::vector<ResultRecord> read_results(std::istream& in, const std::string& source = "results");
std::vector<ResultRecord> load_results(const std::filesystem::path& path);

json tree_to_json(const GreedyTree& t);
GreedyTree tree_from_json(const json& j, const Metric& metric);

/// With one level this is exactly tree_to_json(primary).
json grt_to_json(const GreedyRangeTree& g);
GreedyRangeTree grt_from_json(const json& j, const std::shared_ptr<const ProductMetric>& space,
                              std::span<const std::size_t> factors);

enum class Structure { product_tree, grt };
Structure parse_structure(std::string_view text);
std::string_view to_string(Structure s);

struct Index {
  Structure structure = Structure::product_tree;
  std::vector<FactorSpec> factors;
  std::shared_ptr<const ProductMetric> space;
  std::variant<GreedyTree, GreedyRangeTree> tree;

  RangeResult query(const ProductQuery& q) const;
};

json index_json(const Index& index);
Index index_from_json(const json& j);
Index load_index(const std::filesystem::path& path);

}  // namespace prodrange::io
