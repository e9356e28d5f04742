#include "prodrange/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "prodrange/generate.hpp"

namespace prodrange::io {

namespace {

constexpr int kVersion = 1;

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

json parse_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r\n") == std::string::npos; }

// Runs `fn` and prefixes any InputError / json error with "<source>:<line>: ".
template <typename Fn>
auto at_line(const std::string& source, std::size_t line, Fn&& fn) {
  const std::string where = source + ":" + std::to_string(line) + ": ";
  try {
    return fn();
  } catch (const InputError& e) {
    throw InputError(where + e.what());
  } catch (const ConfigError& e) {
    throw InputError(where + e.what());
  } catch (const json::exception& e) {
    throw InputError(where + e.what());
  }
}

// Calls fn(json, line_number) for every non-blank line.
template <typename Fn>
void for_each_line(std::istream& in, const std::string& source, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    at_line(source, lineno, [&] {
      fn(json::parse(line), lineno);
      return 0;
    });
  }
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::uint32_t parse_id(const json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 0 || j.get<long long>() > 0xFFFFFFFFLL)
    throw InputError(std::string(what) + " must be a nonnegative integer");
  return static_cast<std::uint32_t>(j.get<long long>());
}

double parse_number(const json& j, const char* what) {
  if (!j.is_number()) throw InputError(std::string(what) + " must be a number");
  return j.get<double>();
}

void check_header(const json& j, const char* format) {
  if (!j.is_object() || j.value("format", "") != format)
    throw InputError(std::string("expected a '") + format + "' document");
  if (j.value("version", 0) != kVersion)
    throw InputError(std::string("unsupported ") + format + " version " + j.value("version", json()).dump());
}

}  // namespace

std::vector<FactorSpec> parse_factor_config(const json& j) {
  if (!j.is_array()) throw InputError("factor config must be a JSON array");
  if (j.empty()) throw ConfigError("factor config needs at least one factor");
  std::vector<FactorSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    const std::string where = "factor " + std::to_string(i) + ": ";
    if (!e.is_object() || !e.contains("name") || !e["name"].is_string() || !e.contains("kind") || !e["kind"].is_string())
      throw InputError(where + "needs string fields 'name' and 'kind'");
    FactorSpec spec;
    spec.name = e["name"].get<std::string>();
    spec.kind = parse_metric_kind(e["kind"].get<std::string>());
    if (spec.kind == MetricKind::l1 || spec.kind == MetricKind::l2) {
      if (!e.contains("dim") || !e["dim"].is_number_integer() || e["dim"].get<long long>() < 1)
        throw InputError(where + "'" + spec.name + "' needs a positive integer 'dim'");
      spec.dim = e["dim"].get<std::size_t>();
    }
    for (const auto& prev : out)
      if (prev.name == spec.name) throw InputError(where + "duplicate factor name '" + spec.name + "'");
    out.push_back(std::move(spec));
  }
  return out;
}

json factor_config_json(std::span<const FactorSpec> factors) {
  json out = json::array();
  for (const auto& f : factors) {
    json e = {{"name", f.name}, {"kind", std::string(to_string(f.kind))}};
    if (f.kind == MetricKind::l1 || f.kind == MetricKind::l2) e["dim"] = f.dim;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<FactorSpec> load_factor_config(const std::filesystem::path& path) {
  try {
    return parse_factor_config(parse_file(path));
  } catch (const ConfigError& e) {
    throw InputError(path.string() + ": " + e.what());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

Coord parse_coord(const json& j, const FactorSpec& spec) {
  Coord c;
  if (j.is_number()) {
    c = j.get<double>();
  } else if (j.is_string()) {
    c = j.get<std::string>();
  } else if (j.is_array()) {
    std::vector<double> v;
    for (const auto& x : j) v.push_back(parse_number(x, "coordinate"));
    c = std::move(v);
  } else {
    throw InputError("factor '" + spec.name + "': unsupported coordinate " + j.dump());
  }
  validate_coord(spec, c);
  return c;
}

json coord_json(const Coord& c) {
  return std::visit([](const auto& v) { return json(v); }, c);
}

json coords_json(const ProductMetric& pm, PointId x) {
  json out = json::object();
  for (const auto& f : pm.factors()) out[f.name()] = coord_json(f.coord(x));
  return out;
}

std::vector<Coord> parse_coords(const json& j, std::span<const FactorSpec> factors) {
  if (!j.is_object()) throw InputError("coords must be an object keyed by factor name");
  std::vector<Coord> out;
  for (const auto& f : factors) {
    if (!j.contains(f.name)) throw InputError("missing coordinate for factor '" + f.name + "'");
    out.push_back(parse_coord(j[f.name], f));
  }
  return out;
}

std::shared_ptr<const ProductMetric> read_dataset(std::istream& in, std::span<const FactorSpec> factors,
                                                  const std::string& source) {
  struct Record {
    std::uint32_t id;
    std::vector<Coord> coords;
    std::size_t line;
  };
  std::vector<Record> records;
  for_each_line(in, source, [&](const json& j, std::size_t line) {
    const auto id = parse_id(field(j, "id"), "id");
    records.push_back({id, parse_coords(field(j, "coords"), factors), line});
  });
  if (records.empty()) throw InputError(source + ": empty dataset, n ≥ 1 required");

  const std::size_t n = records.size();
  std::vector<std::vector<Coord>> columns(factors.size(), std::vector<Coord>(n));
  std::vector<bool> seen(n, false);
  for (auto& r : records) {
    const std::string where = source + ":" + std::to_string(r.line) + ": ";
    if (r.id >= n) throw InputError(where + "id " + std::to_string(r.id) + " out of range; ids must be 0.." + std::to_string(n - 1));
    if (seen[r.id]) throw InputError(where + "duplicate id " + std::to_string(r.id));
    seen[r.id] = true;
    for (std::size_t f = 0; f < factors.size(); ++f) columns[f][r.id] = std::move(r.coords[f]);
  }
  return make_product(factors, columns);
}

std::shared_ptr<const ProductMetric> load_dataset(const std::filesystem::path& path,
                                                  std::span<const FactorSpec> factors) {
  auto in = open_in(path);
  return read_dataset(in, factors, path.string());
}

void write_dataset(std::ostream& out, const ProductMetric& pm) {
  for (PointId x : pm.all_points()) out << json{{"id", x.index}, {"coords", coords_json(pm, x)}}.dump() << '\n';
}

std::vector<ProductQuery> read_workload(std::istream& in, const ProductMetric& pm, std::optional<double> epsilon_default,
                                        const std::string& source) {
  std::vector<FactorSpec> specs;
  for (const auto& f : pm.factors()) specs.push_back(f.spec());
  std::vector<ProductQuery> out;
  for_each_line(in, source, [&](const json& j, std::size_t) {
    const auto& q = field(j, "q");
    ProductQuery query{q.is_number() ? Location(PointId{parse_id(q, "q")}) : Location(parse_coords(q, specs)), {}, 0};
    const auto& radii = field(j, "radii");
    if (!radii.is_array()) throw InputError("radii must be an array");
    for (const auto& r : radii) query.radii.push_back(parse_number(r, "radius"));
    if (j.contains("epsilon")) {
      query.epsilon = parse_number(j["epsilon"], "epsilon");
    } else if (epsilon_default) {
      query.epsilon = *epsilon_default;
    } else {
      throw InputError("missing field 'epsilon' and no default given");
    }
    query.validate(pm.factor_count());
    query.q.check(pm);
    out.push_back(std::move(query));
  });
  return out;
}

std::vector<ProductQuery> load_workload(const std::filesystem::path& path, const ProductMetric& pm,
                                        std::optional<double> epsilon_default) {
  auto in = open_in(path);
  return read_workload(in, pm, epsilon_default, path.string());
}

json query_json(const ProductQuery& query, const ProductMetric& pm) {
  json q;
  if (query.q.is_point()) {
    q = query.q.point().index;
  } else {
    q = json::object();
    for (std::size_t f = 0; f < pm.factor_count(); ++f) q[pm.factor(f).name()] = coord_json(query.q.coords()[f]);
  }
  return {{"q", q}, {"radii", query.radii}, {"epsilon", query.epsilon}};
}

json result_json(const ResultRecord& r) {
  json pts = json::array();
  for (auto p : r.points) pts.push_back(p.index);
  return {{"query_index", r.query_index},
          {"points", std::move(pts)},
          {"stats",
           {{"width", r.stats.width},
            {"height", r.stats.height},
            {"splits", r.stats.splits},
            {"dist_evals", r.stats.dist_evals},
            {"k", r.stats.output_size}}}};
}

std::vector<ResultRecord> read_results(std::istream& in, const std::string& source) {
  std::vector<ResultRecord> out;
  for_each_line(in, source, [&](const json& j, std::size_t) {
    ResultRecord r;
    r.query_index = parse_id(field(j, "query_index"), "query_index");
    const auto& pts = field(j, "points");
    if (!pts.is_array()) throw InputError("points must be an array");
    for (const auto& p : pts) r.points.push_back(PointId{parse_id(p, "point id")});
    if (j.contains("stats")) {
      const auto& s = j["stats"];
      r.stats.width = s.value("width", std::size_t{0});
      r.stats.height = s.value("height", std::size_t{0});
      r.stats.splits = s.value("splits", std::size_t{0});
      r.stats.output_size = s.value("k", std::size_t{0});
      r.stats.dist_evals = s.value("dist_evals", std::vector<std::uint64_t>{});
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<ResultRecord> load_results(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_results(in, path.string());
}

json tree_to_json(const GreedyTree& t) {
  json out = {{"format", "greedy-tree"}, {"version", kVersion}, {"n", t.size()}};
  json names = json::array();
  if (t.metric())
    for (auto f : t.metric()->factors()) names.push_back(t.metric()->space().factor(f).name());
  out["factors"] = std::move(names);

  const auto& gp = t.permutation();
  json order = json::array(), parent = json::array(), radius = json::array();
  for (std::size_t r = 0; r < gp.size(); ++r) {
    order.push_back(gp.order[r].index);
    if (r == 0) continue;
    parent.push_back(gp.parent[r].index);
    radius.push_back(gp.insertion_radius[r]);
  }
  out["order"] = std::move(order);
  out["parent"] = std::move(parent);
  out["insertion_radius"] = std::move(radius);

  json nodes = json::array();
  for (const auto& v : t.nodes()) {
    json e = {{"center", v.center.index}, {"radius", v.radius}};
    if (!v.is_leaf()) {
      e["left"] = v.left;
      e["right"] = v.right;
    }
    nodes.push_back(std::move(e));
  }
  out["nodes"] = std::move(nodes);
  return out;
}

GreedyTree tree_from_json(const json& j, const Metric& metric) {
  check_header(j, "greedy-tree");
  const auto& names = field(j, "factors");
  if (!names.is_array() || names.size() != metric.arity())
    throw InputError("tree factor list does not match the metric");
  for (std::size_t i = 0; i < metric.arity(); ++i) {
    if (!names[i].is_string() || names[i].get<std::string>() != metric.space().factor(metric.factors()[i]).name())
      throw InputError("tree factor list does not match the metric");
  }

  const auto& order = field(j, "order");
  const auto& parent = field(j, "parent");
  const auto& radius = field(j, "insertion_radius");
  if (!order.is_array() || !parent.is_array() || !radius.is_array()) throw InputError("malformed permutation");
  if (order.empty()) return GreedyTree{};
  if (parent.size() + 1 != order.size() || radius.size() + 1 != order.size())
    throw InputError("permutation arrays have inconsistent lengths");

  GreedyPermutation gp;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const PointId p{parse_id(order[r], "order entry")};
    if (p.index >= metric.space().size()) throw InputError("tree point " + std::to_string(p.index) + " out of range");
    gp.order.push_back(p);
    gp.parent.push_back(r == 0 ? p : PointId{parse_id(parent[r - 1], "parent entry")});
    gp.insertion_radius.push_back(r == 0 ? std::numeric_limits<double>::infinity()
                                         : parse_number(radius[r - 1], "insertion radius"));
  }

  const auto& jn = field(j, "nodes");
  if (!jn.is_array()) throw InputError("nodes must be an array");
  std::vector<GreedyTree::Node> nodes;
  nodes.reserve(jn.size());
  for (const auto& e : jn) {
    GreedyTree::Node v;
    v.center = PointId{parse_id(field(e, "center"), "center")};
    v.radius = parse_number(field(e, "radius"), "radius");
    if (e.contains("left")) v.left = parse_id(e["left"], "left");
    if (e.contains("right")) v.right = parse_id(e["right"], "right");
    nodes.push_back(v);
  }
  return GreedyTree::assemble(metric, std::move(gp), std::move(nodes));
}

json grt_to_json(const GreedyRangeTree& g) {
  if (g.is_base()) return tree_to_json(g.primary());
  json primary = tree_to_json(g.primary());
  json aux = json::array();
  for (std::size_t i = 0; i < g.aux().size(); ++i) {
    primary["nodes"][i]["aux"] = i;
    aux.push_back(grt_to_json(g.aux()[i]));
  }
  return {{"format", "greedy-range-tree"}, {"version", kVersion}, {"primary", std::move(primary)}, {"aux", std::move(aux)}};
}

GreedyRangeTree grt_from_json(const json& j, const std::shared_ptr<const ProductMetric>& space,
                              std::span<const std::size_t> factors) {
  if (factors.empty()) throw ConfigError("a greedy range tree needs m >= 1 factors");
  const Metric primary_metric = Metric::single(space, factors.front());
  if (factors.size() == 1) return GreedyRangeTree(tree_from_json(j, primary_metric), {});

  check_header(j, "greedy-range-tree");
  GreedyTree primary = tree_from_json(field(j, "primary"), primary_metric);
  const auto& jaux = field(j, "aux");
  if (!jaux.is_array() || jaux.size() != primary.nodes().size())
    throw InputError("greedy range tree needs one auxiliary per primary node");
  const auto& jnodes = j["primary"]["nodes"];
  std::vector<GreedyRangeTree> aux;
  aux.reserve(jaux.size());
  for (std::size_t i = 0; i < jaux.size(); ++i) {
    if (!jnodes[i].contains("aux") || parse_id(jnodes[i]["aux"], "aux") != i)
      throw InputError("primary node " + std::to_string(i) + " has a bad auxiliary reference");
    aux.push_back(grt_from_json(jaux[i], space, factors.subspan(1)));
  }
  return GreedyRangeTree(std::move(primary), std::move(aux));
}

Structure parse_structure(std::string_view text) {
  if (text == "product-tree") return Structure::product_tree;
  if (text == "grt") return Structure::grt;
  throw InputError("unknown structure '" + std::string(text) + "' (expected grt or product-tree)");
}

std::string_view to_string(Structure s) { return s == Structure::grt ? "grt" : "product-tree"; }

RangeResult Index::query(const ProductQuery& q) const {
  if (const auto* t = std::get_if<GreedyTree>(&tree)) {
    q.validate(space->factor_count());
    return product_range_query(*t, q);
  }
  return grt_query(std::get<GreedyRangeTree>(tree), q);
}

json index_json(const Index& index) {
  json points = json::array();
  for (PointId x : index.space->all_points()) points.push_back({{"id", x.index}, {"coords", coords_json(*index.space, x)}});
  json tree = std::holds_alternative<GreedyTree>(index.tree) ? tree_to_json(std::get<GreedyTree>(index.tree))
                                                             : grt_to_json(std::get<GreedyRangeTree>(index.tree));
  return {{"format", "prodrange-index"},
          {"version", kVersion},
          {"structure", std::string(to_string(index.structure))},
          {"factors", factor_config_json(index.factors)},
          {"points", std::move(points)},
          {"tree", std::move(tree)}};
}

Index index_from_json(const json& j) {
  check_header(j, "prodrange-index");
  Index index;
  index.structure = parse_structure(field(j, "structure").get<std::string>());
  index.factors = parse_factor_config(field(j, "factors"));

  std::ostringstream lines;
  const auto& points = field(j, "points");
  if (!points.is_array()) throw InputError("points must be an array");
  for (const auto& p : points) lines << p.dump() << '\n';
  std::istringstream in(lines.str());
  index.space = read_dataset(in, index.factors, "index points");

  std::vector<std::size_t> all(index.factors.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  if (index.structure == Structure::product_tree) {
    index.tree = tree_from_json(field(j, "tree"), Metric(index.space, all));
  } else {
    index.tree = grt_from_json(field(j, "tree"), index.space, all);
  }
  return index;
}

Index load_index(const std::filesystem::path& path) {
  const json j = parse_file(path);
  try {
    return index_from_json(j);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw InputError(path.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace prodrange::io
