#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "prodrange/metric.hpp"
#include "prodrange/search.hpp"

namespace prodrange {

enum class Generator {
  uniform,    // unit cube; random strings over "acgt"
  clustered,  // Gaussian blobs; edited copies of a few base strings
  grid,       // distinct integer lattice points, so spacing >= 1 and extent bounds the spread
};

Generator parse_generator(std::string_view text);
std::string_view to_string(Generator g);

struct GeneratorOptions {
  Generator kind = Generator::uniform;
  std::uint64_t seed = 1;
  std::size_t clusters = 8;
  double cluster_sigma = 0.05;
  std::uint32_t grid_extent = 64;  // lattice side length per axis
};

/// One column per factor; factors draw from independent streams.
std::vector<std::vector<Coord>> generate_columns(std::span<const FactorSpec> factors, std::size_t n,
                                                 const GeneratorOptions& options);

std::shared_ptr<const ProductMetric> make_product(std::span<const FactorSpec> factors,
                                                  const std::vector<std::vector<Coord>>& columns);

std::shared_ptr<const ProductMetric> generate_dataset(std::span<const FactorSpec> factors, std::size_t n,
                                                      const GeneratorOptions& options);

struct WorkloadOptions {
  std::uint64_t seed = 1;
  double radius = 0.1;  // smallest per-factor radius
  double aspect = 1;    // largest / smallest radius
  double epsilon = 0.5;
};

/// Queries centered on random dataset points. Radii grow geometrically from
/// `radius` on the first factor to `radius * aspect` on the last.
std::vector<ProductQuery> generate_workload(const ProductMetric& pm, std::size_t count,
                                            const WorkloadOptions& options);

}  // namespace prodrange
