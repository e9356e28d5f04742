#include <cmath>

#include "doctest.h"
#include "prodrange/oracle.hpp"
#include "support.hpp"

using namespace prodrange;
using namespace prodrange::testing;

TEST_SUITE("oracle") {

TEST_CASE("desk scan") {
  auto pm = desk();
  const auto pts = pm->all_points();
  const std::vector<double> r{2, 2};
  const auto s = exact_product_range(*pm, pts, pid(0), r);
  CHECK(s.points == ids({0, 1}));
  CHECK(s.dist_evals == std::vector<std::uint64_t>{5, 5});

  const auto sc = exact_product_range(*pm, pts, pid(0), r, true);
  CHECK(sc.points == ids({0, 1}));
  CHECK(sc.dist_evals[0] == 5);
  CHECK(sc.dist_evals[1] < 5);  // c and e fail on x

  CHECK(expanded_product_range(*pm, pts, pid(0), r, 0.5).points == ids({0, 1, 3}));
}

TEST_CASE("zero radii keep q and its duplicates") {
  auto pm = line({1, 4, 1, 7});
  const std::vector<double> zero{0};
  CHECK(exact_product_range(*pm, pm->all_points(), pid(0), zero).points == ids({0, 2}));
}

TEST_CASE("radii at least the diameter keep everything") {
  auto pm = desk();
  const std::vector<double> r{9, 9};
  CHECK(exact_product_range(*pm, pm->all_points(), pid(3), r).points == pm->all_points());
}

TEST_CASE("sandwich verdicts") {
  const auto inner = ids({1, 2});
  const auto outer = ids({1, 2, 5});
  CHECK(sandwich_check(ids({2, 1}), inner, outer).pass);
  CHECK(sandwich_check(ids({1, 2, 5}), inner, outer).pass);

  const auto missing = sandwich_check(ids({1}), inner, outer);
  CHECK_FALSE(missing.pass);
  CHECK(missing.missing == ids({2}));
  CHECK(missing.extra.empty());
}

TEST_CASE("a point just outside the expanded ball is extra") {
  const double r = 1.0, eps = 0.5;
  const double edge = (1.0 + eps) * r;
  auto pm = line({0, edge, std::nextafter(edge, 10.0)});
  const std::vector<double> radii{r};
  const auto pts = pm->all_points();
  const auto inner = exact_product_range(*pm, pts, pid(0), radii).points;
  const auto outer = expanded_product_range(*pm, pts, pid(0), radii, eps).points;
  CHECK(outer == ids({0, 1}));
  const auto v = sandwich_check(ids({0, 2}), inner, outer);
  CHECK_FALSE(v.pass);
  CHECK(v.extra == ids({2}));
}

TEST_CASE("exact set is inside the expanded set") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto specs = random_specs(rng, 1 + trial % 3);
    auto pm = random_space(rng, specs, 40);
    const auto q = random_query(rng, *pm, 0.25);
    const auto pts = pm->all_points();
    const auto inner = exact_product_range(*pm, pts, q.q, q.radii).points;
    const auto outer = expanded_product_range(*pm, pts, q.q, q.radii, q.epsilon).points;
    REQUIRE(std::includes(outer.begin(), outer.end(), inner.begin(), inner.end()));
  }
}

TEST_CASE("radius count must match") {
  auto pm = desk();
  const std::vector<double> r{1};
  CHECK_THROWS_AS(exact_product_range(*pm, pm->all_points(), pid(0), r), InputError);
}

}  // TEST_SUITE
