#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "perfora/analysis.hpp"
#include "perfora/grid.hpp"

using namespace perfora;

namespace {

PerforatedDomain pepper(double r = 0.25) {
  return PerforatedDomain::periodic(2, {1.0, 1.0}, HoleShape::ball(Point{0.0, 0.0}, r));
}

SolveConfig cfg24(double tol = 1e-9) {
  SolveConfig c;
  c.p = 2;
  c.q = 4;
  c.tol = tol;
  return c;
}

const ExperimentReport::Verdict& find_verdict(const ExperimentReport& rep,
                                              const std::string& name) {
  for (const auto& v : rep.verdicts) {
    if (v.name == name) return v;
  }
  REQUIRE(false);
  return rep.verdicts.front();
}

}  // namespace

TEST_CASE("mass lower bound formula") {
  // Direct arithmetic: 0.25^{1/4} = 2^{-1/2}.
  CHECK(std::abs(mass_lower_bound(0.25, 2.0) - 0.75 * (1.0 - std::pow(2.0, -0.5))) <
        1e-15);
  CHECK(mass_lower_bound(1e-16, 2.0) > 0.999);      // -> 1 as theta0 -> 0
  CHECK(mass_lower_bound(1.0 - 1e-12, 2.0) < 1e-11);  // -> 0 as theta0 -> 1
  CHECK_THROWS_AS(mass_lower_bound(0.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(mass_lower_bound(1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(mass_lower_bound(0.5, 1.0), std::invalid_argument);

  // Strictly decreasing in theta0, strictly increasing in p.
  double prev = 1.0;
  for (double th : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    double v = mass_lower_bound(th, 2.0);
    CHECK(v < prev);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    prev = v;
  }
  // Decreasing in p: theta0^{1/(2p)} -> 1 as p grows, shrinking the second
  // factor.
  prev = 1.0;
  for (double p : {1.5, 2.0, 3.0, 5.0}) {
    double v = mass_lower_bound(0.5, p);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("energy at infinity basics") {
  PerforatedDomain dom = pepper();
  SolveConfig c = cfg24();
  InfinityResult res = energy_at_infinity(dom, c, {0.0, 0.6, 1.0}, 2, 1.0 / 16);
  REQUIRE(res.table.size() == 3);
  // R = 0 entry equals the plain constant exactly (same grid, same solve).
  Grid g = discretize(dom, 2, 1.0 / 16);
  double lam = lambda_pq(g, c).lambda;
  CHECK(res.table[0].second == lam);
  // Monotone in R by inclusion, up to per-solve noise (~1e-7 relative).
  CHECK(res.table[1].second >= res.table[0].second - 1e-6 * lam);
  CHECK(res.table[2].second >= res.table[1].second - 1e-6 * lam);
  CHECK(res.estimate >= lam);

  CHECK_THROWS_AS(energy_at_infinity(dom, c, {5.0}, 2, 1.0 / 16),
                  std::invalid_argument);  // R exceeds the window
  CHECK_THROWS_AS(energy_at_infinity(dom, c, {}, 2, 1.0 / 16), std::invalid_argument);
}

TEST_CASE("existence test is inconclusive on the unmodified domain") {
  PerforatedDomain dom = pepper();
  ExperimentReport rep = existence_test(dom, 4.0, cfg24(), {0.0, 0.6, 1.5}, 3, 1.0 / 16);
  const auto& v = find_verdict(rep, "existence-certified");
  double lam = 0, combined = 0;
  for (const auto& [k, val] : rep.scalars) {
    if (k == "lambda") lam = val;
    if (k == "combined_tolerance") combined = val;
  }
  CHECK(lam > 0.0);
  CHECK(std::abs(v.margin) <= combined);  // margin ~ 0
  CHECK(!v.value);

  SolveConfig bad = cfg24();
  bad.p = 3;
  CHECK_THROWS_AS(existence_test(dom, 4.0, bad, {0.0}, 2, 1.0 / 16),
                  std::invalid_argument);
}

TEST_CASE("lieb ball search") {
  // Nearly hole-free domain: a tiny ball hole.
  PerforatedDomain sparse = pepper(0.0625);
  LiebBall b = lieb_ball_search(sparse, 1, 1.0 / 16, 0.9, {1.0, 0.75, 0.5});
  CHECK(b.radius == 1.0);  // largest listed radius fitting the window
  CHECK(b.fraction >= 0.95);

  PerforatedDomain dom = pepper();
  double prev = 1e9;
  for (double beta : {0.5, 0.95}) {
    LiebBall x = lieb_ball_search(dom, 1, 1.0 / 16, beta, {0.6, 0.45, 0.3});
    CHECK(x.fraction >= beta);
    CHECK(x.radius <= prev);  // non-increasing in beta
    prev = x.radius;
  }
  CHECK_THROWS_AS(lieb_ball_search(dom, 1, 1.0 / 16, 1.5, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(lieb_ball_search(dom, 1, 1.0 / 16, 0.5, {}), std::invalid_argument);
}

TEST_CASE("mazya sweep: pure dilation scales lambda by t^{-p}") {
  HoleShape k = HoleShape::ball(Point{0.0, 0.0}, 0.25);
  ExperimentReport rep = mazya_bound_sweep(k, 2.0, {{1.0, 1.0}, {2.0, 2.0}}, 1, 1.0 / 16);
  const auto& v = find_verdict(rep, "lower-bound-positive");
  CHECK(v.value);
  CHECK(v.margin > 0.0);
  // The c_emp table should be nearly constant: the grid dilates with t.
  const auto* c_table = &rep.tables.front().second;
  for (const auto& [name, rows] : rep.tables) {
    if (name == "c_emp") c_table = &rows;
  }
  REQUIRE(c_table->size() == 2);
  CHECK((*c_table)[0].second ==
        doctest::Approx((*c_table)[1].second).epsilon(0.02));
}

TEST_CASE("mazya sweep rejects zero-capacity holes") {
  // Single mask node: vanishing p-capacity for p <= N.
  int res = 64;
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(res) * res, 0);
  bits[static_cast<std::size_t>(res / 2) * res + res / 2] = 1;
  HoleShape point = HoleShape::mask(2, res, std::move(bits));
  CHECK_THROWS_AS(mazya_bound_sweep(point, 2.0, {{1.0, 1.0}}, 1, 1.0 / 16),
                  std::invalid_argument);
}

TEST_CASE("hole_modification parameter validation and the trivial branch") {
  CHECK_THROWS_AS(hole_modification_experiment(HoleModVariant::enlarged, 0.2, 0.25, 4.0, {1},
                                      1.0 / 16),
                  std::invalid_argument);  // R < r
  CHECK_THROWS_AS(hole_modification_experiment(HoleModVariant::shrunk, 0.3, 0.25, 4.0, {1},
                                      1.0 / 16),
                  std::invalid_argument);  // rho > r
  CHECK_THROWS_AS(hole_modification_experiment(HoleModVariant::enlarged, 0.6, 0.25, 4.0, {1},
                                      1.0 / 16),
                  std::invalid_argument);  // R >= 1/2

  // rho = r: no modification, equality is exact.
  ExperimentReport rep =
      hole_modification_experiment(HoleModVariant::enlarged, 0.25, 0.25, 4.0, {1}, 1.0 / 16);
  const auto& v = find_verdict(rep, "equality-all-windows");
  CHECK(v.value);
  CHECK(v.margin == 0.0);
}

TEST_CASE("shrunk hole localizes and certifies existence") {
  ExperimentReport rep =
      hole_modification_experiment(HoleModVariant::shrunk, 0.1, 0.25, 4.0, {2}, 1.0 / 16);
  CHECK(find_verdict(rep, "existence-certified").value);
  CHECK(find_verdict(rep, "localized-center-block").value);
}
