#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "perfora/geometry.hpp"
#include "perfora/grid.hpp"
#include "perfora/kernels.hpp"
#include "perfora/solver.hpp"

using namespace perfora;

namespace {

PerforatedDomain pepper(double r = 0.25) {
  return PerforatedDomain::periodic(2, {1.0, 1.0}, HoleShape::ball(Point{0.0, 0.0}, r));
}

Grid unit_square(double h) {
  std::vector<double> lo{0, 0}, hi{1, 1};
  return make_grid(lo, hi, h, [](std::span<const double>) { return true; });
}

// First positive zero of the Bessel function J_0, by bisection.
double bessel_j0_first_zero() {
  double lo = 2.0, hi = 3.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (std::cyl_bessel_j(0.0, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SolveConfig cfg22() {
  SolveConfig c;
  c.p = 2;
  c.q = 2;
  c.tol = 1e-10;
  return c;
}

}  // namespace

TEST_CASE("unit square eigenvalue") {
  SolveReport rep = lambda_pq(unit_square(1.0 / 64), cfg22());
  CHECK(rep.converged);
  CHECK(rep.lambda == doctest::Approx(2.0 * M_PI * M_PI).epsilon(0.02));
}

TEST_CASE("unit disk eigenvalue against the Bessel oracle") {
  double j01 = bessel_j0_first_zero();
  std::vector<double> lo{-1, -1}, hi{1, 1};
  Grid g = make_grid(lo, hi, 1.0 / 64, [](std::span<const double> x) {
    return x[0] * x[0] + x[1] * x[1] < 1.0;
  });
  SolveReport rep = lambda_pq(g, cfg22());
  CHECK(rep.lambda == doctest::Approx(j01 * j01).epsilon(0.03));
}

TEST_CASE("report invariants") {
  Grid g = discretize(pepper(), 1, 1.0 / 16);
  SolveConfig c;
  c.p = 2;
  c.q = 4;
  c.tol = 1e-9;
  SolveReport rep = lambda_pq(g, c);
  CHECK(rep.converged);
  for (double v : rep.extremal.values) CHECK(v >= 0.0);
  CHECK(lq_norm(g, rep.extremal.values, 4.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.lambda ==
        doctest::Approx(dirichlet_energy(g, rep.extremal.values, 2.0, 0.0))
            .epsilon(1e-12));
  for (std::size_t i = 1; i < rep.energy_history.size(); ++i) {
    CHECK(rep.energy_history[i] <= rep.energy_history[i - 1] + 1e-14);
  }
  CHECK(rep.sup_norm > 0.0);
  REQUIRE(!rep.level_set_table.empty());
  // Level sets shrink as the threshold grows.
  for (std::size_t i = 1; i < rep.level_set_table.size(); ++i) {
    CHECK(rep.level_set_table[i].second <= rep.level_set_table[i - 1].second);
  }
}

TEST_CASE("translation invariance across periods") {
  PerforatedDomain dom = pepper();
  SolveConfig c;
  c.p = 2;
  c.q = 4;
  c.tol = 1e-9;
  Grid g0 = discretize(dom, 1, 1.0 / 16);
  std::vector<long long> shift{2, -1};
  Grid g1 = discretize(dom, 1, 1.0 / 16, shift);
  double a = lambda_pq(g0, c).lambda;
  double b = lambda_pq(g1, c).lambda;
  CHECK(std::abs(a - b) / a < 1e-10);
}

TEST_CASE("window-inclusion monotonicity") {
  SolveConfig c;
  c.p = 2;
  c.q = 4;
  c.tol = 1e-9;
  double l0 = lambda_pq(discretize(pepper(), 0, 1.0 / 16), c).lambda;
  double l1 = lambda_pq(discretize(pepper(), 1, 1.0 / 16), c).lambda;
  CHECK(l1 <= l0 * (1.0 + 1e-8));
}

TEST_CASE("exponent validation") {
  Grid g = unit_square(1.0 / 16);
  SolveConfig c;
  c.p = 2;
  c.q = 1.5;  // q < p: outside the super-homogeneous regime
  CHECK_THROWS_AS(lambda_pq(g, c), std::invalid_argument);
  c.p = 2;
  c.q = std::numeric_limits<double>::infinity();  // q = inf needs p > N
  CHECK_THROWS_AS(lambda_pq(g, c), std::invalid_argument);
  c.p = 1.5;
  c.q = 7.0;  // p* = Np/(N-p) = 6
  CHECK_THROWS_AS(lambda_pq(g, c), std::invalid_argument);
  c.q = 5.0;
  CHECK_NOTHROW(lambda_pq(g, c));
}

TEST_CASE("empty grid gives the +infinity sentinel") {
  PerforatedDomain dom = PerforatedDomain::periodic(
      2, {1, 1}, HoleShape::box(Point{0, 0}, Point{0.5, 0.5}));
  Grid g = discretize(dom, 0, 1.0 / 16);
  SolveConfig c;
  c.p = 2;
  c.q = 4;
  SolveReport rep = lambda_pq(g, c);
  CHECK(std::isinf(rep.lambda));
}

TEST_CASE("mass concentrates on the larger of two disjoint balls") {
  auto big = [](std::span<const double> x) {
    double dx = x[0] + 0.45;
    return dx * dx + x[1] * x[1] < 0.09;
  };
  auto small = [](std::span<const double> x) {
    double dx = x[0] - 0.5;
    return dx * dx + x[1] * x[1] < 0.04;
  };
  std::vector<double> lo{-1, -1}, hi{1, 1};
  Grid g = make_grid(lo, hi, 1.0 / 32, [&](std::span<const double> x) {
    return big(x) || small(x);
  });
  SolveConfig c;
  c.p = 2;
  c.q = 4;
  c.tol = 1e-9;
  SolveReport rep = lambda_pq(g, c);
  std::vector<ComponentMass> comps = component_mass_table(g, rep.extremal, 4.0);
  REQUIRE(comps.size() == 2);
  double top = std::max(comps[0].share, comps[1].share);
  CHECK(top >= 0.999);
  CHECK(comps[0].share + comps[1].share == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("component mass table trivia") {
  Grid g = unit_square(1.0 / 16);
  Field u = zero_field(g);
  std::vector<ComponentMass> zero_comps = component_mass_table(g, u, 4.0);
  REQUIRE(zero_comps.size() == 1);
  CHECK(zero_comps[0].share == 0.0);  // zero field: all shares zero
  for (std::int64_t f : g.interior_nodes) u.values[static_cast<std::size_t>(f)] = 1.0;
  std::vector<ComponentMass> one = component_mass_table(g, u, 4.0);
  REQUIRE(one.size() == 1);
  CHECK(one[0].share == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("penalized constants bracket the plain constant") {
  Grid g = discretize(pepper(), 1, 1.0 / 16);
  SolveConfig c;
  c.p = 2;
  c.q = 4;
  c.tol = 1e-9;
  double lam = lambda_pq(g, c).lambda;
  SolveConfig c1 = c;
  c1.penalty_n = 1;
  SolveReport r1 = lambda_pq_penalized(g, c1);
  SolveConfig c4 = c;
  c4.penalty_n = 4;
  SolveReport r4 = lambda_pq_penalized(g, c4);
  CHECK(r1.lambda >= r4.lambda - 1e-9);
  CHECK(r4.lambda >= lam - 1e-9);
  CHECK(r1.moment1 > 0.0);
  CHECK(r1.moment2 > 0.0);
  CHECK(r4.moment1 <= r1.moment1);
  CHECK_THROWS_AS(lambda_pq_penalized(g, c), std::invalid_argument);  // n missing
}

TEST_CASE("level set measure") {
  Grid g = unit_square(1.0 / 16);
  Field u = zero_field(g);
  CHECK(level_set_measure(g, u, 0.0) == 0.0);
  for (std::int64_t f : g.interior_nodes) u.values[static_cast<std::size_t>(f)] = 1.0;
  CHECK(level_set_measure(g, u, 0.5) ==
        doctest::Approx(1.0).epsilon(2.0 / 16));  // within one boundary layer
}

TEST_CASE("q to infinity endpoint") {
  Grid g = discretize(pepper(), 0, 1.0 / 16);
  SolveConfig c;
  c.p = 3;  // p > N = 2
  c.q = std::numeric_limits<double>::infinity();
  c.tol = 1e-8;
  QSweepResult sweep = lambda_p_infinity(g, c, {8, 16});
  CHECK(sweep.estimate > 0.0);
  CHECK(sweep.table.size() == 2);
  CHECK(std::isfinite(sweep.tail_fit));
  CHECK(sweep.direct.lambda == doctest::Approx(sweep.estimate));
  // sup-norm normalization: the extremal has unit max.
  CHECK(lq_norm(g, sweep.direct.extremal.values, c.q) ==
        doctest::Approx(1.0).epsilon(1e-12));

  SolveConfig bad = c;
  bad.p = 2;  // p <= N
  CHECK_THROWS_AS(lambda_p_infinity(g, bad, {8, 16}), std::invalid_argument);
}
