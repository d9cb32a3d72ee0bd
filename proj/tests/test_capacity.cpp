#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "perfora/capacity.hpp"

using namespace perfora;

namespace {

auto ball_obstacle(double cx, double cy, double r) {
  return [cx, cy, r](std::span<const double> x) {
    double dx = x[0] - cx, dy = x[1] - cy;
    return dx * dx + dy * dy <= r * r;
  };
}

// Independent oracle for the 2D condenser cap_2(B_r1; B_r2): the radial
// two-point problem min 2*pi*int_{r1}^{r2} |u'|^2 r dr, u(r1)=1, u(r2)=0,
// solved by a 1D finite-difference tridiagonal system (Thomas algorithm).
double radial_condenser_2d(double r1, double r2, int n = 8192) {
  double dr = (r2 - r1) / n;
  // Unknowns u_1..u_{n-1}; u_0 = 1, u_n = 0. Coefficients a_i = r_{i+1/2}/dr.
  std::vector<double> a(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = (r1 + (i + 0.5) * dr) / dr;
  std::vector<double> diag(static_cast<std::size_t>(n - 1)), rhs(static_cast<std::size_t>(n - 1), 0.0);
  std::vector<double> lower(static_cast<std::size_t>(n - 1), 0.0);
  for (int i = 1; i < n; ++i) {
    diag[static_cast<std::size_t>(i - 1)] = a[static_cast<std::size_t>(i - 1)] + a[static_cast<std::size_t>(i)];
    if (i > 1) lower[static_cast<std::size_t>(i - 1)] = -a[static_cast<std::size_t>(i - 1)];
  }
  rhs[0] = a[0] * 1.0;
  // Thomas forward sweep (symmetric system: super-diagonal = sub-diagonal).
  for (int i = 1; i < n - 1; ++i) {
    double m = lower[static_cast<std::size_t>(i)] / diag[static_cast<std::size_t>(i - 1)];
    diag[static_cast<std::size_t>(i)] -= m * lower[static_cast<std::size_t>(i)];
    rhs[static_cast<std::size_t>(i)] -= m * rhs[static_cast<std::size_t>(i - 1)];
  }
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0);
  u[0] = 1.0;
  u[static_cast<std::size_t>(n - 1)] =
      rhs[static_cast<std::size_t>(n - 2)] / diag[static_cast<std::size_t>(n - 2)];
  for (int i = n - 3; i >= 0; --i) {
    u[static_cast<std::size_t>(i + 1)] =
        (rhs[static_cast<std::size_t>(i)] -
         lower[static_cast<std::size_t>(i + 1)] * u[static_cast<std::size_t>(i + 2)]) /
        diag[static_cast<std::size_t>(i)];
  }
  u[static_cast<std::size_t>(n)] = 0.0;
  double energy = 0.0;
  for (int i = 0; i < n; ++i) {
    double du = (u[static_cast<std::size_t>(i + 1)] - u[static_cast<std::size_t>(i)]) / dr;
    energy += du * du * (r1 + (i + 0.5) * dr) * dr;
  }
  return 2.0 * M_PI * energy;
}

}  // namespace

TEST_CASE("empty obstacle has zero capacity") {
  Point origin{0.0, 0.0};
  CapacityResult c = relative_capacity([](std::span<const double>) { return false; },
                                       ball_region(origin, 1.0), 2.0, 1.0 / 16, 1e-10);
  CHECK(c.value == 0.0);
}

TEST_CASE("condenser capacity matches the radial oracle") {
  double oracle = radial_condenser_2d(1.0, 2.0);
  CHECK(oracle == doctest::Approx(2.0 * M_PI / std::log(2.0)).epsilon(1e-6));
  Point origin{0.0, 0.0};
  CapacityResult c = relative_capacity(ball_obstacle(0, 0, 1.0), ball_region(origin, 2.0),
                                       2.0, 1.0 / 64, 1e-10);
  CHECK(c.value == doctest::Approx(oracle).epsilon(0.03));
}

TEST_CASE("potential satisfies the maximum principle") {
  Point origin{0.0, 0.0};
  for (double p : {2.0, 3.0}) {
    CapacityResult c = relative_capacity(ball_obstacle(0, 0, 0.5),
                                         ball_region(origin, 1.0), p, 1.0 / 32, 1e-10);
    for (double v : c.potential.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(c.value > 0.0);
  }
}

TEST_CASE("obstacle touching the box boundary is rejected") {
  Point origin{0.0, 0.0};
  CHECK_THROWS_AS(relative_capacity(ball_obstacle(0, 0, 1.0), ball_region(origin, 1.0),
                                    2.0, 1.0 / 32, 1e-10),
                  std::invalid_argument);
}

TEST_CASE("capacity is monotone and subadditive in the obstacle") {
  std::vector<double> lo{-1, -1}, hi{1, 1};
  Region box = box_region(lo, hi);
  auto k1 = ball_obstacle(-0.35, 0.0, 0.2);
  auto k2 = ball_obstacle(0.35, 0.0, 0.3);
  auto both = [&](std::span<const double> x) { return k1(x) || k2(x); };
  double c1 = relative_capacity(k1, box, 2.0, 1.0 / 32, 1e-10).value;
  double c2 = relative_capacity(k2, box, 2.0, 1.0 / 32, 1e-10).value;
  double cu = relative_capacity(both, box, 2.0, 1.0 / 32, 1e-10).value;
  CHECK(c1 <= c2 + 1e-10);           // smaller ball, smaller capacity
  CHECK(c2 <= cu + 1e-10);           // monotone under inclusion
  CHECK(cu <= c1 + c2 + 1e-10);      // subadditive
}

TEST_CASE("2D p=2 capacity is scale invariant; p=3 scales like r^{N-p}") {
  Point origin{0.0, 0.0};
  double a = relative_capacity(ball_obstacle(0, 0, 0.5), ball_region(origin, 1.0), 2.0,
                               1.0 / 64, 1e-10)
                 .value;
  double b = relative_capacity(ball_obstacle(0, 0, 1.0), ball_region(origin, 2.0), 2.0,
                               1.0 / 64, 1e-10)
                 .value;
  CHECK(a == doctest::Approx(b).epsilon(0.05));

  double a3 = relative_capacity(ball_obstacle(0, 0, 0.5), ball_region(origin, 1.0), 3.0,
                                1.0 / 64, 1e-10)
                  .value;
  double b3 = relative_capacity(ball_obstacle(0, 0, 1.0), ball_region(origin, 2.0), 3.0,
                                1.0 / 64, 1e-10)
                  .value;
  CHECK(a3 == doctest::Approx(2.0 * b3).epsilon(0.05));  // r^{2-3} = 1/r
}

TEST_CASE("gamma constant matches the analytic value") {
  GammaResult g = gamma_constant(2, 2.0, 1.0 / 32);
  CHECK(g.gamma ==
        doctest::Approx(g.capacity / (g.ball_volume * g.lambda_ball)).epsilon(1e-12));
  CHECK(g.ball_volume == doctest::Approx(M_PI).epsilon(1e-12));
  // Analytic oracle: cap = 2*pi/ln 2, lambda_2(B_2) = (j_{0,1}/2)^2, so
  // Gamma = 8 / (ln 2 * j_{0,1}^2) ~= 1.9955.
  const double j01_sq = 5.783185962946785;
  CHECK(g.gamma == doctest::Approx(8.0 / (std::log(2.0) * j01_sq)).epsilon(0.05));
  CHECK(g.gamma > 0.97);
}

TEST_CASE("negligibility trivial cases") {
  PerforatedDomain dom = PerforatedDomain::periodic(
      2, {1, 1}, HoleShape::ball(Point{0, 0}, 0.25));
  // Ball entirely inside Omega (cell corner): Sigma empty.
  NegligibilityResult free_ball =
      negligibility_test(dom, Point{0.5, 0.5}, 0.15, 2.0, 0.5, 1.0 / 32);
  CHECK(free_ball.lhs == 0.0);
  CHECK(free_ball.negligible);
  // Ball entirely inside the hole: Sigma is the whole ball.
  NegligibilityResult buried =
      negligibility_test(dom, Point{0.0, 0.0}, 0.1, 2.0, 0.9, 1.0 / 32);
  CHECK(buried.lhs == buried.rhs);
  CHECK(!buried.negligible);
}

TEST_CASE("point holes are negligible at moderate gamma") {
  int res = 64;
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(res) * res, 0);
  bits[static_cast<std::size_t>(res / 2) * res + res / 2] = 1;
  PerforatedDomain dom =
      PerforatedDomain::periodic(2, {1, 1}, HoleShape::mask(2, res, std::move(bits)));
  NegligibilityResult r =
      negligibility_test(dom, Point{0.0, 0.0}, 0.5, 2.0, 0.5, 1.0 / 32);
  CHECK(r.lhs < 0.5 * r.rhs);
  CHECK(r.negligible);
}

TEST_CASE("capacitary inradius search") {
  PerforatedDomain dom = PerforatedDomain::periodic(
      2, {1, 1}, HoleShape::ball(Point{0, 0}, 0.25));
  InradiusSearch search;
  search.center_stride = 0.125;
  search.radii = {0.5, 0.35, 0.25};
  double r_lo = capacitary_inradius(dom, 2.0, 0.25, 1, 1.0 / 16, search);
  double r_hi = capacitary_inradius(dom, 2.0, 0.75, 1, 1.0 / 16, search);
  CHECK(r_lo <= r_hi);                        // monotone in gamma
  CHECK(r_hi >= 0.35);                        // >= inradius - h sqrt(N)
  CHECK_THROWS_AS(capacitary_inradius(dom, 2.0, 0.5, 1, 1.0 / 16, InradiusSearch{}),
                  std::invalid_argument);
}
