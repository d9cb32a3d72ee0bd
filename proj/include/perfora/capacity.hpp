#pragma once

#include <functional>
#include <vector>

#include "perfora/grid.hpp"

namespace perfora {

/// Axis-aligned bounding box plus a membership predicate; realizes
/// ball-shaped condenser boxes as masks on a square grid.
struct Region {
  std::vector<double> lo, hi;
  std::function<bool(std::span<const double>)> inside;
};

Region ball_region(Point center, double radius);
Region box_region(std::vector<double> lo, std::vector<double> hi);

struct CapacityResult {
  double value = 0.0;
  Field potential;
  int iterations = 0;
  double residual = 0.0;
  double h = 0.0;
  std::vector<double> box_lo, box_hi;
};

/// Relative p-capacity of the obstacle inside the region E: minimal
/// discrete p-Dirichlet energy over potentials that vanish on and outside
/// the region boundary and are pinned to 1 on obstacle nodes. p = 2 uses a
/// conjugate-gradient linear solve; p != 2 runs clamped projected descent
/// warm-started from the p = 2 potential.
CapacityResult relative_capacity(
    const std::function<bool(std::span<const double>)>& obstacle, const Region& box,
    double p, double h, double tol, int max_iters = 50000);

struct GammaResult {
  double gamma = 0.0;
  double capacity = 0.0;     // cap_p(closed B_1; B_2)
  double lambda_ball = 0.0;  // lambda_p(B_2)
  double ball_volume = 0.0;  // |B_1|
};

/// Gamma_{N,p} = cap_p(B1; B2) / (|B_1| lambda_p(B_2)), both factors
/// computed on matched grids of spacing h.
GammaResult gamma_constant(int N, double p, double h, double tol = 1e-10);

struct NegligibilityResult {
  bool negligible = false;
  double lhs = 0.0;  // cap_p(closed B_r(x0) minus Omega; B_2r(x0))
  double rhs = 0.0;  // cap_p(closed B_r(x0); B_2r(x0))
};

NegligibilityResult negligibility_test(const PerforatedDomain& domain,
                                       const Point& center, double r, double p,
                                       double gamma, double h);

struct InradiusSearch {
  double center_stride = 0.0;  // 0 picks h/2
  std::vector<double> radii;
};

/// Largest searched radius admitting a (p,gamma)-negligible ball with
/// center sampled on a stride lattice inside the window.
double capacitary_inradius(const PerforatedDomain& domain, double p, double gamma,
                           int window_radius, double h, const InradiusSearch& search);

}  // namespace perfora
