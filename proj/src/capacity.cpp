#include "perfora/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "linsolve.hpp"
#include "perfora/kernels.hpp"
#include "perfora/solver.hpp"

namespace perfora {

namespace {

double unit_ball_volume(int N) {
  return std::pow(M_PI, N / 2.0) / std::tgamma(N / 2.0 + 1.0);
}

// Clamped projected descent for p != 2, warm-started from the p = 2
// potential. The energy is convex, so plain backtracking descent with the
// [0,1] clamp converges to the capacitary potential.
void descend_general_p(const Grid& geom, const Grid& freemask, std::vector<double>& u,
                       double p, double tol, int max_iters, int* iters_out,
                       double* residual_out) {
  const double eps = p < 2.0 ? 1e-6 : 0.0;
  const std::size_t n = u.size();
  std::vector<double> grad(n), utry(n);
  const std::int64_t nn = static_cast<std::int64_t>(n);
  auto energy = [&](std::span<const double> w) {
    return dirichlet_energy(geom, w, p, eps);
  };
  double F = energy(u);
  double step = 1.0;
  int consec = 0;
  int it = 0;
  for (; it < max_iters; ++it) {
    energy_gradient(geom, u, p, eps, grad);
    detail::restrict_free(freemask, grad);
    double gg = det_dot(grad, grad);
    if (gg <= 0.0) break;
    double alpha = step;
    bool accepted = false;
    double F_try = F;
    for (int bt = 0; bt < 60; ++bt) {
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < nn; ++i) {
        double v = u[static_cast<std::size_t>(i)];
        if (freemask.interior[static_cast<std::size_t>(i)]) {
          v = std::clamp(v - alpha * grad[static_cast<std::size_t>(i)], 0.0, 1.0);
        }
        utry[static_cast<std::size_t>(i)] = v;
      }
      F_try = energy(utry);
      if (F_try <= F - 1e-4 * alpha * gg * std::min(alpha, 1.0) || F_try < F) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (++consec >= 10) break;
      step = std::max(step * 0.5, 1e-14);
      continue;
    }
    double rel = (F - F_try) / std::max(std::abs(F), 1e-300);
    u.swap(utry);
    F = F_try;
    step = std::min(alpha * 2.0, 1e6);
    consec = (rel < tol) ? consec + 1 : 0;
    if (consec >= 10) break;
  }
  if (iters_out) *iters_out += it;
  if (residual_out) {
    energy_gradient(geom, u, p, eps, grad);
    detail::restrict_free(freemask, grad);
    // Projected gradient residual: descent directions blocked by the clamp
    // do not count.
    double acc = 0.0;
    for (std::int64_t i = 0; i < nn; ++i) {
      if (!freemask.interior[static_cast<std::size_t>(i)]) continue;
      double gi = grad[static_cast<std::size_t>(i)];
      double ui = u[static_cast<std::size_t>(i)];
      if ((ui <= 0.0 && gi > 0.0) || (ui >= 1.0 && gi < 0.0)) continue;
      acc += gi * gi;
    }
    *residual_out = std::sqrt(acc);
  }
}

}  // namespace

Region ball_region(Point center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball_region: radius must be > 0");
  Region r;
  r.lo.resize(center.size());
  r.hi.resize(center.size());
  for (std::size_t j = 0; j < center.size(); ++j) {
    r.lo[j] = center[j] - radius;
    r.hi[j] = center[j] + radius;
  }
  r.inside = [center, radius](std::span<const double> x) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      double d = x[j] - center[j];
      d2 += d * d;
    }
    return d2 < radius * radius;
  };
  return r;
}

Region box_region(std::vector<double> lo, std::vector<double> hi) {
  if (lo.size() != hi.size() || lo.empty()) {
    throw std::invalid_argument("box_region: bad bounds");
  }
  Region r;
  r.lo = lo;
  r.hi = hi;
  r.inside = [lo, hi](std::span<const double> x) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] <= lo[j] || x[j] >= hi[j]) return false;
    }
    return true;
  };
  return r;
}

CapacityResult relative_capacity(
    const std::function<bool(std::span<const double>)>& obstacle, const Region& box,
    double p, double h, double tol, int max_iters) {
  if (!(p > 1.0)) throw std::invalid_argument("relative_capacity: p must be > 1");
  // Snap the bounding box outward to a multiple of h. Nodes outside the
  // region predicate stay pinned to zero, so enlarging the box is harmless.
  std::vector<double> lo = box.lo, hi = box.hi;
  for (std::size_t j = 0; j < lo.size(); ++j) {
    double side = hi[j] - lo[j];
    double cells = std::ceil(side / h - 1e-9);
    double pad = 0.5 * (cells * h - side);
    lo[j] -= pad;
    hi[j] += pad;
  }
  Grid geom = make_grid(lo, hi, h, box.inside);

  // Obstacle nodes become pinned-to-one; they must be strictly inside E.
  std::vector<std::int8_t> is_obstacle(static_cast<std::size_t>(geom.total_nodes), 0);
  std::int64_t obstacle_count = 0;
  for (std::int64_t f = 0; f < geom.total_nodes; ++f) {
    if (!obstacle(geom.node_pos(f))) continue;
    if (!geom.interior[static_cast<std::size_t>(f)]) {
      throw std::invalid_argument("relative_capacity: obstacle touches the box boundary");
    }
    is_obstacle[static_cast<std::size_t>(f)] = 1;
    ++obstacle_count;
  }

  CapacityResult res;
  res.h = h;
  res.box_lo = lo;
  res.box_hi = hi;
  res.potential = zero_field(geom);
  if (obstacle_count == 0) return res;  // u == 0 admissible

  Grid freemask = geom;
  for (std::int64_t f = 0; f < geom.total_nodes; ++f) {
    if (is_obstacle[static_cast<std::size_t>(f)]) {
      freemask.interior[static_cast<std::size_t>(f)] = 0;
    }
  }
  freemask.interior_nodes.clear();
  for (std::int64_t f = 0; f < geom.total_nodes; ++f) {
    if (freemask.interior[static_cast<std::size_t>(f)]) freemask.interior_nodes.push_back(f);
  }

  std::vector<double>& u = res.potential.values;
  for (std::int64_t f = 0; f < geom.total_nodes; ++f) {
    if (is_obstacle[static_cast<std::size_t>(f)]) u[static_cast<std::size_t>(f)] = 1.0;
  }

  // p = 2 path (also the warm start for general p).
  std::vector<double> rhs(u.size(), 0.0);
  double residual = 0.0;
  int iters = detail::cg_stiffness(geom, freemask, u, rhs,
                                   std::min(tol, 1e-10), max_iters, &residual);
  if (p != 2.0) {
    descend_general_p(geom, freemask, u, p, 1e-12, max_iters, &iters, &residual);
  }
  // Maximum principle, enforced exactly.
  const std::int64_t nn = static_cast<std::int64_t>(u.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < nn; ++i) {
    u[static_cast<std::size_t>(i)] = std::clamp(u[static_cast<std::size_t>(i)], 0.0, 1.0);
  }
  res.iterations = iters;
  res.residual = residual;
  res.value = dirichlet_energy(geom, u, p, 0.0);
  return res;
}

GammaResult gamma_constant(int N, double p, double h, double tol) {
  GammaResult out;
  Point origin(static_cast<std::size_t>(N), 0.0);
  auto obstacle = [N](std::span<const double> x) {
    double d2 = 0.0;
    for (int j = 0; j < N; ++j) d2 += x[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
    return d2 <= 1.0;
  };
  CapacityResult cap = relative_capacity(obstacle, ball_region(origin, 2.0), p, h, tol);
  out.capacity = cap.value;

  Region b2 = ball_region(origin, 2.0);
  Grid g = make_grid(b2.lo, b2.hi, h, b2.inside);
  SolveConfig cfg;
  cfg.p = p;
  cfg.q = p;
  cfg.tol = 1e-10;
  out.lambda_ball = lambda_pq(g, cfg).lambda;
  out.ball_volume = unit_ball_volume(N);
  out.gamma = out.capacity / (out.ball_volume * out.lambda_ball);
  return out;
}

NegligibilityResult negligibility_test(const PerforatedDomain& domain,
                                       const Point& center, double r, double p,
                                       double gamma, double h) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("negligibility_test: gamma must be in (0,1)");
  }
  if (!(r > 0.0)) throw std::invalid_argument("negligibility_test: r must be > 0");
  NegligibilityResult out;
  Region box = ball_region(center, 2.0 * r);

  auto in_ball = [&center, r](std::span<const double> x) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      double d = x[j] - center[j];
      d2 += d * d;
    }
    return d2 <= r * r;
  };
  auto sigma = [&](std::span<const double> x) {
    return in_ball(x) && !domain.contains(x);
  };
  out.lhs = relative_capacity(sigma, box, p, h, 1e-10).value;
  out.rhs = relative_capacity(in_ball, box, p, h, 1e-10).value;
  out.negligible = out.lhs <= gamma * out.rhs;
  return out;
}

double capacitary_inradius(const PerforatedDomain& domain, double p, double gamma,
                           int window_radius, double h, const InradiusSearch& search) {
  if (search.radii.empty()) {
    throw std::invalid_argument("capacitary_inradius: empty radius list");
  }
  std::vector<double> radii = search.radii;
  std::sort(radii.begin(), radii.end(), std::greater<>());
  const double stride = search.center_stride > 0.0 ? search.center_stride : h / 2.0;
  const int n = domain.dim();
  const std::vector<double> sizes = domain.cell_sizes();

  // Center lattice inside the window.
  std::vector<Point> centers;
  {
    std::vector<long long> cnt(static_cast<std::size_t>(n));
    std::vector<double> lo(static_cast<std::size_t>(n));
    long long total = 1;
    for (int j = 0; j < n; ++j) {
      double half = sizes[static_cast<std::size_t>(j)] * (window_radius + 0.5);
      lo[static_cast<std::size_t>(j)] = -half;
      cnt[static_cast<std::size_t>(j)] = static_cast<long long>(std::floor(2.0 * half / stride)) + 1;
      total *= cnt[static_cast<std::size_t>(j)];
    }
    std::vector<long long> idx(static_cast<std::size_t>(n), 0);
    for (long long f = 0; f < total; ++f) {
      Point c(static_cast<std::size_t>(n));
      for (int j = 0; j < n; ++j) {
        c[static_cast<std::size_t>(j)] = lo[static_cast<std::size_t>(j)] + stride * static_cast<double>(idx[static_cast<std::size_t>(j)]);
      }
      centers.push_back(std::move(c));
      for (int j = n - 1; j >= 0; --j) {
        if (++idx[static_cast<std::size_t>(j)] < cnt[static_cast<std::size_t>(j)]) break;
        idx[static_cast<std::size_t>(j)] = 0;
      }
    }
  }

  for (double r : radii) {
    // The reference capacity is translation invariant: compute once.
    Point origin(static_cast<std::size_t>(n), 0.0);
    auto in_ball0 = [r](std::span<const double> x) {
      double d2 = 0.0;
      for (double xi : x) d2 += xi * xi;
      return d2 <= r * r;
    };
    const double rhs =
        relative_capacity(in_ball0, ball_region(origin, 2.0 * r), p, h, 1e-10).value;

    bool found = false;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(centers.size()); ++ci) {
      if (found) continue;
      const Point& c = centers[static_cast<std::size_t>(ci)];
      auto in_ball = [&c, r](std::span<const double> x) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
          double d = x[j] - c[j];
          d2 += d * d;
        }
        return d2 <= r * r;
      };
      auto sigma = [&](std::span<const double> x) {
        return in_ball(x) && !domain.contains(x);
      };
      double lhs = relative_capacity(sigma, ball_region(c, 2.0 * r), p, h, 1e-10).value;
      if (lhs <= gamma * rhs) {
#pragma omp critical
        found = true;
      }
    }
    if (found) return r;
  }
  return 0.0;
}

}  // namespace perfora
