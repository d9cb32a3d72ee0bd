// Compares the OpenMP kernels against the serial reference implementations:
// wall time and bitwise agreement on a large window.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "perfora/geometry.hpp"
#include "perfora/grid.hpp"
#include "perfora/kernels.hpp"

using namespace perfora;
using clk = std::chrono::steady_clock;

namespace {

double seconds(clk::time_point a, clk::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

template <typename F>
double time_best(F&& f, int reps) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    auto t0 = clk::now();
    f();
    best = std::min(best, seconds(t0, clk::now()));
  }
  return best;
}

}  // namespace

int main() {
  PerforatedDomain dom = PerforatedDomain::periodic(
      2, {1.0, 1.0}, HoleShape::ball(Point{0.0, 0.0}, 0.25));
  Grid g = discretize(dom, 4, 1.0 / 64);
  std::printf("grid: %lld nodes, %lld interior\n",
              static_cast<long long>(g.total_nodes),
              static_cast<long long>(g.num_interior()));
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#endif

  std::vector<double> u(static_cast<std::size_t>(g.total_nodes), 0.0);
  for (std::int64_t f : g.interior_nodes) {
    Point x = g.node_pos(f);
    u[static_cast<std::size_t>(f)] = std::sin(3.0 * x[0]) * std::cos(2.0 * x[1]) + 1.0;
  }
  std::vector<double> ga(u.size()), gb(u.size());

  const int reps = 5;
  for (double p : {2.0, 3.0}) {
    double ep = 0, es = 0;
    double tp = time_best([&] { ep = dirichlet_energy(g, u, p, 1e-8); }, reps);
    double ts = time_best([&] { es = dirichlet_energy_serial(g, u, p, 1e-8); }, reps);
    double erel = std::abs(ep - es) / std::abs(es);
    std::printf("energy   p=%.0f: parallel %.4fs serial %.4fs speedup %.2fx %s\n", p, tp,
                ts, ts / tp, erel < 1e-13 ? "agree" : "MISMATCH");

    double tgp = time_best([&] { energy_gradient(g, u, p, 1e-8, ga); }, reps);
    double tgs = time_best([&] { energy_gradient_serial(g, u, p, 1e-8, gb); }, reps);
    bool same = ga == gb;
    std::printf("gradient p=%.0f: parallel %.4fs serial %.4fs speedup %.2fx %s\n", p, tgp,
                tgs, tgs / tgp, same ? "bit-identical" : "MISMATCH");
  }
  for (double q : {2.0, 4.0, std::numeric_limits<double>::infinity()}) {
    double np = 0, ns = 0;
    double tq = time_best([&] { np = lq_norm(g, u, q); }, reps);
    double tqs = time_best([&] { ns = lq_norm_serial(g, u, q); }, reps);
    double nrel = std::abs(np - ns) / std::abs(ns);
    std::printf("lq_norm  q=%-3g: parallel %.4fs serial %.4fs speedup %.2fx %s\n", q, tq,
                tqs, tqs / tq, nrel < 1e-13 ? "agree" : "MISMATCH");
  }
  return 0;
}
