#include "perfora/kernels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace perfora {

namespace {

constexpr std::size_t kPairwiseLeaf = 64;

double pairwise_sum_rec(const double* v, std::size_t n) {
  if (n <= kPairwiseLeaf) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum_rec(v, half) + pairwise_sum_rec(v + half, n - half);
}

// Per-call scratch for cell/node contribution buffers. thread_local so
// concurrent top-level solves do not alias.
std::vector<double>& scratch_a() {
  static thread_local std::vector<double> buf;
  return buf;
}
std::vector<double>& scratch_b() {
  static thread_local std::vector<double> buf;
  return buf;
}

struct CellGeom {
  int dim;
  double h;
  const std::int64_t* nstr;
  const std::int64_t* cstr;
  const int* npts;
};

inline std::int64_t cell_base_node(const CellGeom& cg, std::int64_t cell) {
  std::int64_t base = 0;
  for (int j = 0; j < cg.dim; ++j) {
    std::int64_t idx = (cell / cg.cstr[j]) % (cg.npts[j] - 1);
    base += idx * cg.nstr[j];
  }
  return base;
}

// Squared gradient of the cell based at `base`, forward differences.
inline double cell_grad_sq(const CellGeom& cg, const double* u, std::int64_t base,
                           double* g) {
  double g2 = 0.0;
  const double u0 = u[base];
  for (int j = 0; j < cg.dim; ++j) {
    double d = (u[base + cg.nstr[j]] - u0) / cg.h;
    g[j] = d;
    g2 += d * d;
  }
  return g2;
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_rec(values.data(), values.size());
}

double det_dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("det_dot: size mismatch");
  auto& buf = scratch_b();
  buf.resize(a.size());
  const std::int64_t n = static_cast<std::int64_t>(a.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    buf[static_cast<std::size_t>(i)] =
        a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
  }
  return pairwise_sum(buf);
}

double dirichlet_energy(const Grid& grid, std::span<const double> u, double p,
                        double eps_reg) {
  if (!(p > 1.0)) throw std::invalid_argument("dirichlet_energy: p must be > 1");
  const CellGeom cg{grid.dim, grid.h, grid.strides.data(), grid.cell_strides.data(),
                    grid.npts.data()};
  const double hN = std::pow(grid.h, grid.dim);
  const bool fast2 = (p == 2.0 && eps_reg == 0.0);
  const double e2 = eps_reg * eps_reg;
  const double half_p = p / 2.0;
  auto& buf = scratch_a();
  buf.resize(static_cast<std::size_t>(grid.total_cells));
  const double* uv = u.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < grid.total_cells; ++c) {
    double g[8];
    std::int64_t base = cell_base_node(cg, c);
    double g2 = cell_grad_sq(cg, uv, base, g);
    double w = fast2 ? g2 : std::pow(g2 + e2, half_p);
    buf[static_cast<std::size_t>(c)] = w * hN;
  }
  return pairwise_sum(buf);
}

double dirichlet_energy_serial(const Grid& grid, std::span<const double> u, double p,
                               double eps_reg) {
  if (!(p > 1.0)) throw std::invalid_argument("dirichlet_energy: p must be > 1");
  const CellGeom cg{grid.dim, grid.h, grid.strides.data(), grid.cell_strides.data(),
                    grid.npts.data()};
  const double hN = std::pow(grid.h, grid.dim);
  const double e2 = eps_reg * eps_reg;
  double acc = 0.0;
  double g[8];
  for (std::int64_t c = 0; c < grid.total_cells; ++c) {
    std::int64_t base = cell_base_node(cg, c);
    double g2 = cell_grad_sq(cg, u.data(), base, g);
    acc += std::pow(g2 + e2, p / 2.0) * hN;
  }
  return acc;
}

namespace {

// dE/du at one node: contributions from the cell based there plus the N
// cells whose forward difference along some axis ends there.
inline double grad_at_node(const CellGeom& cg, const double* u, std::int64_t f,
                           const int* idx, double p, double e2, bool fast2) {
  double g[8];
  double acc = 0.0;
  bool base_cell_ok = true;
  for (int j = 0; j < cg.dim; ++j) {
    if (idx[j] > cg.npts[j] - 2) base_cell_ok = false;
  }
  if (base_cell_ok) {
    double g2 = cell_grad_sq(cg, u, f, g);
    double w = fast2 ? 1.0 : std::pow(g2 + e2, p / 2.0 - 1.0);
    double s = 0.0;
    for (int j = 0; j < cg.dim; ++j) s += g[j];
    acc -= w * s;
  }
  for (int j = 0; j < cg.dim; ++j) {
    if (idx[j] < 1) continue;
    bool ok = true;
    for (int m = 0; m < cg.dim; ++m) {
      int im = (m == j) ? idx[m] - 1 : idx[m];
      if (im > cg.npts[m] - 2) ok = false;
    }
    if (!ok) continue;
    std::int64_t base = f - cg.nstr[j];
    double g2 = cell_grad_sq(cg, u, base, g);
    double w = fast2 ? 1.0 : std::pow(g2 + e2, p / 2.0 - 1.0);
    acc += w * g[j];
  }
  return acc;
}

}  // namespace

void energy_gradient(const Grid& grid, std::span<const double> u, double p,
                     double eps_reg, std::span<double> grad) {
  const CellGeom cg{grid.dim, grid.h, grid.strides.data(), grid.cell_strides.data(),
                    grid.npts.data()};
  const double scale = p * std::pow(grid.h, grid.dim) / grid.h;
  const bool fast2 = (p == 2.0 && eps_reg == 0.0);
  const double e2 = eps_reg * eps_reg;
  const double* uv = u.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t f = 0; f < grid.total_nodes; ++f) {
    if (!grid.interior[static_cast<std::size_t>(f)]) {
      grad[static_cast<std::size_t>(f)] = 0.0;
      continue;
    }
    int idx[8];
    for (int j = 0; j < cg.dim; ++j) {
      idx[j] = static_cast<int>((f / cg.nstr[j]) % cg.npts[j]);
    }
    grad[static_cast<std::size_t>(f)] =
        scale * grad_at_node(cg, uv, f, idx, p, e2, fast2);
  }
}

void energy_gradient_serial(const Grid& grid, std::span<const double> u, double p,
                            double eps_reg, std::span<double> grad) {
  const CellGeom cg{grid.dim, grid.h, grid.strides.data(), grid.cell_strides.data(),
                    grid.npts.data()};
  const double scale = p * std::pow(grid.h, grid.dim) / grid.h;
  const double e2 = eps_reg * eps_reg;
  for (std::int64_t f = 0; f < grid.total_nodes; ++f) {
    if (!grid.interior[static_cast<std::size_t>(f)]) {
      grad[static_cast<std::size_t>(f)] = 0.0;
      continue;
    }
    int idx[8];
    for (int j = 0; j < cg.dim; ++j) {
      idx[j] = static_cast<int>((f / cg.nstr[j]) % cg.npts[j]);
    }
    grad[static_cast<std::size_t>(f)] =
        scale * grad_at_node(cg, u.data(), f, idx, p, e2, false);
  }
}

void apply_stiffness(const Grid& grid, std::span<const double> u, std::span<double> out) {
  const CellGeom cg{grid.dim, grid.h, grid.strides.data(), grid.cell_strides.data(),
                    grid.npts.data()};
  const double scale = std::pow(grid.h, grid.dim) / grid.h;  // p * h^(N-1) / 2 at p=2
  const double* uv = u.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t f = 0; f < grid.total_nodes; ++f) {
    int idx[8];
    for (int j = 0; j < cg.dim; ++j) {
      idx[j] = static_cast<int>((f / cg.nstr[j]) % cg.npts[j]);
    }
    out[static_cast<std::size_t>(f)] =
        scale * grad_at_node(cg, uv, f, idx, 2.0, 0.0, true);
  }
}

double lq_norm(const Grid& grid, std::span<const double> u, double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    const std::int64_t n = grid.total_nodes;
#pragma omp parallel for schedule(static) reduction(max : m)
    for (std::int64_t i = 0; i < n; ++i) {
      double a = std::abs(u[static_cast<std::size_t>(i)]);
      if (a > m) m = a;
    }
    return m;
  }
  if (!(q >= 1.0)) throw std::invalid_argument("lq_norm: q must be >= 1 or inf");
  const double hN = std::pow(grid.h, grid.dim);
  auto& buf = scratch_a();
  buf.resize(static_cast<std::size_t>(grid.total_nodes));
  const std::int64_t n = grid.total_nodes;
  const bool q2 = (q == 2.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double a = std::abs(u[static_cast<std::size_t>(i)]);
    buf[static_cast<std::size_t>(i)] = (q2 ? a * a : std::pow(a, q)) * hN;
  }
  return std::pow(pairwise_sum(buf), 1.0 / q);
}

double lq_norm_serial(const Grid& grid, std::span<const double> u, double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (double v : u) m = std::max(m, std::abs(v));
    return m;
  }
  if (!(q >= 1.0)) throw std::invalid_argument("lq_norm: q must be >= 1 or inf");
  const double hN = std::pow(grid.h, grid.dim);
  double acc = 0.0;
  for (double v : u) acc += std::pow(std::abs(v), q) * hN;
  return std::pow(acc, 1.0 / q);
}

}  // namespace perfora
