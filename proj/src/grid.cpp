#include "perfora/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace perfora {

Point Grid::node_pos(std::int64_t flat) const {
  Point x(static_cast<std::size_t>(dim));
  for (int j = 0; j < dim; ++j) {
    auto idx = (flat / strides[static_cast<std::size_t>(j)]) % npts[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(j)] = origin[static_cast<std::size_t>(j)] + h * static_cast<double>(idx);
  }
  return x;
}

namespace {

void finalize(Grid& g) {
  g.strides.assign(static_cast<std::size_t>(g.dim), 1);
  for (int j = g.dim - 2; j >= 0; --j) {
    g.strides[static_cast<std::size_t>(j)] =
        g.strides[static_cast<std::size_t>(j) + 1] * g.npts[static_cast<std::size_t>(j) + 1];
  }
  g.total_nodes = g.strides[0] * g.npts[0];

  g.cell_strides.assign(static_cast<std::size_t>(g.dim), 1);
  for (int j = g.dim - 2; j >= 0; --j) {
    g.cell_strides[static_cast<std::size_t>(j)] =
        g.cell_strides[static_cast<std::size_t>(j) + 1] * (g.npts[static_cast<std::size_t>(j) + 1] - 1);
  }
  g.total_cells = g.cell_strides[0] * (g.npts[0] - 1);
}

void collect_interior(Grid& g) {
  g.interior_nodes.clear();
  for (std::int64_t f = 0; f < g.total_nodes; ++f) {
    if (g.interior[static_cast<std::size_t>(f)]) g.interior_nodes.push_back(f);
  }
}

}  // namespace

Field zero_field(const Grid& grid) {
  return Field{std::vector<double>(static_cast<std::size_t>(grid.total_nodes), 0.0)};
}

Grid make_grid(std::span<const double> lo, std::span<const double> hi, double h,
               const std::function<bool(std::span<const double>)>& inside) {
  if (lo.size() != hi.size() || lo.empty()) {
    throw std::invalid_argument("make_grid: bad box");
  }
  if (!(h > 0.0)) throw std::invalid_argument("make_grid: h must be positive");
  Grid g;
  g.dim = static_cast<int>(lo.size());
  g.h = h;
  g.origin.assign(lo.begin(), lo.end());
  g.npts.resize(static_cast<std::size_t>(g.dim));
  for (int j = 0; j < g.dim; ++j) {
    double extent = hi[static_cast<std::size_t>(j)] - lo[static_cast<std::size_t>(j)];
    auto m = static_cast<long long>(std::llround(extent / h));
    if (m < 2 || std::abs(static_cast<double>(m) * h - extent) > 1e-9 * extent) {
      throw std::invalid_argument("make_grid: h must divide every window side");
    }
    g.npts[static_cast<std::size_t>(j)] = static_cast<int>(m) + 1;
  }
  finalize(g);

  g.interior.assign(static_cast<std::size_t>(g.total_nodes), 0);
  Point x(static_cast<std::size_t>(g.dim));
  std::vector<int> idx(static_cast<std::size_t>(g.dim), 0);
  for (std::int64_t f = 0; f < g.total_nodes; ++f) {
    bool boundary = false;
    for (int j = 0; j < g.dim; ++j) {
      if (idx[static_cast<std::size_t>(j)] == 0 ||
          idx[static_cast<std::size_t>(j)] == g.npts[static_cast<std::size_t>(j)] - 1) {
        boundary = true;
      }
      x[static_cast<std::size_t>(j)] =
          g.origin[static_cast<std::size_t>(j)] + h * idx[static_cast<std::size_t>(j)];
    }
    if (!boundary && inside(x)) g.interior[static_cast<std::size_t>(f)] = 1;
    for (int j = g.dim - 1; j >= 0; --j) {
      if (++idx[static_cast<std::size_t>(j)] < g.npts[static_cast<std::size_t>(j)]) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
  }
  collect_interior(g);
  return g;
}

Grid discretize(const PerforatedDomain& domain, int window_radius, double h,
                std::span<const long long> window_center) {
  if (window_radius < 0) throw std::invalid_argument("discretize: negative window");
  const int n = domain.dim();
  const std::vector<double> sizes = domain.cell_sizes();
  double tmin = sizes[0];
  for (double s : sizes) tmin = std::min(tmin, s);
  if (!(h <= tmin / 8.0 + 1e-15)) {
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "discretize: h too coarse, need h <= min(t)/8 = %.17g", tmin / 8.0);
    throw std::invalid_argument(msg);
  }
  std::vector<double> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    double s = sizes[static_cast<std::size_t>(j)];
    auto m = static_cast<long long>(std::llround(s / h));
    if (std::abs(static_cast<double>(m) * h - s) > 1e-9 * s) {
      throw std::invalid_argument("discretize: h must divide every cell side");
    }
    double c = window_center.empty() ? 0.0
                                     : static_cast<double>(window_center[static_cast<std::size_t>(j)]);
    lo[static_cast<std::size_t>(j)] = s * (c - window_radius - 0.5);
    hi[static_cast<std::size_t>(j)] = s * (c + window_radius + 0.5);
  }
  return make_grid(lo, hi, h,
                   [&domain](std::span<const double> x) { return domain.contains(x); });
}

Grid Grid::with_extra_dirichlet(
    const std::function<bool(std::span<const double>)>& pinned) const {
  Grid g = *this;
  for (std::int64_t f : interior_nodes) {
    if (pinned(node_pos(f))) g.interior[static_cast<std::size_t>(f)] = 0;
  }
  collect_interior(g);
  return g;
}

void dump_field(const Grid& grid, const Field& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("dump_field: cannot open " + path);
  out << grid.dim << " " << grid.h;
  for (int j = 0; j < grid.dim; ++j) out << " " << grid.npts[static_cast<std::size_t>(j)];
  out << "\n";
  out.precision(17);
  for (std::int64_t f = 0; f < grid.total_nodes; ++f) {
    out << u.values[static_cast<std::size_t>(f)] << "\n";
  }
}

}  // namespace perfora
