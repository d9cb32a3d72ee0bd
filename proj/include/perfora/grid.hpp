#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "perfora/geometry.hpp"

namespace perfora {

/// Uniform node lattice over a window of whole cells. Nodes are either
/// interior (degrees of freedom) or dirichlet (pinned; zero for fields,
/// possibly nonzero for capacity potentials). The outermost node layer is
/// always dirichlet (extension by zero outside the window).
struct Grid {
  int dim = 0;
  double h = 0.0;
  std::vector<double> origin;            // position of node (0,...,0)
  std::vector<int> npts;                 // nodes per axis
  std::vector<std::int64_t> strides;     // row-major node strides
  std::int64_t total_nodes = 0;
  std::vector<std::int8_t> interior;     // per node, 1 = degree of freedom
  std::vector<std::int64_t> interior_nodes;

  std::int64_t total_cells = 0;          // h-cells, product of (npts_j - 1)
  std::vector<std::int64_t> cell_strides;

  Point node_pos(std::int64_t flat) const;
  std::int64_t num_interior() const {
    return static_cast<std::int64_t>(interior_nodes.size());
  }

  /// Copy with additional dirichlet nodes wherever `pinned` holds.
  Grid with_extra_dirichlet(const std::function<bool(std::span<const double>)>& pinned) const;
};

/// Nodal values over all grid nodes; dirichlet nodes carry their pinned
/// value (zero for variational fields).
struct Field {
  std::vector<double> values;
};

Field zero_field(const Grid& grid);

/// Grid over [lo, hi] with spacing h; a node is interior iff it is not on
/// the outer layer and `inside` holds at its position.
Grid make_grid(std::span<const double> lo, std::span<const double> hi, double h,
               const std::function<bool(std::span<const double>)>& inside);

/// Grid over the cells |i - window_center|_linf <= window_radius of the
/// domain's lattice, classified against PerforatedDomain::contains.
/// Requires h <= min(t)/8 and h dividing every cell side.
Grid discretize(const PerforatedDomain& domain, int window_radius, double h,
                std::span<const long long> window_center = {});

/// Plain-text field dump: "N h dims..." header then row-major node values.
void dump_field(const Grid& grid, const Field& u, const std::string& path);

}  // namespace perfora
