#pragma once

#include <span>

#include "perfora/grid.hpp"

namespace perfora {

/// Fixed-tree pairwise sum; result is independent of thread count.
double pairwise_sum(std::span<const double> values);

/// Discrete p-Dirichlet energy: sum over h-cells of
/// (|grad u|^2 + eps_reg^2)^(p/2) * h^N with per-cell forward differences.
/// OpenMP-parallel over cells with a deterministic reduction.
double dirichlet_energy(const Grid& grid, std::span<const double> u, double p,
                        double eps_reg);
double dirichlet_energy_serial(const Grid& grid, std::span<const double> u, double p,
                               double eps_reg);

/// Exact gradient of dirichlet_energy with the same eps_reg. Entries at
/// non-interior nodes are zero. Node-parallel, race-free.
void energy_gradient(const Grid& grid, std::span<const double> u, double p,
                     double eps_reg, std::span<double> grad);
void energy_gradient_serial(const Grid& grid, std::span<const double> u, double p,
                            double eps_reg, std::span<double> grad);

/// Midpoint-quadrature L^q norm, (sum |u_i|^q h^N)^(1/q); q may be
/// infinity (max of |u_i|). Sums over all nodes: fields must be
/// zero-extended on dirichlet nodes.
double lq_norm(const Grid& grid, std::span<const double> u, double q);
double lq_norm_serial(const Grid& grid, std::span<const double> u, double q);

/// p = 2 stiffness operator: out = L u with u^T L u = dirichlet_energy(u, 2, 0).
/// Computed at every node from existing cells only (window-boundary aware);
/// uses pinned values as-is.
void apply_stiffness(const Grid& grid, std::span<const double> u, std::span<double> out);

/// Deterministic dot product over full node arrays.
double det_dot(std::span<const double> a, std::span<const double> b);

}  // namespace perfora
