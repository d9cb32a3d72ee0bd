#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "perfora/grid.hpp"

namespace perfora {

/// Configuration for the Rayleigh-quotient descent. q = p is accepted for
/// the plain Poincare constant lambda_p; q may be infinity for the
/// Morrey-type endpoint (p > N only).
struct SolveConfig {
  double p = 2.0;
  double q = 2.0;
  double tol = 1e-8;
  int max_iters = 50000;
  double eps_reg = -1.0;  // < 0: default (1e-8 for p >= 2, 1e-6 for p < 2)
  double step0 = 1.0;
  double shrink = 0.5;
  double armijo_c = 1e-4;
  std::uint64_t seed = 1;
  int starts = 0;  // 0 = full default start set
  std::optional<int> penalty_n;         // V_n(x) = |x - center| / (n+1)
  std::vector<double> penalty_center;   // empty = window center

  double eps_reg_default() const { return p < 2.0 ? 1e-6 : 1e-8; }
};

struct ComponentMass {
  std::int64_t first_node = 0;
  std::int64_t node_count = 0;
  double share = 0.0;  // fraction of ||u||_q^q
};

struct SolveReport {
  double lambda = std::numeric_limits<double>::infinity();
  Field extremal;
  int iterations = 0;
  std::vector<double> energy_history;
  bool converged = false;
  double sup_norm = 0.0;
  std::vector<std::pair<double, double>> level_set_table;  // (eps, measure)
  std::vector<ComponentMass> component_masses;
  double moment1 = 0.0, moment2 = 0.0;  // integral of V_n^k |u|^p, penalized runs
  double eps_reg_used = 0.0;
  int best_start = -1;
};

/// lambda_{p,q} on the grid by multi-start projected gradient descent with
/// L^q-sphere retraction; (p,q) = (2,2) without penalty takes an inverse
/// power iteration fast path.
SolveReport lambda_pq(const Grid& grid, const SolveConfig& cfg);

/// Same descent with the confinement term integral of V_n |u|^p added;
/// requires cfg.penalty_n.
SolveReport lambda_pq_penalized(const Grid& grid, const SolveConfig& cfg);

struct QSweepResult {
  double estimate = 0.0;  // direct q = infinity value
  double tail_fit = 0.0;  // geometric extrapolation of the sweep
  std::vector<std::pair<double, double>> table;  // (q, lambda_{p,q})
  SolveReport direct;
};

/// q -> infinity: computes lambda_{p,q} along q_list, extrapolates the
/// tail, and cross-checks against direct sup-norm normalization. p > N.
QSweepResult lambda_p_infinity(const Grid& grid, const SolveConfig& cfg,
                               std::vector<double> q_list = {8, 16, 32, 64});

/// h^N * #{interior nodes with u > eps}.
double level_set_measure(const Grid& grid, const Field& u, double eps);

/// Connected components of the interior-node adjacency graph with each
/// component's share of ||u||_q^q.
std::vector<ComponentMass> component_mass_table(const Grid& grid, const Field& u,
                                                double q);

}  // namespace perfora
