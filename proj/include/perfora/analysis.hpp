#pragma once

#include <string>
#include <utility>
#include <vector>

#include "perfora/capacity.hpp"
#include "perfora/geometry.hpp"
#include "perfora/solver.hpp"

namespace perfora {

/// Named-scalar experiment summary. Every verdict carries the numerical
/// margin that produced it; `work` is the total iteration count across all
/// subordinate solves (a deterministic runtime proxy).
struct ExperimentReport {
  struct Verdict {
    std::string name;
    bool value = false;
    double margin = 0.0;
  };
  std::string experiment;
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<Verdict> verdicts;
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> tables;
  double solver_tol = 0.0;
  double discretization_allowance = 0.03;
  long long work = 0;
};

struct InfinityResult {
  double estimate = 0.0;  // sup over the table (last entry by monotonicity)
  std::vector<std::pair<double, double>> table;  // (R, lambda on window minus closed B_R)
  long long work = 0;
};

/// lambda_{p,q} on the window with all nodes in the closed ball B_R
/// (centered at the window center) additionally pinned to zero, for each R
/// in R_list; the supremum approximates the energy at infinity.
InfinityResult energy_at_infinity(const PerforatedDomain& domain, const SolveConfig& cfg,
                                  std::vector<double> R_list, int window_radius,
                                  double h);

/// p = 2 existence criterion: certified iff E - lambda exceeds the combined
/// tolerance (solver tol + 3% discretization allowance, relative to lambda).
/// Equality never certifies non-existence.
ExperimentReport existence_test(const PerforatedDomain& domain, double q,
                                const SolveConfig& cfg, std::vector<double> R_list,
                                int window_radius, double h);

/// (1 - theta0) * (1 - theta0^{1/(2p)}), the guaranteed local mass fraction.
double mass_lower_bound(double theta0, double p);

struct LiebBall {
  Point center;
  double radius = 0.0;
  double fraction = 0.0;
};

/// Largest listed radius admitting a ball (center on a stride-h lattice,
/// contained in the window) whose volume fraction inside the domain is at
/// least beta; ties broken by lexicographically smallest center.
LiebBall lieb_ball_search(const PerforatedDomain& domain, int window_radius, double h,
                          double beta, std::vector<double> radii);

/// Empirical ratio c(t) = lambda_p(Omega_t) * (max t)^p / cap_p(K; Q_1) over
/// the dilation sweep, Q_1 = (-1,1)^N. Rejects holes of vanishing capacity.
ExperimentReport mazya_bound_sweep(const HoleShape& K, double p,
                                   const std::vector<std::vector<double>>& t_list,
                                   int window_radius, double h);

enum class HoleModVariant { enlarged, shrunk };

/// Single-cell hole modification experiments on the unit-period ball
/// lattice: `enlarged` checks lambda(Omega_R) = lambda(Omega) across growing
/// windows and reports the extremal's center-block mass; `shrunk` runs the
/// existence test and reports localization near the modified cell.
ExperimentReport hole_modification_experiment(HoleModVariant variant, double modified_radius,
                                     double base_r, double q,
                                     const std::vector<int>& windows, double h,
                                     double tol = 1e-8);

}  // namespace perfora
