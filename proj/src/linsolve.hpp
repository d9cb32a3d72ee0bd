#pragma once

#include <vector>

#include "perfora/grid.hpp"

namespace perfora::detail {

/// Zero out entries at non-interior nodes of `mask`.
void restrict_free(const Grid& mask, std::vector<double>& x);

/// Conjugate gradient for the p = 2 stiffness operator: solves
/// L u = rhs on the free nodes of `mask` (geometry taken from `geom`),
/// holding u fixed on pinned nodes. Returns iterations; residual norm in
/// *out_residual when non-null.
int cg_stiffness(const Grid& geom, const Grid& mask, std::vector<double>& u,
                 const std::vector<double>& rhs, double rel_tol, int max_iters,
                 double* out_residual = nullptr);

}  // namespace perfora::detail
