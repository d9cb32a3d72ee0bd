#include "linsolve.hpp"

#include <cmath>

#include "perfora/kernels.hpp"

namespace perfora::detail {

void restrict_free(const Grid& mask, std::vector<double>& x) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    if (!mask.interior[static_cast<std::size_t>(i)]) x[static_cast<std::size_t>(i)] = 0.0;
  }
}

int cg_stiffness(const Grid& geom, const Grid& mask, std::vector<double>& u,
                 const std::vector<double>& rhs, double rel_tol, int max_iters,
                 double* out_residual) {
  const std::size_t n = u.size();
  std::vector<double> r(n), d(n), Ld(n);

  apply_stiffness(geom, u, r);
  const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < nn; ++i) {
    r[static_cast<std::size_t>(i)] =
        rhs[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)];
  }
  restrict_free(mask, r);

  double rr = det_dot(r, r);
  const double stop = rel_tol * std::sqrt(std::max(rr, 1e-300));
  if (std::sqrt(rr) <= 1e-300) {
    if (out_residual) *out_residual = std::sqrt(rr);
    return 0;
  }
  d = r;
  int it = 0;
  for (; it < max_iters; ++it) {
    apply_stiffness(geom, d, Ld);
    restrict_free(mask, Ld);
    double dLd = det_dot(d, Ld);
    if (!(dLd > 0.0)) break;
    double alpha = rr / dLd;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < nn; ++i) {
      u[static_cast<std::size_t>(i)] += alpha * d[static_cast<std::size_t>(i)];
      r[static_cast<std::size_t>(i)] -= alpha * Ld[static_cast<std::size_t>(i)];
    }
    double rr_new = det_dot(r, r);
    if (std::sqrt(rr_new) <= stop) {
      rr = rr_new;
      ++it;
      break;
    }
    double beta = rr_new / rr;
    rr = rr_new;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < nn; ++i) {
      d[static_cast<std::size_t>(i)] =
          r[static_cast<std::size_t>(i)] + beta * d[static_cast<std::size_t>(i)];
    }
  }
  if (out_residual) *out_residual = std::sqrt(rr);
  return it;
}

}  // namespace perfora::detail
