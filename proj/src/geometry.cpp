#include "perfora/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace perfora {

namespace {

constexpr double kHalf = 0.5;
constexpr double kBoundaryTol = 1e-12;

void check_dim(std::size_t got, int want, const char* what) {
  if (static_cast<int>(got) != want) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

}  // namespace

HoleShape HoleShape::ball(Point center, double radius) {
  if (center.empty()) throw std::invalid_argument("ball: empty center");
  if (radius < 0.0 || !std::isfinite(radius)) {
    throw std::invalid_argument("ball: radius must be finite and >= 0");
  }
  for (double c : center) {
    if (std::abs(c) + radius > kHalf + kBoundaryTol) {
      throw std::invalid_argument("ball: not contained in the closed half-cube");
    }
  }
  return HoleShape(BallHole{std::move(center), radius});
}

HoleShape HoleShape::box(Point center, Point half_widths) {
  if (center.size() != half_widths.size() || center.empty()) {
    throw std::invalid_argument("box: bad center/half_widths");
  }
  for (std::size_t i = 0; i < center.size(); ++i) {
    if (half_widths[i] < 0.0 || !std::isfinite(half_widths[i])) {
      throw std::invalid_argument("box: half widths must be finite and >= 0");
    }
    if (std::abs(center[i]) + half_widths[i] > kHalf + kBoundaryTol) {
      throw std::invalid_argument("box: not contained in the closed half-cube");
    }
  }
  return HoleShape(BoxHole{std::move(center), std::move(half_widths)});
}

HoleShape HoleShape::union_of(std::vector<HoleShape> parts) {
  int d = 0;
  for (const auto& p : parts) {
    int pd = p.dim();
    if (pd == 0) continue;
    if (d == 0) d = pd;
    if (pd != d) throw std::invalid_argument("union: mixed dimensions");
  }
  return HoleShape(UnionHole{std::move(parts)});
}

HoleShape HoleShape::mask(int dim, int resolution, std::vector<std::uint8_t> bits) {
  if (dim < 1) throw std::invalid_argument("mask: dim must be >= 1");
  if (resolution < 1) throw std::invalid_argument("mask: resolution must be >= 1");
  std::size_t want = 1;
  for (int i = 0; i < dim; ++i) want *= static_cast<std::size_t>(resolution);
  if (bits.size() != want) throw std::invalid_argument("mask: bit count mismatch");
  return HoleShape(MaskHole{dim, resolution, std::move(bits)});
}

HoleShape HoleShape::empty(int dim) {
  (void)dim;
  return HoleShape(UnionHole{});
}

int HoleShape::dim() const {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BallHole>) {
          return static_cast<int>(s.center.size());
        } else if constexpr (std::is_same_v<T, BoxHole>) {
          return static_cast<int>(s.center.size());
        } else if constexpr (std::is_same_v<T, UnionHole>) {
          for (const auto& p : s.parts) {
            if (int d = p.dim(); d != 0) return d;
          }
          return 0;
        } else {
          return s.dim;
        }
      },
      v_);
}

bool HoleShape::is_empty() const {
  return std::visit(
      [](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BallHole> || std::is_same_v<T, BoxHole>) {
          return false;
        } else if constexpr (std::is_same_v<T, UnionHole>) {
          return std::all_of(s.parts.begin(), s.parts.end(),
                             [](const HoleShape& p) { return p.is_empty(); });
        } else {
          return std::all_of(s.bits.begin(), s.bits.end(),
                             [](std::uint8_t b) { return b == 0; });
        }
      },
      v_);
}

bool HoleShape::contains(std::span<const double> y) const {
  for (double yi : y) {
    if (std::abs(yi) > kHalf + kBoundaryTol) return false;
  }
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BallHole>) {
          check_dim(y.size(), static_cast<int>(s.center.size()), "ball");
          double d2 = 0.0;
          for (std::size_t i = 0; i < y.size(); ++i) {
            double d = y[i] - s.center[i];
            d2 += d * d;
          }
          return d2 <= s.radius * s.radius + kBoundaryTol;
        } else if constexpr (std::is_same_v<T, BoxHole>) {
          check_dim(y.size(), static_cast<int>(s.center.size()), "box");
          for (std::size_t i = 0; i < y.size(); ++i) {
            if (std::abs(y[i] - s.center[i]) > s.half_widths[i] + kBoundaryTol) {
              return false;
            }
          }
          return true;
        } else if constexpr (std::is_same_v<T, UnionHole>) {
          return std::any_of(s.parts.begin(), s.parts.end(),
                             [&](const HoleShape& p) { return p.contains(y); });
        } else {
          check_dim(y.size(), s.dim, "mask");
          std::size_t flat = 0;
          for (int i = 0; i < s.dim; ++i) {
            double u = (y[i] + kHalf) * s.resolution;
            auto idx = static_cast<long long>(std::floor(u));
            idx = std::clamp<long long>(idx, 0, s.resolution - 1);
            flat = flat * static_cast<std::size_t>(s.resolution) +
                   static_cast<std::size_t>(idx);
          }
          return s.bits[flat] != 0;
        }
      },
      v_);
}

PerforatedDomain PerforatedDomain::periodic(int dim, std::vector<double> t,
                                            HoleShape hole,
                                            std::vector<CellModification> mods) {
  if (dim < 2) throw std::invalid_argument("domain: dim must be >= 2");
  check_dim(t.size(), dim, "domain periods");
  for (double ti : t) {
    if (!(ti > 0.0) || !std::isfinite(ti)) {
      throw std::invalid_argument("domain: all t_i must be positive");
    }
  }
  if (!hole.is_empty() && hole.dim() != dim) {
    throw std::invalid_argument("domain: hole dimension mismatch");
  }
  for (std::size_t a = 0; a < mods.size(); ++a) {
    check_dim(mods[a].cell.size(), dim, "modification cell");
    if (!mods[a].hole.is_empty() && mods[a].hole.dim() != dim) {
      throw std::invalid_argument("domain: modification hole dimension mismatch");
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (mods[a].cell == mods[b].cell) {
        throw std::invalid_argument("domain: duplicate modification cell");
      }
    }
  }
  PerforatedDomain d;
  d.dim_ = dim;
  d.t_ = std::move(t);
  d.hole_ = std::move(hole);
  d.mods_ = std::move(mods);
  d.mode_ = DomainMode::periodic;
  return d;
}

PerforatedDomain PerforatedDomain::cylinder(int dim, std::vector<double> t_periodic,
                                            HoleShape hole, CylinderSpec spec) {
  if (dim < 2) throw std::invalid_argument("domain: dim must be >= 2");
  if (spec.periodic_axes < 1 || spec.periodic_axes > dim - 1) {
    throw std::invalid_argument("cylinder: need 1 <= k <= N-1");
  }
  if (!(spec.slab_width > 0.0)) {
    throw std::invalid_argument("cylinder: slab width must be positive");
  }
  check_dim(t_periodic.size(), spec.periodic_axes, "cylinder periods");
  for (double ti : t_periodic) {
    if (!(ti > 0.0)) throw std::invalid_argument("cylinder: all t_i must be positive");
  }
  if (!hole.is_empty() && hole.dim() != dim) {
    throw std::invalid_argument("cylinder: hole dimension mismatch");
  }
  PerforatedDomain d;
  d.dim_ = dim;
  d.t_ = std::move(t_periodic);
  d.hole_ = std::move(hole);
  d.mode_ = DomainMode::cylinder;
  d.cyl_ = spec;
  return d;
}

std::vector<double> PerforatedDomain::cell_sizes() const {
  if (mode_ == DomainMode::periodic) return t_;
  std::vector<double> s(static_cast<std::size_t>(dim_), cyl_.slab_width);
  std::copy(t_.begin(), t_.end(), s.begin());
  return s;
}

const HoleShape& PerforatedDomain::hole_in_cell(std::span<const long long> cell) const {
  for (const auto& m : mods_) {
    if (std::equal(m.cell.begin(), m.cell.end(), cell.begin(), cell.end())) {
      return m.hole;
    }
  }
  return hole_;
}

bool PerforatedDomain::contains(std::span<const double> x) const {
  check_dim(x.size(), dim_, "contains");
  const int n = dim_;
  const int k = (mode_ == DomainMode::cylinder) ? cyl_.periodic_axes : n;

  std::vector<double> y(static_cast<std::size_t>(n));
  if (mode_ == DomainMode::cylinder) {
    const double half = cyl_.slab_width / 2.0;
    for (int j = k; j < n; ++j) {
      if (std::abs(x[static_cast<std::size_t>(j)]) >= half) return false;
      y[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)] / cyl_.slab_width;
    }
  }
  for (int j = 0; j < k; ++j) {
    y[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)] / t_[static_cast<std::size_t>(j)];
  }
  if (hole_.is_empty() && mods_.empty()) return true;

  // Candidate cells: integers i with |y_j - i_j| <= 1/2 on each periodic
  // axis (two candidates exactly on a cell face).
  std::vector<long long> lo(static_cast<std::size_t>(n), 0), hi(static_cast<std::size_t>(n), 0);
  for (int j = 0; j < k; ++j) {
    double yj = y[static_cast<std::size_t>(j)];
    lo[static_cast<std::size_t>(j)] = static_cast<long long>(std::ceil(yj - kHalf - kBoundaryTol));
    hi[static_cast<std::size_t>(j)] = static_cast<long long>(std::floor(yj + kHalf + kBoundaryTol));
  }

  std::vector<long long> cell(lo);
  std::vector<double> local(static_cast<std::size_t>(n));
  while (true) {
    for (int j = 0; j < n; ++j) {
      local[static_cast<std::size_t>(j)] =
          y[static_cast<std::size_t>(j)] - static_cast<double>(cell[static_cast<std::size_t>(j)]);
    }
    const HoleShape& h = mods_.empty() ? hole_ : hole_in_cell(cell);
    if (h.contains(local)) return false;
    int j = 0;
    for (; j < k; ++j) {
      if (cell[static_cast<std::size_t>(j)] < hi[static_cast<std::size_t>(j)]) {
        ++cell[static_cast<std::size_t>(j)];
        break;
      }
      cell[static_cast<std::size_t>(j)] = lo[static_cast<std::size_t>(j)];
    }
    if (j == k) break;
  }
  return true;
}

Point dilate(std::span<const double> t, std::span<const double> x) {
  if (t.size() != x.size()) throw std::invalid_argument("dilate: size mismatch");
  Point out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(t[i] > 0.0)) throw std::invalid_argument("dilate: all t_i must be positive");
    out[i] = t[i] * x[i];
  }
  return out;
}

namespace {

// One pass of the separable lower-envelope-of-parabolas squared distance
// transform (Felzenszwalb-Huttenlocher), in index units. Entries with
// f = +inf contribute no parabola.
void edt_1d(std::span<const double> f, std::span<double> out,
            std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  const double inf = std::numeric_limits<double>::infinity();
  int first = 0;
  while (first < n && std::isinf(f[static_cast<std::size_t>(first)])) ++first;
  if (first == n) {
    std::fill(out.begin(), out.end(), inf);
    return;
  }
  v.assign(static_cast<std::size_t>(n), 0);
  z.assign(static_cast<std::size_t>(n) + 1, 0.0);
  int kk = 0;
  v[0] = first;
  z[0] = -inf;
  z[1] = inf;
  for (int q = first + 1; q < n; ++q) {
    if (std::isinf(f[static_cast<std::size_t>(q)])) continue;
    double s = 0.0;
    while (true) {
      int p = v[static_cast<std::size_t>(kk)];
      s = ((f[static_cast<std::size_t>(q)] + static_cast<double>(q) * q) -
           (f[static_cast<std::size_t>(p)] + static_cast<double>(p) * p)) /
          (2.0 * (q - p));
      if (s <= z[static_cast<std::size_t>(kk)] && kk > 0) {
        --kk;
        continue;
      }
      break;
    }
    ++kk;
    v[static_cast<std::size_t>(kk)] = q;
    z[static_cast<std::size_t>(kk)] = s;
    z[static_cast<std::size_t>(kk) + 1] = inf;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(j) + 1] < static_cast<double>(q)) ++j;
    int p = v[static_cast<std::size_t>(j)];
    double d = static_cast<double>(q - p);
    out[static_cast<std::size_t>(q)] = d * d + f[static_cast<std::size_t>(p)];
  }
}

}  // namespace

InradiusEstimate inradius(const PerforatedDomain& domain, int window_radius,
                          double resolution) {
  if (window_radius < 1) {
    throw std::invalid_argument("inradius: window must cover at least 3^N cells");
  }
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("inradius: resolution must be positive");
  }
  const int n = domain.dim();
  const std::vector<double> sizes = domain.cell_sizes();

  // Node lattice over the window, spacing `resolution` per axis.
  std::vector<int> npts(static_cast<std::size_t>(n));
  std::vector<double> orig(static_cast<std::size_t>(n));
  std::size_t total = 1;
  for (int j = 0; j < n; ++j) {
    double extent = sizes[static_cast<std::size_t>(j)] * (2 * window_radius + 1);
    auto m = static_cast<int>(std::llround(extent / resolution));
    if (m < 1 || std::abs(m * resolution - extent) > 1e-9 * extent) {
      throw std::invalid_argument("inradius: resolution must divide cell sides");
    }
    npts[static_cast<std::size_t>(j)] = m + 1;
    orig[static_cast<std::size_t>(j)] = -extent / 2.0;
    total *= static_cast<std::size_t>(m + 1);
  }

  // Squared distance (index units) to the complement of Omega, sampled at
  // nodes; 0 at complement nodes.
  std::vector<double> dist(total);
  {
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (std::size_t f = 0; f < total; ++f) {
      for (int j = 0; j < n; ++j) {
        x[static_cast<std::size_t>(j)] =
            orig[static_cast<std::size_t>(j)] + resolution * idx[static_cast<std::size_t>(j)];
      }
      dist[f] = domain.contains(x) ? std::numeric_limits<double>::infinity() : 0.0;
      for (int j = n - 1; j >= 0; --j) {
        if (++idx[static_cast<std::size_t>(j)] < npts[static_cast<std::size_t>(j)]) break;
        idx[static_cast<std::size_t>(j)] = 0;
      }
    }
  }

  // Separable EDT, one axis at a time.
  std::vector<int> venv;
  std::vector<double> zenv, line, lout;
  for (int axis = n - 1; axis >= 0; --axis) {
    const int m = npts[static_cast<std::size_t>(axis)];
    std::size_t stride = 1;
    for (int j = axis + 1; j < n; ++j) stride *= static_cast<std::size_t>(npts[static_cast<std::size_t>(j)]);
    const std::size_t nlines = total / static_cast<std::size_t>(m);
    line.resize(static_cast<std::size_t>(m));
    lout.resize(static_cast<std::size_t>(m));
    for (std::size_t l = 0; l < nlines; ++l) {
      // Base offset of line l along `axis`.
      std::size_t block = l / stride;
      std::size_t rem = l % stride;
      std::size_t base = block * stride * static_cast<std::size_t>(m) + rem;
      for (int q = 0; q < m; ++q) line[static_cast<std::size_t>(q)] = dist[base + static_cast<std::size_t>(q) * stride];
      edt_1d(line, lout, venv, zenv);
      for (int q = 0; q < m; ++q) dist[base + static_cast<std::size_t>(q) * stride] = lout[static_cast<std::size_t>(q)];
    }
  }

  // Largest ball fitting in Omega within the window: cap each node's
  // complement distance by its distance to the window boundary.
  double best = 0.0;
  {
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (std::size_t f = 0; f < total; ++f) {
      double d = std::sqrt(dist[f]) * resolution;
      for (int j = 0; j < n; ++j) {
        double to_lo = resolution * idx[static_cast<std::size_t>(j)];
        double to_hi = resolution * (npts[static_cast<std::size_t>(j)] - 1 - idx[static_cast<std::size_t>(j)]);
        d = std::min(d, std::min(to_lo, to_hi));
      }
      best = std::max(best, d);
      for (int j = n - 1; j >= 0; --j) {
        if (++idx[static_cast<std::size_t>(j)] < npts[static_cast<std::size_t>(j)]) break;
        idx[static_cast<std::size_t>(j)] = 0;
      }
    }
  }
  return InradiusEstimate{best, resolution * std::sqrt(static_cast<double>(n))};
}

PeriodizeResult periodize(const PerforatedDomain& domain, int mask_resolution) {
  if (domain.mode() != DomainMode::cylinder) {
    throw std::invalid_argument("periodize: domain must be in cylinder mode");
  }
  if (mask_resolution < 2) {
    throw std::invalid_argument("periodize: mask resolution must be >= 2");
  }
  const int n = domain.dim();
  const int k = domain.cylinder_spec().periodic_axes;
  const double a = domain.cylinder_spec().slab_width;

  std::vector<double> tbar(static_cast<std::size_t>(n), 2.0 * a);
  std::copy(domain.periods().begin(), domain.periods().end(), tbar.begin());

  std::size_t total = 1;
  for (int j = 0; j < n; ++j) total *= static_cast<std::size_t>(mask_resolution);
  std::vector<std::uint8_t> bits(total, 0);

  bool warn = false;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  std::vector<double> x(static_cast<std::size_t>(n));
  const double half_slab = a / 2.0;
  for (std::size_t f = 0; f < total; ++f) {
    bool inside_slab = true;
    for (int j = 0; j < n; ++j) {
      double y = (idx[static_cast<std::size_t>(j)] + 0.5) / mask_resolution - 0.5;
      x[static_cast<std::size_t>(j)] = tbar[static_cast<std::size_t>(j)] * y;
      if (j >= k && std::abs(x[static_cast<std::size_t>(j)]) >= half_slab) inside_slab = false;
    }
    bool in_omega = domain.contains(x);
    bits[f] = in_omega ? 0 : 1;
    if (!in_omega && inside_slab) {
      // Cross-section hole cell; warn when it hugs the slab boundary.
      for (int j = k; j < n; ++j) {
        double cell = tbar[static_cast<std::size_t>(j)] / mask_resolution;
        if (std::abs(x[static_cast<std::size_t>(j)]) > half_slab - 2.0 * cell) warn = true;
      }
    }
    for (int j = n - 1; j >= 0; --j) {
      if (++idx[static_cast<std::size_t>(j)] < mask_resolution) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
  }

  PeriodizeResult out{
      PerforatedDomain::periodic(n, tbar,
                                 HoleShape::mask(n, mask_resolution, std::move(bits))),
      warn};
  return out;
}

}  // namespace perfora
