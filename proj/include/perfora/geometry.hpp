#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace perfora {

using Point = std::vector<double>;

/// Compact hole placed inside the closed half-cube [-1/2,1/2]^N, in
/// cell-local coordinates. Membership is closed: boundary points belong
/// to the hole.
class HoleShape;

struct BallHole {
  Point center;
  double radius = 0.0;
};

struct BoxHole {
  Point center;
  Point half_widths;
};

struct UnionHole {
  std::vector<HoleShape> parts;
};

/// Bit grid over the closed half-cube, `resolution` cells per unit length
/// along each axis. Needed for shapes that have no analytic description
/// (e.g. the output of periodize()).
struct MaskHole {
  int dim = 0;
  int resolution = 0;
  std::vector<std::uint8_t> bits;  // row-major, size = resolution^dim
};

class HoleShape {
 public:
  using Variant = std::variant<BallHole, BoxHole, UnionHole, MaskHole>;

  static HoleShape ball(Point center, double radius);
  static HoleShape box(Point center, Point half_widths);
  static HoleShape union_of(std::vector<HoleShape> parts);
  static HoleShape mask(int dim, int resolution, std::vector<std::uint8_t> bits);
  static HoleShape empty(int dim);

  /// Closed membership test in cell-local coordinates.
  bool contains(std::span<const double> y) const;
  bool is_empty() const;
  /// 0 for an empty union with no parts.
  int dim() const;

  const Variant& data() const { return v_; }

  static constexpr int kDefaultMaskResolution = 256;

 private:
  explicit HoleShape(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

enum class DomainMode { periodic, cylinder };

struct CellModification {
  std::vector<long long> cell;  // index in Z^N
  HoleShape hole;
};

/// Cylinder-mode data: the set is periodic along the first k axes with
/// periods t_1..t_k and confined to the open slab (-a/2, a/2)^(N-k) in the
/// remaining axes. The per-cell hole lives on the cell scaled by
/// (t_1,..,t_k, a,..,a).
struct CylinderSpec {
  int periodic_axes = 0;  // k
  double slab_width = 0.0;  // a: slab is (-a/2, a/2) per bounded axis
};

/// Periodically perforated open set Omega = R^N \ union of D_t(i + K),
/// with optional per-cell hole replacements, or its cylinder-mode variant.
/// Immutable after construction; all queries are pure.
class PerforatedDomain {
 public:
  static PerforatedDomain periodic(int dim, std::vector<double> t, HoleShape hole,
                                   std::vector<CellModification> modifications = {});
  static PerforatedDomain cylinder(int dim, std::vector<double> t_periodic,
                                   HoleShape hole, CylinderSpec spec);

  /// True iff x lies in the open set Omega.
  bool contains(std::span<const double> x) const;

  int dim() const { return dim_; }
  DomainMode mode() const { return mode_; }
  /// Periodicity vector: length N in periodic mode, length k in cylinder mode.
  const std::vector<double>& periods() const { return t_; }
  const HoleShape& hole() const { return hole_; }
  const std::vector<CellModification>& modifications() const { return mods_; }
  const CylinderSpec& cylinder_spec() const { return cyl_; }

  /// Full per-axis cell sizes: t in periodic mode, (t_1..t_k, a..a) in
  /// cylinder mode.
  std::vector<double> cell_sizes() const;

  /// Hole used in a given cell (base hole unless a modification targets it).
  const HoleShape& hole_in_cell(std::span<const long long> cell) const;

 private:
  PerforatedDomain() = default;
  int dim_ = 0;
  std::vector<double> t_;
  HoleShape hole_ = HoleShape::empty(0);
  std::vector<CellModification> mods_;
  DomainMode mode_ = DomainMode::periodic;
  CylinderSpec cyl_;
};

/// Anisotropic dilation D_t(x) = (t_1 x_1, ..., t_N x_N).
Point dilate(std::span<const double> t, std::span<const double> x);

struct InradiusEstimate {
  double value = 0.0;
  double grid_error = 0.0;  // one grid diagonal
};

/// Inradius of the window-truncated set (cells |i|_linf <= window_radius),
/// via an exact Euclidean distance transform at the given node spacing.
InradiusEstimate inradius(const PerforatedDomain& domain, int window_radius,
                          double resolution);

struct PeriodizeResult {
  PerforatedDomain domain;
  /// Set when the cylinder cross-section holes touch the slab boundary
  /// within one mask cell; the capacity positivity argument relies on the
  /// outer gap in that case.
  bool boundary_warning = false;
};

/// Cylinder mode -> periodic mode with periods (t_1..t_k, 2a..2a) and the
/// generating hole rendered as a mask at the given resolution.
PeriodizeResult periodize(const PerforatedDomain& domain,
                          int mask_resolution = HoleShape::kDefaultMaskResolution);

}  // namespace perfora
