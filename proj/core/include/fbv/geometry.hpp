#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "fbv/exterior.hpp"
#include "fbv/numeric.hpp"
#include "fbv/point.hpp"

namespace fbv::geometry {

enum class DomainKind { kBall, kEllipsoid, kHalfSpacePatch, kIntervalBox };
enum class Region { kInterior, kBoundary };

/// Region {x : r(x) < 0} in R^m. Balls and ellipsoids are supported for
/// m in {2, 4} (C^1, C^2); boxes and half-space patches for m in {1, 2, 3}.
/// Every defining function is normalized so that |grad r| = 1 on the boundary.
///
/// A half-space patch is U = {x_1 < 0} cut to the box [lo, hi] with hi_1 = 0.
/// Only the face x_1 = 0 counts as boundary; the other faces are artificial
/// and test data is expected to vanish there.
class Domain {
 public:
  static Domain ball(int dim, double radius = 1.0);
  static Domain ball(Point center, double radius);
  /// Axis-aligned ellipsoid centred at the origin.
  static Domain ellipsoid(std::vector<double> semi_axes);
  static Domain interval_box(std::vector<double> lo, std::vector<double> hi);
  static Domain half_space_patch(std::vector<double> lo, std::vector<double> hi);

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Point& center() const { return center_; }
  /// Ball radius; for ellipsoids the largest semi-axis.
  double radius() const;
  const std::vector<double>& semi_axes() const { return axes_; }
  const std::vector<double>& lower() const { return lo_; }
  const std::vector<double>& upper() const { return hi_; }

  double r(const Point& x) const;
  Point gradient(const Point& x) const;
  bool contains(const Point& x) const { return r(x) < 0.0; }
  /// Length of the ray from x (inside) in unit direction w until it leaves
  /// the closure. Closed form for balls and ellipsoids.
  double ray_exit(const Point& x, const Point& w) const;

 private:
  Domain() = default;
  DomainKind kind_ = DomainKind::kBall;
  int dim_ = 0;
  Point center_;
  std::vector<double> axes_;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

struct BoundaryFrame {
  Point point;
  Point nu;
  /// Metric dual of nu; same components in the Euclidean basis.
  Point nu_flat;
  /// Surface density relative to the parametrization that produced `point`.
  double dS_weight = 1.0;
};

/// Frame at a boundary point. Throws if |r(point)| exceeds `tolerance`.
BoundaryFrame boundary_frame(const Domain& domain, const Point& point, double tolerance = 1e-9);

struct Exclusion {
  Point center;
  double radius = 0.0;
};

struct QuadratureRule {
  Region region = Region::kInterior;
  std::vector<Point> nodes;
  std::vector<double> weights;
  /// Outward normals for boundary rules, empty otherwise.
  std::vector<Point> normals;
  int level = 0;
  std::optional<Exclusion> exclusion;

  size_t size() const { return nodes.size(); }
  template <class Fn>
  auto integrate(Fn&& fn) const {
    using R = decltype(fn(nodes[0]));
    R acc{};
    for (size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * fn(nodes[i]);
    return acc;
  }
};

/// Nested product rules. Level L uses 2^L Gauss-Legendre panels (4 points
/// each) in bounded directions and 8*2^L (disc: 16*2^L) trapezoid nodes in
/// periodic angles. The ball in C^2 uses Hopf coordinates
/// z_1 = r cos(eta) e^{i a}, z_2 = r sin(eta) e^{i b}, with Gauss nodes in sin^2(eta).
QuadratureRule quadrature(const Domain& domain, Region region, int level,
                          std::optional<Exclusion> exclusion = std::nullopt);

/// Characteristic node spacing of quadrature(domain, interior, level).
double node_spacing(const Domain& domain, int level);

/// Drops every node within exclusion.radius of exclusion.center.
QuadratureRule apply_exclusion(QuadratureRule rule, const Exclusion& exclusion);

/// Euclidean distance to the boundary. Exact for balls, boxes and patches;
/// for ellipsoids the normalized |r(y)|, a first-order estimate.
double dist_boundary(const Domain& domain, const Point& y);

/// Tangential part of a form value at a boundary point: w - nu_flat ^ (i_nu w).
/// Its pullback to bD has the same coefficients in any tangential coframe.
exterior::FormValue pullback_boundary(const exterior::FormValue& f, const BoundaryFrame& frame);

/// Density of the pullback of a (2n-1)-form against dS: the c with
/// iota^* w = c dS, computed as top_density(nu_flat ^ w).
cplx boundary_density(const exterior::FormValue& f, const BoundaryFrame& frame);

/// Interior product i_v w for a real vector v.
exterior::FormValue interior_product(const Point& v, const exterior::FormValue& f);

/// Writes "x1,...,xm,weight" rows.
void write_csv(const QuadratureRule& rule, const std::filesystem::path& path);

}  // namespace fbv::geometry
