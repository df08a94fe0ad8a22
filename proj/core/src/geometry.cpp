#include "fbv/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace fbv::geometry {

using exterior::FormValue;
using exterior::Mask;

namespace {

constexpr int kPointsPerPanel = 4;

void check_box(const std::vector<double>& lo, const std::vector<double>& hi) {
  if (lo.empty() || lo.size() > 3 || lo.size() != hi.size()) throw Error("box domain: need 1 to 3 matching bounds");
  for (size_t k = 0; k < lo.size(); ++k)
    if (!(hi[k] > lo[k])) throw Error("box domain: bounds must satisfy lo < hi");
}

// Tensor Gauss rule on an axis-aligned box, axes listed in `axes`; the other
// coordinates are fixed at the values already in `base`.
void tensor_box(const std::vector<double>& lo, const std::vector<double>& hi, const std::vector<int>& axes,
                const Point& base, int level, std::vector<Point>& nodes, std::vector<double>& weights) {
  std::vector<numeric::GaussRule> rules;
  for (int a : axes) rules.push_back(numeric::composite_gauss(lo[a], hi[a], 1 << level, kPointsPerPanel));
  std::vector<size_t> idx(axes.size(), 0);
  while (true) {
    Point p = base;
    double w = 1.0;
    for (size_t k = 0; k < axes.size(); ++k) {
      p[axes[k]] = rules[k].nodes[idx[k]];
      w *= rules[k].weights[idx[k]];
    }
    nodes.push_back(p);
    weights.push_back(w);
    size_t k = axes.size();
    while (k > 0) {
      --k;
      if (++idx[k] < rules[k].nodes.size()) break;
      idx[k] = 0;
      if (k == 0) return;
    }
    if (axes.empty()) return;
  }
}

QuadratureRule box_rule(const Domain& d, Region region, int level) {
  QuadratureRule rule;
  rule.region = region;
  rule.level = level;
  const auto& lo = d.lower();
  const auto& hi = d.upper();
  const int m = d.dim();
  if (region == Region::kInterior) {
    std::vector<int> axes(m);
    for (int a = 0; a < m; ++a) axes[a] = a;
    tensor_box(lo, hi, axes, Point(m), level, rule.nodes, rule.weights);
    return rule;
  }
  const bool patch = d.kind() == DomainKind::kHalfSpacePatch;
  for (int a = 0; a < m; ++a) {
    for (int side = 0; side < 2; ++side) {
      if (patch && !(a == 0 && side == 1)) continue;
      std::vector<int> axes;
      for (int b = 0; b < m; ++b)
        if (b != a) axes.push_back(b);
      Point base(m);
      base[a] = side == 0 ? lo[a] : hi[a];
      tensor_box(lo, hi, axes, base, level, rule.nodes, rule.weights);
      Point normal(m);
      normal[a] = side == 0 ? -1.0 : 1.0;
      rule.normals.resize(rule.nodes.size(), normal);
    }
  }
  return rule;
}

// Unit-ball rule at the origin, dim 2 or 4.
QuadratureRule unit_ball_rule(int m, Region region, int level) {
  QuadratureRule rule;
  rule.region = region;
  rule.level = level;
  const int panels = 1 << level;
  numeric::GaussRule radial;
  if (region == Region::kInterior) {
    radial = numeric::composite_gauss(0.0, 1.0, panels, kPointsPerPanel);
  } else {
    radial.nodes = {1.0};
    radial.weights = {1.0};
  }
  if (m == 2) {
    const int na = 16 * panels;
    for (size_t i = 0; i < radial.nodes.size(); ++i) {
      const double r = radial.nodes[i];
      const double wr = region == Region::kInterior ? radial.weights[i] * r : 1.0;
      for (int k = 0; k < na; ++k) {
        const double t = 2.0 * kPi * k / na;
        rule.nodes.push_back(Point{r * std::cos(t), r * std::sin(t)});
        rule.weights.push_back(wr * 2.0 * kPi / na);
        if (region == Region::kBoundary) rule.normals.push_back(Point{std::cos(t), std::sin(t)});
      }
    }
    return rule;
  }
  // u = sin^2(eta) turns the measure sin(eta)cos(eta) d(eta) into du/2, so
  // polynomials in z, zbar integrate exactly in u.
  const auto eta = numeric::composite_gauss(0.0, 1.0, panels, kPointsPerPanel);
  const int na = 8 * panels;
  const double wa = 2.0 * kPi / na;
  for (size_t i = 0; i < radial.nodes.size(); ++i) {
    const double r = radial.nodes[i];
    const double wr = region == Region::kInterior ? radial.weights[i] * r * r * r : 1.0;
    for (size_t e = 0; e < eta.nodes.size(); ++e) {
      const double c = std::sqrt(1.0 - eta.nodes[e]);
      const double s = std::sqrt(eta.nodes[e]);
      const double we = 0.5 * eta.weights[e];
      for (int ka = 0; ka < na; ++ka) {
        const double a = 2.0 * kPi * ka / na;
        for (int kb = 0; kb < na; ++kb) {
          const double b = 2.0 * kPi * kb / na;
          const Point u{c * std::cos(a), c * std::sin(a), s * std::cos(b), s * std::sin(b)};
          rule.nodes.push_back(r * u);
          rule.weights.push_back(wr * we * wa * wa);
          if (region == Region::kBoundary) rule.normals.push_back(u);
        }
      }
    }
  }
  return rule;
}

}  // namespace

// -------------------------------------------------------------------- Domain

Domain Domain::ball(int dim, double radius) { return ball(Point(dim), radius); }

Domain Domain::ball(Point center, double radius) {
  if (center.dim != 2 && center.dim != 4) throw Error("ball: dimension must be 2 or 4");
  if (!(radius > 0.0)) throw Error("ball: radius must be positive");
  Domain d;
  d.kind_ = DomainKind::kBall;
  d.dim_ = center.dim;
  d.center_ = center;
  d.axes_.assign(center.dim, radius);
  return d;
}

Domain Domain::ellipsoid(std::vector<double> semi_axes) {
  if (semi_axes.size() != 2 && semi_axes.size() != 4) throw Error("ellipsoid: dimension must be 2 or 4");
  for (double a : semi_axes)
    if (!(a > 0.0)) throw Error("ellipsoid: semi-axes must be positive");
  Domain d;
  d.kind_ = DomainKind::kEllipsoid;
  d.dim_ = static_cast<int>(semi_axes.size());
  d.center_ = Point(d.dim_);
  d.axes_ = std::move(semi_axes);
  return d;
}

Domain Domain::interval_box(std::vector<double> lo, std::vector<double> hi) {
  check_box(lo, hi);
  Domain d;
  d.kind_ = DomainKind::kIntervalBox;
  d.dim_ = static_cast<int>(lo.size());
  d.center_ = Point(d.dim_);
  d.lo_ = std::move(lo);
  d.hi_ = std::move(hi);
  return d;
}

Domain Domain::half_space_patch(std::vector<double> lo, std::vector<double> hi) {
  check_box(lo, hi);
  if (hi[0] != 0.0) throw Error("half_space_patch: the box must end at x_1 = 0");
  Domain d = interval_box(std::move(lo), std::move(hi));
  d.kind_ = DomainKind::kHalfSpacePatch;
  return d;
}

double Domain::radius() const {
  if (kind_ == DomainKind::kBall || kind_ == DomainKind::kEllipsoid)
    return *std::max_element(axes_.begin(), axes_.end());
  throw Error("Domain::radius: only defined for balls and ellipsoids");
}

double Domain::r(const Point& x) const {
  switch (kind_) {
    case DomainKind::kBall:
      return distance(x, center_) - axes_[0];
    case DomainKind::kEllipsoid: {
      double s2 = 0.0;
      double g2 = 0.0;
      for (int k = 0; k < dim_; ++k) s2 += (x[k] / axes_[k]) * (x[k] / axes_[k]);
      const double s = std::sqrt(s2);
      if (s == 0.0) return -*std::min_element(axes_.begin(), axes_.end());
      for (int k = 0; k < dim_; ++k) {
        const double g = x[k] / (axes_[k] * axes_[k] * s);
        g2 += g * g;
      }
      return (s - 1.0) / std::sqrt(g2);
    }
    case DomainKind::kIntervalBox: {
      double v = -1e300;
      for (int k = 0; k < dim_; ++k) v = std::max({v, lo_[k] - x[k], x[k] - hi_[k]});
      return v;
    }
    case DomainKind::kHalfSpacePatch:
      return x[0];
  }
  return 0.0;
}

Point Domain::gradient(const Point& x) const {
  Point g(dim_);
  switch (kind_) {
    case DomainKind::kBall: {
      const Point d = x - center_;
      const double n = d.norm();
      if (n == 0.0) {
        g[0] = 1.0;
        return g;
      }
      return (1.0 / n) * d;
    }
    case DomainKind::kEllipsoid: {
      // r = rho/|grad rho| with rho = s - 1, s = |A^{-1} x|.
      double s2 = 0.0;
      for (int k = 0; k < dim_; ++k) s2 += (x[k] / axes_[k]) * (x[k] / axes_[k]);
      const double s = std::sqrt(s2);
      if (s == 0.0) {
        g[0] = 1.0;
        return g;
      }
      Point gr(dim_);
      for (int k = 0; k < dim_; ++k) gr[k] = x[k] / (axes_[k] * axes_[k] * s);
      const double gn = gr.norm();
      // H gr, with H_ij = delta_ij/(a_i^2 s) - x_i x_j/(a_i^2 a_j^2 s^3).
      double xg = 0.0;
      for (int k = 0; k < dim_; ++k) xg += x[k] * gr[k] / (axes_[k] * axes_[k]);
      Point hg(dim_);
      for (int k = 0; k < dim_; ++k)
        hg[k] = gr[k] / (axes_[k] * axes_[k] * s) - x[k] * xg / (axes_[k] * axes_[k] * s * s * s);
      const double rho = s - 1.0;
      const double dgn = 1.0 / gn;
      // grad(rho/|g|) = g/|g| - rho * (H g)/|g|^3.
      for (int k = 0; k < dim_; ++k) g[k] = gr[k] * dgn - rho * hg[k] * dgn * dgn * dgn;
      return g;
    }
    case DomainKind::kIntervalBox: {
      int best = 0;
      double v = -1e300;
      double sign = 1.0;
      for (int k = 0; k < dim_; ++k) {
        if (lo_[k] - x[k] > v) {
          v = lo_[k] - x[k];
          best = k;
          sign = -1.0;
        }
        if (x[k] - hi_[k] > v) {
          v = x[k] - hi_[k];
          best = k;
          sign = 1.0;
        }
      }
      g[best] = sign;
      return g;
    }
    case DomainKind::kHalfSpacePatch:
      g[0] = 1.0;
      return g;
  }
  return g;
}

double Domain::ray_exit(const Point& x, const Point& w) const {
  switch (kind_) {
    case DomainKind::kBall: {
      const Point d = x - center_;
      const double b = dot(d, w);
      const double c = dot(d, d) - axes_[0] * axes_[0];
      return -b + std::sqrt(std::max(0.0, b * b - c));
    }
    case DomainKind::kEllipsoid: {
      double qa = 0.0, qb = 0.0, qc = -1.0;
      for (int k = 0; k < dim_; ++k) {
        const double a2 = axes_[k] * axes_[k];
        qa += w[k] * w[k] / a2;
        qb += x[k] * w[k] / a2;
        qc += x[k] * x[k] / a2;
      }
      return (-qb + std::sqrt(std::max(0.0, qb * qb - qa * qc))) / qa;
    }
    case DomainKind::kIntervalBox:
    case DomainKind::kHalfSpacePatch: {
      double t = 1e300;
      for (int k = 0; k < dim_; ++k) {
        if (w[k] > 0.0) t = std::min(t, (hi_[k] - x[k]) / w[k]);
        if (w[k] < 0.0) t = std::min(t, (lo_[k] - x[k]) / w[k]);
      }
      return std::max(0.0, t);
    }
  }
  return 0.0;
}

// ------------------------------------------------------------------- frames

BoundaryFrame boundary_frame(const Domain& domain, const Point& point, double tolerance) {
  if (point.dim != domain.dim()) throw Error("boundary_frame: point dimension mismatch");
  BoundaryFrame f;
  f.point = point;
  switch (domain.kind()) {
    case DomainKind::kBall:
    case DomainKind::kEllipsoid:
    case DomainKind::kHalfSpacePatch:
      if (std::abs(domain.r(point)) > tolerance) throw Error("boundary_frame: point is not on the boundary");
      f.nu = domain.gradient(point);
      break;
    case DomainKind::kIntervalBox: {
      f.nu = Point(domain.dim());
      bool found = false;
      for (int k = 0; k < domain.dim() && !found; ++k) {
        if (std::abs(point[k] - domain.lower()[k]) <= tolerance) {
          f.nu[k] = -1.0;
          found = true;
        } else if (std::abs(point[k] - domain.upper()[k]) <= tolerance) {
          f.nu[k] = 1.0;
          found = true;
        }
      }
      if (!found || domain.r(point) > tolerance) throw Error("boundary_frame: point is not on the boundary");
      break;
    }
  }
  f.nu = (1.0 / f.nu.norm()) * f.nu;
  f.nu_flat = f.nu;
  if (domain.kind() == DomainKind::kEllipsoid) {
    Point inv(domain.dim());
    for (int k = 0; k < domain.dim(); ++k) inv[k] = point[k] / domain.semi_axes()[k];
    double det = 1.0;
    for (double a : domain.semi_axes()) det *= a;
    Point ainv_u(domain.dim());
    for (int k = 0; k < domain.dim(); ++k) ainv_u[k] = inv[k] / domain.semi_axes()[k];
    f.dS_weight = det * ainv_u.norm();
  }
  return f;
}

// --------------------------------------------------------------- quadrature

QuadratureRule quadrature(const Domain& domain, Region region, int level, std::optional<Exclusion> exclusion) {
  if (level < 0) throw Error("quadrature: level must be non-negative");
  QuadratureRule rule;
  switch (domain.kind()) {
    case DomainKind::kBall: {
      const double R = domain.radius();
      rule = unit_ball_rule(domain.dim(), region, level);
      const double scale = region == Region::kInterior ? std::pow(R, domain.dim()) : std::pow(R, domain.dim() - 1);
      for (size_t i = 0; i < rule.nodes.size(); ++i) {
        rule.nodes[i] = domain.center() + R * rule.nodes[i];
        rule.weights[i] *= scale;
      }
      break;
    }
    case DomainKind::kEllipsoid: {
      const auto& ax = domain.semi_axes();
      double det = 1.0;
      for (double a : ax) det *= a;
      rule = unit_ball_rule(domain.dim(), region, level);
      for (size_t i = 0; i < rule.nodes.size(); ++i) {
        const Point u = rule.nodes[i];
        Point x(domain.dim());
        Point n(domain.dim());
        for (int k = 0; k < domain.dim(); ++k) {
          x[k] = ax[k] * u[k];
          n[k] = u[k] / ax[k];
        }
        rule.nodes[i] = x;
        if (region == Region::kInterior) {
          rule.weights[i] *= det;
        } else {
          const double len = n.norm();
          rule.weights[i] *= det * len;
          rule.normals[i] = (1.0 / len) * n;
        }
      }
      break;
    }
    case DomainKind::kIntervalBox:
    case DomainKind::kHalfSpacePatch:
      rule = box_rule(domain, region, level);
      break;
  }
  rule.level = level;
  if (exclusion) rule = apply_exclusion(std::move(rule), *exclusion);
  return rule;
}

double node_spacing(const Domain& domain, int level) {
  const double n = static_cast<double>(kPointsPerPanel) * (1 << level);
  if (domain.kind() == DomainKind::kBall || domain.kind() == DomainKind::kEllipsoid) return domain.radius() / n;
  double w = 0.0;
  for (int k = 0; k < domain.dim(); ++k) w = std::max(w, domain.upper()[k] - domain.lower()[k]);
  return w / n;
}

QuadratureRule apply_exclusion(QuadratureRule rule, const Exclusion& exclusion) {
  QuadratureRule out;
  out.region = rule.region;
  out.level = rule.level;
  out.exclusion = exclusion;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    if (distance(rule.nodes[i], exclusion.center) < exclusion.radius) continue;
    out.nodes.push_back(rule.nodes[i]);
    out.weights.push_back(rule.weights[i]);
    if (!rule.normals.empty()) out.normals.push_back(rule.normals[i]);
  }
  return out;
}

double dist_boundary(const Domain& domain, const Point& y) {
  switch (domain.kind()) {
    case DomainKind::kBall:
      return std::max(0.0, domain.radius() - distance(y, domain.center()));
    case DomainKind::kEllipsoid:
      return std::abs(domain.r(y));
    case DomainKind::kIntervalBox: {
      double d = 1e300;
      for (int k = 0; k < domain.dim(); ++k)
        d = std::min({d, y[k] - domain.lower()[k], domain.upper()[k] - y[k]});
      return std::max(0.0, d);
    }
    case DomainKind::kHalfSpacePatch:
      return std::max(0.0, -y[0]);
  }
  return 0.0;
}

// ----------------------------------------------------------- form geometry

FormValue interior_product(const Point& v, const FormValue& f) {
  const int n = f.n();
  const std::vector<cplx> real = f.to_real();
  std::vector<cplx> out(real.size(), 0.0);
  for (Mask s = 0; s < real.size(); ++s) {
    if (real[s] == cplx(0.0)) continue;
    for (int k = 0; k < 2 * n; ++k) {
      if (!(s & (1u << k)) || v[k] == 0.0) continue;
      const int before = std::popcount(s & ((1u << k) - 1));
      out[s & ~(1u << k)] += (before % 2 == 0 ? 1.0 : -1.0) * v[k] * real[s];
    }
  }
  return FormValue::from_real(n, out);
}

FormValue pullback_boundary(const FormValue& f, const BoundaryFrame& frame) {
  const FormValue nu_flat = exterior::real_one_form(f.n(), frame.nu_flat);
  return f - wedge(nu_flat, interior_product(frame.nu, f));
}

cplx boundary_density(const FormValue& f, const BoundaryFrame& frame) {
  return exterior::top_density(wedge(exterior::real_one_form(f.n(), frame.nu_flat), f));
}

void write_csv(const QuadratureRule& rule, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_csv: cannot open " + path.string());
  const int m = rule.nodes.empty() ? 0 : rule.nodes[0].dim;
  for (int k = 0; k < m; ++k) out << 'x' << (k + 1) << ',';
  out << "weight\n";
  char buf[32];
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    for (int k = 0; k < m; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,", rule.nodes[i][k]);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", rule.weights[i]);
    out << buf;
  }
  if (!out) throw Error("write_csv: write failed for " + path.string());
}

}  // namespace fbv::geometry
