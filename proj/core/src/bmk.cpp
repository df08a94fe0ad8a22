#include "fbv/bmk.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace fbv::bmk {

using exterior::DifferentialForm;
using exterior::MultiIndex;
using geometry::Domain;
using geometry::QuadratureRule;

namespace {

double coefficient_norm(const std::vector<cplx>& v) {
  double s = 0.0;
  for (cplx c : v) s += std::norm(c);
  return std::sqrt(s);
}

void check_form(const DifferentialForm& f, int n, int q, const char* what) {
  if (f.n() != n) throw Error(std::string(what) + ": form dimension does not match the domain");
  if (!(f.bidegree() == exterior::Bidegree{0, q}))
    throw Error(std::string(what) + ": expected a (0," + std::to_string(q) + ")-form");
}

int complex_dim(const Domain& domain) {
  if (domain.kind() != geometry::DomainKind::kBall && domain.kind() != geometry::DomainKind::kEllipsoid)
    throw Error("bmk: only balls and ellipsoids in C^n are supported");
  return domain.dim() / 2;
}

}  // namespace

// ------------------------------------------------------------------- Kernel

Kernel::Kernel(int n, int q) : n_(n), q_(q) {
  if (n < 1 || n > exterior::kMaxComplexDim) throw Error("Kernel: n out of range");
  if (q < -1 || q > n) throw Error("Kernel: q must lie in -1..n");
  if (q < 0) return;
  constant_ = numeric::factorial(n - 1) / (std::pow(2.0, q + 1) * std::pow(kPi, n));
  js_ = MultiIndex::all(n, q);
  for (size_t a = 0; a < js_.size(); ++a) {
    const Mask jmask = js_[a].mask();
    for (int j = 0; j < n; ++j) {
      if (jmask & (1u << j)) continue;
      const MultiIndex L = MultiIndex::from_mask(jmask | (1u << j), n);
      std::vector<int> order{j + 1};
      order.insert(order.end(), js_[a].entries().begin(), js_[a].entries().end());
      const int sign = exterior::eps_sign(L.entries(), order);
      terms_.push_back({static_cast<int>(a), j, sign, FormValue::basis(n, L.mask()).hodge_star()});
    }
  }
  const int full = 1 << n;
  for (const Term& t : terms_) {
    for (Mask K = 0; K < static_cast<Mask>(full); ++K) {
      const FormValue dzbar_k = FormValue::basis(n, K << n);
      if (std::popcount(K) == q + 1) {
        const cplx kappa = exterior::top_density(wedge(dzbar_k, t.star));
        if (std::abs(kappa) > 1e-14)
          volume_.push_back({t.J, t.j, K << n, -1, constant_ * t.sign * kappa});
      }
      if (std::popcount(K) == q) {
        const FormValue fk = wedge(dzbar_k, t.star);
        for (int k = 0; k < 2 * n; ++k) {
          const cplx tau = exterior::top_density(wedge(FormValue::dx(n, k + 1), fk));
          if (std::abs(tau) > 1e-14) boundary_.push_back({t.J, t.j, K << n, k, constant_ * t.sign * tau});
        }
      }
    }
  }
}

std::vector<FormValue> Kernel::eval(const Point& zeta, const Point& z) const {
  if (zeta.dim != 2 * n_ || z.dim != 2 * n_) throw Error("Kernel::eval: points must lie in C^n");
  std::vector<FormValue> out(js_.size(), FormValue(n_));
  if (q_ < 0) return out;
  double r2 = 0.0;
  for (int k = 0; k < 2 * n_; ++k) r2 += (zeta[k] - z[k]) * (zeta[k] - z[k]);
  if (r2 == 0.0) throw Error("Kernel::eval: kernel is singular at zeta = z");
  const double scale = constant_ / std::pow(r2, n_);
  for (const Term& t : terms_) {
    const cplx wbar = std::conj(zeta.z(t.j + 1) - z.z(t.j + 1));
    out[t.J] += (scale * t.sign * wbar) * t.star;
  }
  return out;
}

double Kernel::norm(const Point& zeta, const Point& z) const {
  double s = 0.0;
  for (const FormValue& f : eval(zeta, z)) s += exterior::norm(f) * exterior::norm(f);
  return std::sqrt(s * std::pow(2.0, std::max(q_, 0)));
}

std::vector<cplx> Kernel::volume_density(const FormValue& g, const Point& zeta, const Point& z) const {
  std::vector<cplx> out(js_.size(), 0.0);
  if (q_ < 0) return out;
  double r2 = 0.0;
  for (int k = 0; k < 2 * n_; ++k) r2 += (zeta[k] - z[k]) * (zeta[k] - z[k]);
  const double inv = 1.0 / std::pow(r2, n_);
  for (const DensityEntry& e : volume_) {
    const cplx gk = g[e.K];
    if (gk == cplx(0.0)) continue;
    out[e.J] += e.c * std::conj(zeta.z(e.j + 1) - z.z(e.j + 1)) * gk * inv;
  }
  return out;
}

std::vector<cplx> Kernel::boundary_density(const FormValue& f, const Point& nu, const Point& zeta,
                                           const Point& z) const {
  std::vector<cplx> out(js_.size(), 0.0);
  if (q_ < 0) return out;
  double r2 = 0.0;
  for (int k = 0; k < 2 * n_; ++k) r2 += (zeta[k] - z[k]) * (zeta[k] - z[k]);
  const double inv = 1.0 / std::pow(r2, n_);
  for (const DensityEntry& e : boundary_) {
    const cplx fk = f[e.K];
    if (fk == cplx(0.0) || nu[e.k] == 0.0) continue;
    out[e.J] += e.c * nu[e.k] * std::conj(zeta.z(e.j + 1) - z.z(e.j + 1)) * fk * inv;
  }
  return out;
}

// --------------------------------------------------------- singular rules

namespace {

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double local_cutoff(double s, double local_radius, double start) {
  return 1.0 - smooth_step((s / local_radius - start) / (1.0 - start));
}

double local_radius(const Domain& domain, const Point& z, const SingularQuadratureConfig& config) {
  return config.local_fraction * geometry::dist_boundary(domain, z);
}

double local_spacing(double local_radius, int level) { return local_radius / (4.0 * (1 << level)); }

QuadratureRule singular_rule(const Domain& domain, const Point& z, int level, double exclusion, double local,
                             double start) {
  const int n = complex_dim(domain);
  if (!domain.contains(z)) throw Error("singular_rule: centre must lie inside the domain");
  if (level < 0) throw Error("singular_rule: level must be non-negative");
  if (!(local > exclusion) || local > geometry::dist_boundary(domain, z))
    throw Error("singular_rule: need exclusion < local radius <= dist(z, bD)");
  const int panels = 1 << level;
  const auto& radial = numeric::gauss_legendre(4);
  QuadratureRule rule;
  rule.level = level;
  rule.exclusion = geometry::Exclusion{z, exclusion};

  std::vector<Point> dirs;
  std::vector<double> dir_weights;
  if (n == 1) {
    const int na = 16 * panels;
    for (int k = 0; k < na; ++k) {
      const double t = 2.0 * kPi * k / na;
      dirs.push_back(Point{std::cos(t), std::sin(t)});
      dir_weights.push_back(2.0 * kPi / na);
    }
  } else {
    const auto sphere = geometry::quadrature(Domain::ball(4), geometry::Region::kBoundary, level);
    dirs = sphere.nodes;
    dir_weights = sphere.weights;
  }
  const int m = 2 * n;
  const double width = (local - exclusion) / panels;
  for (size_t d = 0; d < dirs.size(); ++d) {
    for (int p = 0; p < panels; ++p) {
      const double a = exclusion + p * width;
      for (size_t i = 0; i < radial.nodes.size(); ++i) {
        const double s = a + 0.5 * width * (radial.nodes[i] + 1.0);
        const double chi = local_cutoff(s, local, start);
        if (chi == 0.0) continue;
        rule.nodes.push_back(z + s * dirs[d]);
        rule.weights.push_back(chi * dir_weights[d] * 0.5 * width * radial.weights[i] * std::pow(s, m - 1));
      }
    }
  }
  const auto outer = geometry::quadrature(domain, geometry::Region::kInterior, level);
  for (size_t i = 0; i < outer.size(); ++i) {
    const double dz = distance(outer.nodes[i], z);
    const double chi = local_cutoff(dz, local, start);
    if (chi == 1.0 || dz < exclusion) continue;
    rule.nodes.push_back(outer.nodes[i]);
    rule.weights.push_back((1.0 - chi) * outer.weights[i]);
  }
  return rule;
}

}  // namespace

void validate(const SingularQuadratureConfig& config) {
  if (config.base_level < 0) throw Error("bmk config: base_level must be non-negative");
  if (config.refinement_steps < 1) throw Error("bmk config: refinement_steps must be at least 1");
  if (config.boundary_level < -1) throw Error("bmk config: boundary_level must be -1 (auto) or non-negative");
  if (!(config.exclusion_factor > 0.0) || config.exclusion_factor >= 4.0)
    throw Error("bmk config: exclusion_factor must lie in (0, 4)");
  if (!(config.fd_ratio > 0.0) || config.fd_ratio > 1.0) throw Error("bmk config: fd_ratio must lie in (0, 1]");
  if (!(config.local_fraction > 0.0) || config.local_fraction > 0.8)
    throw Error("bmk config: local_fraction must lie in (0, 0.8]");
  if (!(config.cutoff_start >= 0.0) || config.cutoff_start >= 1.0)
    throw Error("bmk config: cutoff_start must lie in [0, 1)");
  if (!(config.margin > 0.0) || config.margin >= 1.0) throw Error("bmk config: margin must lie in (0, 1)");
}

QuadratureRule centred_rule(const Domain& domain, const Point& z, int level, const SingularQuadratureConfig& config) {
  validate(config);
  const double local = local_radius(domain, z, config);
  return singular_rule(domain, z, level, config.exclusion_factor * local_spacing(local, level), local,
                        config.cutoff_start);
}

double exclusion_radius(const Domain& domain, const Point& z, int level, const SingularQuadratureConfig& config) {
  return config.exclusion_factor * local_spacing(local_radius(domain, z, config), level);
}

namespace {

std::vector<cplx> volume_at(const DifferentialForm& g, int q, const Domain& domain, const Point& z, int level,
                            const SingularQuadratureConfig& config, double local) {
  const int n = complex_dim(domain);
  const Kernel kernel(n, q);
  if (q < 0) return {};
  check_form(g, n, q + 1, "op_volume");
  std::vector<cplx> acc(kernel.z_indices().size(), 0.0);
  if (g.is_zero()) return acc;
  const QuadratureRule rule =
      singular_rule(domain, z, level, config.exclusion_factor * local_spacing(local, level), local,
                        config.cutoff_start);
  for (size_t i = 0; i < rule.size(); ++i) {
    const auto d = kernel.volume_density(g(rule.nodes[i]), rule.nodes[i], z);
    for (size_t a = 0; a < acc.size(); ++a) acc[a] += rule.weights[i] * d[a];
  }
  return acc;
}

}  // namespace

std::vector<cplx> op_volume_level(const DifferentialForm& g, int q, const Domain& domain, const Point& z, int level,
                                  const SingularQuadratureConfig& config) {
  return volume_at(g, q, domain, z, level, config, local_radius(domain, z, config));
}

VolumeResult op_volume(const DifferentialForm& g, int q, const Domain& domain, const Point& z,
                       const SingularQuadratureConfig& config) {
  validate(config);
  VolumeResult out;
  out.near_boundary = geometry::dist_boundary(domain, z) < config.margin * domain.radius();
  for (int s = 0; s < config.refinement_steps; ++s) {
    out.levels.push_back(op_volume_level(g, q, domain, z, config.base_level + s, config));
    if (s > 0) {
      std::vector<cplx> diff(out.levels[s].size());
      for (size_t a = 0; a < diff.size(); ++a) diff[a] = out.levels[s][a] - out.levels[s - 1][a];
      out.deltas.push_back(max_abs(diff));
    }
  }
  out.value = out.levels.back();
  return out;
}

std::vector<cplx> op_boundary(const DifferentialForm& f_b, int q, const Domain& domain, const Point& z,
                              const QuadratureRule& rule) {
  const int n = complex_dim(domain);
  if (!domain.contains(z)) throw Error("op_boundary: z must lie strictly inside the domain");
  const Kernel kernel(n, q);
  if (q < 0) return {};
  check_form(f_b, n, q, "op_boundary");
  if (rule.normals.size() != rule.nodes.size()) throw Error("op_boundary: boundary rule without normals");
  std::vector<cplx> acc(kernel.z_indices().size(), 0.0);
  for (size_t i = 0; i < rule.size(); ++i) {
    const auto d = kernel.boundary_density(f_b(rule.nodes[i]), rule.normals[i], rule.nodes[i], z);
    for (size_t a = 0; a < acc.size(); ++a) acc[a] += rule.weights[i] * d[a];
  }
  return acc;
}

std::vector<cplx> op_boundary(const DifferentialForm& f_b, int q, const Domain& domain, const Point& z,
                              int boundary_level) {
  return op_boundary(f_b, q, domain, z, geometry::quadrature(domain, geometry::Region::kBoundary, boundary_level));
}

std::vector<cplx> potential_dbar(const DifferentialForm& f, const Domain& domain, const Point& z, int level,
                                 const SingularQuadratureConfig& config) {
  const int n = complex_dim(domain);
  const int q = f.bidegree().q;
  const Kernel target(n, q);
  std::vector<cplx> out(target.z_indices().size(), 0.0);
  if (q == 0 || f.is_zero()) return out;
  const Kernel source(n, q - 1);
  // Every shifted point reuses the local radius of z so the rules move rigidly.
  const double local = local_radius(domain, z, config);
  const double h = config.fd_ratio * config.exclusion_factor * local_spacing(local, level);
  for (int j = 0; j < n; ++j) {
    std::array<std::vector<cplx>, 4> samples;
    for (int s = 0; s < 4; ++s) {
      Point p = z;
      p[2 * j + s / 2] += (s % 2 == 0 ? h : -h);
      samples[s] = volume_at(f, q - 1, domain, p, level, config, local);
    }
    for (size_t a = 0; a < source.z_indices().size(); ++a) {
      const Mask imask = source.z_indices()[a].mask();
      const int sign = exterior::wedge_sign(1u << j, imask);
      if (sign == 0) continue;
      const cplx dx = (samples[0][a] - samples[1][a]) / (2.0 * h);
      const cplx dy = (samples[2][a] - samples[3][a]) / (2.0 * h);
      const Mask jmask = imask | (1u << j);
      const auto& js = target.z_indices();
      const auto it = std::find_if(js.begin(), js.end(), [&](const MultiIndex& m) { return m.mask() == jmask; });
      out[it - js.begin()] += static_cast<double>(sign) * 0.5 * (dx + kI * dy);
    }
  }
  return out;
}

ReproduceReport reproduce_residual(const DifferentialForm& f, const DifferentialForm& f_b,
                                   const DifferentialForm& dbar_f, const Domain& domain,
                                   const std::vector<Point>& points, const SingularQuadratureConfig& config) {
  const int n = complex_dim(domain);
  validate(config);
  const int q = f.bidegree().q;
  check_form(f, n, q, "reproduce_residual");
  check_form(f_b, n, q, "reproduce_residual");
  check_form(dbar_f, n, q + 1, "reproduce_residual");
  const Kernel kernel(n, q);
  const int boundary_level = config.boundary_level >= 0 ? config.boundary_level : (n == 1 ? 7 : 3);
  const auto boundary_rule = geometry::quadrature(domain, geometry::Region::kBoundary, boundary_level);
  ReproduceReport report;
  for (const Point& z : points) {
    if (geometry::dist_boundary(domain, z) < config.margin * domain.radius()) {
      report.skipped.push_back(z);
      continue;
    }
    const FormValue fz = f(z);
    const auto bd = op_boundary(f_b, q, domain, z, boundary_rule);
    double last = 0.0;
    for (int s = 0; s < config.refinement_steps; ++s) {
      const int level = config.base_level + s;
      const auto vol = op_volume_level(dbar_f, q, domain, z, level, config);
      const auto pot = potential_dbar(f, domain, z, level, config);
      ResidualRow row;
      row.reproduced.resize(bd.size());
      std::vector<cplx> diff(bd.size());
      for (size_t a = 0; a < diff.size(); ++a) {
        row.reproduced[a] = bd[a] - vol[a] - pot[a];
        diff[a] = fz[kernel.z_indices()[a].mask() << n] - row.reproduced[a];
      }
      row.z = z;
      row.level = level;
      row.residual = coefficient_norm(diff);
      row.boundary_term_norm = coefficient_norm(bd);
      row.volume_term_norm = coefficient_norm(vol);
      row.potential_dbar_norm = coefficient_norm(pot);
      report.rows.push_back(row);
      last = row.residual;
    }
    report.final_residuals.push_back(last);
  }
  return report;
}

std::vector<double> level_deltas(const std::vector<ResidualRow>& rows) {
  std::vector<double> out;
  for (size_t i = 1; i < rows.size(); ++i) {
    std::vector<cplx> d(rows[i].reproduced.size());
    for (size_t a = 0; a < d.size(); ++a) d[a] = rows[i].reproduced[a] - rows[i - 1].reproduced[a];
    out.push_back(max_abs(d));
  }
  return out;
}

std::vector<double> sup_residuals(const ReproduceReport& report, int levels) {
  if (levels < 1 || report.rows.size() % levels != 0) throw Error("sup_residuals: rows do not split into levels");
  std::vector<double> out(levels, 0.0);
  for (size_t i = 0; i < report.rows.size(); ++i) out[i % levels] = std::max(out[i % levels], report.rows[i].residual);
  return out;
}

std::vector<double> sup_deltas(const ReproduceReport& report, int levels) {
  if (levels < 1 || report.rows.size() % levels != 0) throw Error("sup_deltas: rows do not split into levels");
  std::vector<double> out(levels - 1, 0.0);
  for (size_t s = 0; s < report.rows.size(); s += levels) {
    const std::vector<ResidualRow> one(report.rows.begin() + s, report.rows.begin() + s + levels);
    const auto d = level_deltas(one);
    for (size_t i = 0; i < d.size(); ++i) out[i] = std::max(out[i], d[i]);
  }
  return out;
}

double max_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (cplx c : v) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace fbv::bmk
