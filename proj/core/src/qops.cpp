#include "fbv/qops.hpp"

#include <algorithm>
#include <cmath>

namespace fbv::qops {

using exterior::DifferentialForm;
using exterior::FormValue;
using exterior::MultiIndex;
using geometry::Domain;
using geometry::QuadratureRule;
using geometry::Region;

FirstOrderOperator::FirstOrderOperator(std::vector<Field> a, Field b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.empty() || static_cast<int>(a_.size()) > kMaxRealDim) throw Error("FirstOrderOperator: bad dimension");
}

Field FirstOrderOperator::apply(const Field& u) const {
  Field out = b_ * u;
  for (int j = 0; j < dim(); ++j) {
    if (a_[j].is_zero()) continue;
    out = out + a_[j] * u.derivative(j);
  }
  return out;
}

FirstOrderOperator formal_adjoint(const FirstOrderOperator& q) {
  std::vector<Field> a;
  Field b = conj(q.b());
  for (int j = 0; j < q.dim(); ++j) {
    const Field aj = conj(q.a()[j]);
    a.push_back(-aj);
    b = b - aj.derivative(j);
  }
  return FirstOrderOperator(std::move(a), b);
}

cplx PrincipalSymbol::operator()(const Point& x, const Point& xi) const {
  if (xi.dim != static_cast<int>(a_.size())) throw Error("PrincipalSymbol: covector dimension mismatch");
  cplx s = 0.0;
  for (size_t j = 0; j < a_.size(); ++j)
    if (xi[static_cast<int>(j)] != 0.0) s += a_[j](x) * xi[static_cast<int>(j)];
  return kI * s;
}

PrincipalSymbol principal_symbol(const FirstOrderOperator& q) { return PrincipalSymbol(q.a()); }

FormValue dbar_symbol(const Point& xi, const FormValue& u) {
  const int n = u.n();
  if (xi.dim != 2 * n) throw Error("dbar_symbol: covector dimension mismatch");
  FormValue xi01(n);
  for (int j = 1; j <= n; ++j) xi01 += (0.5 * cplx(xi[2 * j - 2], xi[2 * j - 1])) * FormValue::dzbar(n, j);
  return kI * wedge(xi01, u);
}

namespace {

void check_dim(const Domain& domain, int m, const char* what) {
  if (domain.dim() != m) throw Error(std::string(what) + ": operator dimension does not match the domain");
}

// L^2(D) norm from pointwise squared norms on the interior rule.
double l2_on_rule(const QuadratureRule& interior, const std::function<double(const Point&)>& norm2) {
  double s = 0.0;
  for (size_t i = 0; i < interior.size(); ++i) s += interior.weights[i] * norm2(interior.nodes[i]);
  return std::sqrt(s);
}

void finish(ResidualReport& report) {
  report.max_residual = 0.0;
  for (const auto& r : report.records) report.max_residual = std::max(report.max_residual, r.residual);
}

struct Frame {
  Point centre;
  std::vector<double> scale;
};

Frame domain_frame(const Domain& domain) {
  Frame f{Point(domain.dim()), std::vector<double>(domain.dim(), 1.0)};
  switch (domain.kind()) {
    case geometry::DomainKind::kBall:
      f.centre = domain.center();
      std::fill(f.scale.begin(), f.scale.end(), domain.radius());
      break;
    case geometry::DomainKind::kEllipsoid:
      f.scale = domain.semi_axes();
      break;
    case geometry::DomainKind::kIntervalBox:
    case geometry::DomainKind::kHalfSpacePatch:
      for (int k = 0; k < domain.dim(); ++k) {
        f.centre[k] = 0.5 * (domain.lower()[k] + domain.upper()[k]);
        f.scale[k] = 0.5 * (domain.upper()[k] - domain.lower()[k]);
      }
      break;
  }
  return f;
}

void exponents(int m, int max_degree, std::vector<int>& current, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == m) {
    out.push_back(current);
    return;
  }
  int used = 0;
  for (int e : current) used += e;
  for (int e = 0; e + used <= max_degree; ++e) {
    current.push_back(e);
    exponents(m, max_degree, current, out);
    current.pop_back();
  }
}

}  // namespace

cplx pairing(const Field& u, const Field& v, const Domain& domain, int level) {
  const auto rule = geometry::quadrature(domain, Region::kInterior, level);
  return rule.integrate([&](const Point& p) { return u(p) * std::conj(v(p)); });
}

cplx green_stokes_defect(const FirstOrderOperator& q, const Field& u, const Field& v, const Domain& domain,
                         int level) {
  check_dim(domain, q.dim(), "green_stokes_residual");
  const FirstOrderOperator adj = formal_adjoint(q);
  const Field qu = q.apply(u);
  const Field qv = adj.apply(v);
  const auto interior = geometry::quadrature(domain, Region::kInterior, level);
  const auto boundary = geometry::quadrature(domain, Region::kBoundary, level);
  const PrincipalSymbol sigma = principal_symbol(q);
  const cplx lhs =
      interior.integrate([&](const Point& p) { return qu(p) * std::conj(v(p)) - u(p) * std::conj(qv(p)); });
  cplx rhs = 0.0;
  for (size_t i = 0; i < boundary.size(); ++i) {
    const Point& p = boundary.nodes[i];
    rhs += boundary.weights[i] * (sigma(p, boundary.normals[i]) / kI) * u(p) * std::conj(v(p));
  }
  return lhs - rhs;
}

double green_stokes_residual(const FirstOrderOperator& q, const Field& u, const Field& v, const Domain& domain,
                             int level) {
  return std::abs(green_stokes_defect(q, u, v, domain, level));
}

Field boundary_adapted_bump(const Domain& domain) {
  if (domain.kind() != geometry::DomainKind::kHalfSpacePatch) return Field(1.0);
  const auto& lo = domain.lower();
  const auto& hi = domain.upper();
  // x_1 in [lo_1, 0]: t = x_1 / lo_1 is 0 on the true boundary and 1 on the cut face.
  const Field t1 = Field::coordinate(0) * Field(1.0 / lo[0]);
  Field out = pow(Field(1.0) - t1 * t1, 2);
  for (int k = 1; k < domain.dim(); ++k) {
    const Field t = (Field::coordinate(k) - Field(0.5 * (lo[k] + hi[k]))) * Field(2.0 / (hi[k] - lo[k]));
    out = out * pow(Field(1.0) - t * t, 2);
  }
  return out;
}

Field interior_bump(const Domain& domain) {
  const Frame f = domain_frame(domain);
  const bool box = domain.kind() == geometry::DomainKind::kIntervalBox ||
                   domain.kind() == geometry::DomainKind::kHalfSpacePatch;
  const double inradius = geometry::dist_boundary(domain, f.centre) / std::sqrt(static_cast<double>(domain.dim()));
  Field out(1.0);
  for (int k = 0; k < domain.dim(); ++k) {
    const double h = 0.5 * (box ? f.scale[k] : inradius);
    out = out * window((Field::coordinate(k) - Field(f.centre[k])) * Field(1.0 / h), 4);
  }
  return out;
}

std::vector<Field> test_family(const Domain& domain, const TestFamilyOptions& options) {
  if (options.size < 1) throw Error("test_family: size must be positive");
  if (options.max_degree < 0) throw Error("test_family: max_degree must be non-negative");
  const int m = domain.dim();
  const Frame frame = domain_frame(domain);
  std::vector<Field> y;
  for (int k = 0; k < m; ++k) y.push_back((Field::coordinate(k) - Field(frame.centre[k])) * Field(1.0 / frame.scale[k]));
  std::vector<std::vector<int>> exps;
  std::vector<int> cur;
  exponents(m, options.max_degree, cur, exps);
  std::stable_sort(exps.begin(), exps.end(), [](const auto& a, const auto& b) {
    int da = 0, db = 0;
    for (int e : a) da += e;
    for (int e : b) db += e;
    return da < db;
  });
  std::vector<Field> monomials;
  for (const auto& e : exps) {
    Field p(1.0);
    for (int k = 0; k < m; ++k) p = p * pow(y[k], e[k]);
    monomials.push_back(p);
  }
  const Field b = boundary_adapted_bump(domain);
  std::vector<Field> out;
  numeric::Rng rng(options.seed);
  for (int k = 0; k < options.size; ++k) {
    if (k < static_cast<int>(monomials.size())) {
      out.push_back(monomials[k] * b);
      continue;
    }
    Field p(0.0);
    for (const Field& mono : monomials) p = p + Field(cplx(rng.normal(), rng.normal()) / std::sqrt(2.0)) * mono;
    out.push_back(p * b);
  }
  return out;
}

ResidualReport weak_bv_residual(const FirstOrderOperator& q, const WeakBVCandidate& candidate,
                                const std::vector<Field>& family, const Domain& domain, int level) {
  if (family.empty()) throw Error("weak_bv_residual: empty test family");
  check_dim(domain, q.dim(), "weak_bv_residual");
  const FirstOrderOperator adj = formal_adjoint(q);
  const PrincipalSymbol sigma = principal_symbol(q);
  const auto interior = geometry::quadrature(domain, Region::kInterior, level);
  const auto boundary = geometry::quadrature(domain, Region::kBoundary, level);
  std::vector<cplx> u(interior.size()), qu(interior.size()), ub(boundary.size());
  for (size_t i = 0; i < interior.size(); ++i) {
    u[i] = candidate.u(interior.nodes[i]);
    qu[i] = candidate.qu(interior.nodes[i]);
  }
  for (size_t i = 0; i < boundary.size(); ++i)
    ub[i] = (sigma(boundary.nodes[i], boundary.normals[i]) / kI) * candidate.u_b(boundary.nodes[i]);
  ResidualReport report;
  for (size_t t = 0; t < family.size(); ++t) {
    const Field& phi = family[t];
    const Field qphi = adj.apply(phi);
    cplx r = 0.0;
    for (size_t i = 0; i < interior.size(); ++i) {
      const Point& p = interior.nodes[i];
      r += interior.weights[i] * (qu[i] * std::conj(phi(p)) - u[i] * std::conj(qphi(p)));
    }
    for (size_t i = 0; i < boundary.size(); ++i) r -= boundary.weights[i] * ub[i] * std::conj(phi(boundary.nodes[i]));
    const double norm = l2_on_rule(interior, [&](const Point& p) { return std::norm(phi(p)); });
    report.records.push_back({static_cast<int>(t), norm > 0.0 ? std::abs(r) / norm : std::abs(r), level});
  }
  finish(report);
  return report;
}

std::vector<DifferentialForm> form_test_family(int n, int q, const Domain& domain, const TestFamilyOptions& options) {
  if (domain.dim() != 2 * n) throw Error("form_test_family: domain is not in C^n");
  if (q < 0 || q > n - 1) throw Error("form_test_family: need 0 <= q <= n-1");
  const auto scalars = test_family(domain, options);
  const auto js = MultiIndex::all(n, n - q - 1);
  std::vector<int> all(n);
  for (int j = 0; j < n; ++j) all[j] = j + 1;
  const MultiIndex full(all, n);
  std::vector<DifferentialForm> out;
  for (size_t k = 0; k < scalars.size(); ++k) {
    DifferentialForm phi(n, {n, n - q - 1});
    phi.set(full, js[k % js.size()], scalars[k]);
    out.push_back(phi);
  }
  return out;
}

namespace {

void check_dbar_inputs(const DifferentialForm& f, const DifferentialForm& dbar_f, const DifferentialForm& f_b,
                       const Domain& domain, const std::vector<DifferentialForm>& family) {
  const int n = f.n();
  if (domain.dim() != 2 * n) throw Error("dbar_bv_residual: domain is not in C^n");
  if (family.empty()) throw Error("dbar_bv_residual: empty test family");
  const int q = f.bidegree().q;
  if (!(f.bidegree() == exterior::Bidegree{0, q})) throw Error("dbar_bv_residual: f must be a (0,q)-form");
  if (!(dbar_f.bidegree() == exterior::Bidegree{0, q + 1}) || dbar_f.n() != n)
    throw Error("dbar_bv_residual: dbar_f must be a (0,q+1)-form");
  if (!(f_b.bidegree() == exterior::Bidegree{0, q}) || f_b.n() != n)
    throw Error("dbar_bv_residual: f_b must be a (0,q)-form");
  for (const auto& phi : family)
    if (!(phi.bidegree() == exterior::Bidegree{n, n - q - 1}) || phi.n() != n)
      throw Error("dbar_bv_residual: test forms must have bidegree (n, n-q-1)");
}

double form_l2(const DifferentialForm& phi, const QuadratureRule& interior) {
  return l2_on_rule(interior, [&](const Point& p) {
    const double a = exterior::norm(phi(p));
    return a * a;
  });
}

FormValue dbar_r(const Point& nu, int n) {
  FormValue out(n);
  for (int j = 1; j <= n; ++j) out += (0.5 * cplx(nu[2 * j - 2], nu[2 * j - 1])) * FormValue::dzbar(n, j);
  return out;
}

}  // namespace

ResidualReport dbar_bv_residual(const DifferentialForm& f, const DifferentialForm& dbar_f,
                                const DifferentialForm& f_b, const Domain& domain,
                                const std::vector<DifferentialForm>& family, int level) {
  check_dbar_inputs(f, dbar_f, f_b, domain, family);
  const int q = f.bidegree().q;
  const double sign = q % 2 == 0 ? 1.0 : -1.0;
  const auto interior = geometry::quadrature(domain, Region::kInterior, level);
  const auto boundary = geometry::quadrature(domain, Region::kBoundary, level);
  ResidualReport report;
  for (size_t t = 0; t < family.size(); ++t) {
    const DifferentialForm& phi = family[t];
    const DifferentialForm dphi = phi.dbar();
    cplx r = 0.0;
    if (!f.is_zero() || !dbar_f.is_zero()) {
      for (size_t i = 0; i < interior.size(); ++i) {
        const Point& p = interior.nodes[i];
        const FormValue ph = phi(p);
        r += interior.weights[i] *
             (exterior::top_density(wedge(dbar_f(p), ph)) + sign * exterior::top_density(wedge(f(p), dphi(p))));
      }
    }
    if (!f_b.is_zero()) {
      for (size_t i = 0; i < boundary.size(); ++i) {
        const Point& p = boundary.nodes[i];
        const geometry::BoundaryFrame frame{p, boundary.normals[i], boundary.normals[i], 1.0};
        r -= boundary.weights[i] * geometry::boundary_density(wedge(f_b(p), phi(p)), frame);
      }
    }
    const double norm = form_l2(phi, interior);
    report.records.push_back({static_cast<int>(t), norm > 0.0 ? std::abs(r) / norm : std::abs(r), level});
  }
  finish(report);
  return report;
}

ResidualReport dbar_weak_bv_residual(const DifferentialForm& f, const DifferentialForm& dbar_f,
                                     const DifferentialForm& f_b, const Domain& domain,
                                     const std::vector<DifferentialForm>& family, int level) {
  check_dbar_inputs(f, dbar_f, f_b, domain, family);
  const int n = f.n();
  const int q = f.bidegree().q;
  const double sign = (q + 1) % 2 == 0 ? 1.0 : -1.0;
  const auto interior = geometry::quadrature(domain, Region::kInterior, level);
  const auto boundary = geometry::quadrature(domain, Region::kBoundary, level);
  ResidualReport report;
  for (size_t t = 0; t < family.size(); ++t) {
    const DifferentialForm g = Field(sign) * family[t].conj().hodge_star();
    const DifferentialForm adj_g = Field(-1.0) * g.hodge_star().del().hodge_star();
    cplx r = 0.0;
    if (!f.is_zero() || !dbar_f.is_zero()) {
      for (size_t i = 0; i < interior.size(); ++i) {
        const Point& p = interior.nodes[i];
        r += interior.weights[i] * (exterior::inner(dbar_f(p), g(p)) - exterior::inner(f(p), adj_g(p)));
      }
    }
    if (!f_b.is_zero()) {
      for (size_t i = 0; i < boundary.size(); ++i) {
        const Point& p = boundary.nodes[i];
        r -= boundary.weights[i] * exterior::inner(wedge(dbar_r(boundary.normals[i], n), f_b(p)), g(p));
      }
    }
    const double norm = form_l2(g, interior);
    report.records.push_back({static_cast<int>(t), norm > 0.0 ? std::abs(r) / norm : std::abs(r), level});
  }
  finish(report);
  return report;
}

EquivalenceReport equivalence_check(const DifferentialForm& f, const DifferentialForm& dbar_f,
                                    const DifferentialForm& f_b, const Domain& domain,
                                    const std::vector<DifferentialForm>& family, int level) {
  EquivalenceReport out;
  out.wedge_form = dbar_bv_residual(f, dbar_f, f_b, domain, family, level);
  out.adjoint_form = dbar_weak_bv_residual(f, dbar_f, f_b, domain, family, level);
  for (size_t t = 0; t < family.size(); ++t)
    out.max_gap = std::max(out.max_gap,
                           std::abs(out.wedge_form.records[t].residual - out.adjoint_form.records[t].residual));
  return out;
}

NormalTangentialSplit normal_tangential_split(const FirstOrderOperator& q, const geometry::BoundaryFrame& frame) {
  if (frame.nu.dim != q.dim()) throw Error("normal_tangential_split: frame dimension mismatch");
  for (int k = 0; k < q.dim(); ++k)
    if (std::abs(frame.nu[k] - (k == 0 ? 1.0 : 0.0)) > 1e-12)
      throw Error("normal_tangential_split: needs the half-space frame with normal e_1");
  const FirstOrderOperator adj = formal_adjoint(q);
  std::vector<Field> a = adj.a();
  const Field normal = -a[0];
  a[0] = Field(0.0);
  return {normal, FirstOrderOperator(std::move(a), adj.b())};
}

}  // namespace fbv::qops
