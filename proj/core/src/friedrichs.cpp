#include "fbv/friedrichs.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <ostream>

namespace fbv::friedrichs {

namespace {

constexpr double kBoxTol = 1e-12;

double bump(double s) { return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0; }

double beta(double u) { return (u > 0.0 && u < 1.0) ? bump((2.0 * u - 1.0) * (2.0 * u - 1.0)) : 0.0; }

template <class Fn>
double gauss_integral(double lo, double hi, int panels, int points, Fn&& fn) {
  const auto rule = numeric::composite_gauss(lo, hi, panels, points);
  double s = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * fn(rule.nodes[i]);
  return s;
}

// Tensor product of `rule` over `d` axes; calls fn(point, weight).
template <class Fn>
void tensor_rule(int d, const numeric::GaussRule& rule, Fn&& fn) {
  const size_t n = rule.nodes.size();
  size_t total = 1;
  for (int a = 0; a < d; ++a) total *= n;
  for (size_t flat = 0; flat < total; ++flat) {
    Point u(d);
    double w = 1.0;
    size_t rest = flat;
    for (int a = 0; a < d; ++a) {
      const size_t i = rest % n;
      rest /= n;
      u[a] = rule.nodes[i];
      w *= rule.weights[i];
    }
    fn(u, w);
  }
}

void normalize(KernelNodes& k) {
  double s = 0.0;
  for (double w : k.weights) s += w;
  if (!(s > 0.0)) throw Error("kernel nodes carry no mass");
  for (double& w : k.weights) w /= s;
}

bool inside(const grid::SupportBox& box, const Point& x) {
  for (size_t a = 0; a < box.lo.size(); ++a)
    if (x[static_cast<int>(a)] < box.lo[a] - kBoxTol || x[static_cast<int>(a)] > box.hi[a] + kBoxTol) return false;
  return true;
}

std::vector<cplx> derivative_along(const grid::UniformGrid& g, const std::vector<cplx>& u, int axis) {
  std::vector<cplx> d(u.size());
  const int n = g.count[axis];
  const double h = g.spacing(axis);
  size_t stride = 1;
  for (int a = g.dim - 1; a > axis; --a) stride *= static_cast<size_t>(g.count[a]);
  for (size_t f = 0; f < u.size(); ++f) {
    const int i = g.unflat(f)[axis];
    if (n < 5) {
      const size_t lo = i == 0 ? f : f - stride, hi = i == n - 1 ? f : f + stride;
      d[f] = (u[hi] - u[lo]) / (h * ((i == 0 || i == n - 1) ? 1.0 : 2.0));
      continue;
    }
    // Fourth-order stencils, one-sided in the two layers next to each end.
    auto at = [&](int k) { return u[f + static_cast<std::ptrdiff_t>(k) * static_cast<std::ptrdiff_t>(stride)]; };
    cplx v;
    if (i == 0) {
      v = -25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4);
    } else if (i == 1) {
      v = -3.0 * at(-1) - 10.0 * at(0) + 18.0 * at(1) - 6.0 * at(2) + at(3);
    } else if (i == n - 2) {
      v = 3.0 * at(1) + 10.0 * at(0) - 18.0 * at(-1) + 6.0 * at(-2) - at(-3);
    } else if (i == n - 1) {
      v = 25.0 * at(0) - 48.0 * at(-1) + 36.0 * at(-2) - 16.0 * at(-3) + 3.0 * at(-4);
    } else {
      v = -at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2);
    }
    d[f] = v / (12.0 * h);
  }
  return d;
}

double lp(const std::vector<cplx>& v, const std::vector<double>& w, double p) { return numeric::lp_norm(v, w, p); }

}  // namespace

HalfSpaceField::HalfSpaceField(grid::GridField samples, grid::SupportBox support, double p)
    : samples_(std::move(samples)), support_(std::move(support)), p_(p) {
  const auto& g = samples_.grid();
  if (!(p_ >= 1.0) || std::isinf(p_)) throw Error("HalfSpaceField: need 1 <= p < inf");
  if (std::abs(g.hi[0]) > kBoxTol * std::max(1.0, std::abs(g.lo[0])))
    throw Error("HalfSpaceField: grid must end at x_1 = 0");
  if (support_.lo.empty() && support_.hi.empty()) {
    for (int a = 0; a < g.dim; ++a) {
      support_.lo.push_back(g.lo[a]);
      support_.hi.push_back(g.hi[a]);
    }
  }
  if (static_cast<int>(support_.lo.size()) != g.dim || static_cast<int>(support_.hi.size()) != g.dim)
    throw Error("HalfSpaceField: support box dimension mismatch");
  for (int a = 0; a < g.dim; ++a) {
    if (!(support_.lo[a] < support_.hi[a])) throw Error("HalfSpaceField: empty support box");
    if (support_.lo[a] < g.lo[a] - kBoxTol || support_.hi[a] > g.hi[a] + kBoxTol)
      throw Error("HalfSpaceField: support box leaves the grid");
  }
  double peak = 0.0;
  for (const cplx& v : samples_.samples()) peak = std::max(peak, std::abs(v));
  for (size_t i = 0; i < g.size(); ++i)
    if (!inside(support_, g.node(i)) && std::abs(samples_[i]) > 1e-12 * peak)
      throw Error("HalfSpaceField: samples outside the support box");
}

HalfSpaceField HalfSpaceField::from_function(const grid::UniformGrid& grid, Sampler fn, grid::SupportBox support,
                                             double p) {
  HalfSpaceField f(grid::GridField::sample(grid, fn), std::move(support), p);
  f.fn_ = std::move(fn);
  return f;
}

cplx HalfSpaceField::operator()(const Point& x) const {
  if (!inside(support_, x)) return 0.0;
  return fn_ ? fn_(x) : samples_.interpolate(x);
}

double unit_bump_integral(int d) {
  if (d < 0 || d > 3) throw Error("unit_bump_integral: dimension must be 0..3");
  if (d == 0) return 1.0;
  const double radial = gauss_integral(0.0, 1.0, 64, 16, [d](double r) { return bump(r * r) * std::pow(r, d - 1); });
  const double sphere = d == 1 ? 2.0 : d == 2 ? 2.0 * kPi : 4.0 * kPi;
  return sphere * radial;
}

TangentialMollifier::TangentialMollifier(int d) : d_(d), c_(1.0 / unit_bump_integral(d)) {}

double TangentialMollifier::operator()(const Point& xp) const {
  double r2 = 0.0;
  for (int a = 0; a < d_; ++a) r2 += xp[a] * xp[a];
  return c_ * bump(r2);
}

double TangentialMollifier::mass(int level) const {
  double s = 0.0;
  tensor_rule(d_, numeric::composite_gauss(-1.0, 1.0, 1 << level, 8),
              [&](const Point& u, double w) { s += w * (*this)(u); });
  return s;
}

NormalCutoff::NormalCutoff() : inv_mass_(1.0 / gauss_integral(0.0, 1.0, 64, 16, beta)) {}

double NormalCutoff::operator()(double s) const {
  if (s <= 1.0) return 0.0;
  if (s >= 2.0) return 1.0;
  return std::min(1.0, inv_mass_ * gauss_integral(0.0, s - 1.0, 8, 16, beta));
}

double NormalCutoff::derivative(double s) const { return inv_mass_ * beta(s - 1.0); }

DiracSequence::DiracSequence(int m, double epsilon, double tau)
    : m_(m), eps_(epsilon), tau_(tau), psi_(m - 1 >= 0 ? m - 1 : 0) {
  if (m < 1 || m > 3) throw Error("DiracSequence: dimension must be 1..3");
  if (!(epsilon > 0.0) || !(tau > 0.0) || tau > epsilon * (1 + 1e-15))
    throw Error("DiracSequence: need 0 < tau <= epsilon");
}

double DiracSequence::operator()(const Point& y) const {
  if (!(y[0] > tau_ && y[0] < 2 * tau_)) return 0.0;
  Point u(m_ - 1);
  for (int a = 1; a < m_; ++a) u[a - 1] = y[a] / eps_;
  return psi_(u) / std::pow(eps_, m_ - 1) * h_.derivative(y[0] / tau_) / tau_;
}

KernelNodes DiracSequence::nodes(int tangential_points, int normal_points) const {
  if (tangential_points < 2 || normal_points < 2 || tangential_points % 2 || normal_points % 2)
    throw Error("DiracSequence::nodes: point counts must be even and >= 2");
  const auto tang = numeric::composite_gauss(-1.0, 1.0, 2, tangential_points / 2);
  const auto norm = numeric::composite_gauss(0.0, 1.0, 2, normal_points / 2);
  KernelNodes k;
  for (size_t j = 0; j < norm.nodes.size(); ++j) {
    const double wn = norm.weights[j] * h_.derivative(1.0 + norm.nodes[j]);
    tensor_rule(m_ - 1, tang, [&](const Point& u, double w) {
      const double wt = w * psi_(u);
      if (wt * wn <= 0.0) return;
      Point y(m_);
      y[0] = tau_ * (1.0 + norm.nodes[j]);
      for (int a = 1; a < m_; ++a) y[a] = eps_ * u[a - 1];
      k.offsets.push_back(y);
      k.weights.push_back(wt * wn);
    });
  }
  normalize(k);
  return k;
}

double DiracSequence::mass(int level) const {
  const int panels = 1 << level;
  const auto norm = numeric::composite_gauss(tau_, 2 * tau_, panels, 8);
  const auto tang = numeric::composite_gauss(-eps_, eps_, panels, 8);
  double s = 0.0;
  for (size_t j = 0; j < norm.nodes.size(); ++j) {
    tensor_rule(m_ - 1, tang, [&](const Point& u, double w) {
      Point y(m_);
      y[0] = norm.nodes[j];
      for (int a = 1; a < m_; ++a) y[a] = u[a - 1];
      s += norm.weights[j] * w * (*this)(y);
    });
  }
  return s;
}

InteriorMollifier::InteriorMollifier(int m, double epsilon) : m_(m), eps_(epsilon) {
  if (m < 1 || m > 3) throw Error("InteriorMollifier: dimension must be 1..3");
  if (!(epsilon > 0.0)) throw Error("InteriorMollifier: epsilon must be positive");
  c_ = 1.0 / (std::pow(0.5, m) * unit_bump_integral(m));
}

double InteriorMollifier::operator()(const Point& y) const {
  double r2 = 0.0;
  for (int a = 0; a < m_; ++a) {
    const double u = y[a] / eps_ - (a == 0 ? 0.5 : 0.0);
    r2 += u * u;
  }
  return c_ * bump(4.0 * r2) / std::pow(eps_, m_);
}

KernelNodes InteriorMollifier::nodes(int points_per_axis) const {
  if (points_per_axis < 2 || points_per_axis % 2) throw Error("InteriorMollifier::nodes: need an even count >= 2");
  const auto rule = numeric::composite_gauss(-0.5, 0.5, 2, points_per_axis / 2);
  KernelNodes k;
  tensor_rule(m_, rule, [&](Point u, double w) {
    u[0] += 0.5;
    const double wt = w * (*this)(eps_ * u);
    if (wt <= 0.0) return;
    k.offsets.push_back(eps_ * u);
    k.weights.push_back(wt);
  });
  normalize(k);
  return k;
}

double InteriorMollifier::mass(int level) const {
  const auto rule = numeric::composite_gauss(-0.5 * eps_, 0.5 * eps_, 1 << level, 8);
  double s = 0.0;
  tensor_rule(m_, rule, [&](Point y, double w) {
    y[0] += 0.5 * eps_;
    s += w * (*this)(y);
  });
  return s;
}

InteriorMollifier build_interior_mollifier(int m, double epsilon) { return InteriorMollifier(m, epsilon); }

grid::GridField convolve(const Sampler& f, const grid::UniformGrid& grid, const KernelNodes& kernel) {
  std::vector<cplx> out(grid.size());
  for (size_t i = 0; i < out.size(); ++i) {
    const Point x = grid.node(i);
    cplx s = 0.0;
    for (size_t k = 0; k < kernel.offsets.size(); ++k) s += kernel.weights[k] * f(x - kernel.offsets[k]);
    out[i] = s;
  }
  return grid::GridField(grid, std::move(out));
}

double slab_integral(const HalfSpaceField& f, double epsilon, double tau, double p) {
  const auto& g = f.grid();
  const int m = g.dim;
  // Tangential rule over the support; Gauss panels on grid cells so that the
  // piecewise-linear interpolant of sampled fields is integrated cell by cell.
  std::vector<numeric::GaussRule> tang;
  for (int a = 1; a < m; ++a) {
    const double h = g.spacing(a);
    const int cells = std::clamp(static_cast<int>(std::ceil((f.support().hi[a] - f.support().lo[a]) / h - 1e-9)), 1,
                                 m == 3 ? 128 : 4096);
    tang.push_back(numeric::composite_gauss(f.support().lo[a], f.support().hi[a], cells, 4));
  }
  // Normal rule in s = -t_1 on [0, 2 tau], graded towards s = 0 so integrable
  // singularities at the boundary are resolved.
  const NormalCutoff h;
  std::vector<double> s_nodes, s_weights;
  auto add = [&](double lo, double hi, int points, bool cut) {
    const auto r = numeric::composite_gauss(lo, hi, 1, points);
    for (size_t i = 0; i < r.nodes.size(); ++i) {
      s_nodes.push_back(r.nodes[i]);
      s_weights.push_back(r.weights[i] * (cut ? 1.0 - h(r.nodes[i] / tau) : 1.0));
    }
  };
  add(tau, 2 * tau, 16, true);
  for (int j = 0; j < 40; ++j) add(tau * std::ldexp(1.0, -j - 1), tau * std::ldexp(1.0, -j), 8, false);

  double total = 0.0;
  const size_t nt = tang.empty() ? 1 : tang[0].nodes.size();
  const size_t nt2 = tang.size() > 1 ? tang[1].nodes.size() : 1;
  for (size_t a = 0; a < nt; ++a) {
    for (size_t b = 0; b < nt2; ++b) {
      Point x(m);
      double wt = 1.0;
      if (m >= 2) {
        x[1] = tang[0].nodes[a];
        wt *= tang[0].weights[a];
      }
      if (m >= 3) {
        x[2] = tang[1].nodes[b];
        wt *= tang[1].weights[b];
      }
      for (size_t k = 0; k < s_nodes.size(); ++k) {
        if (s_weights[k] == 0.0) continue;
        x[0] = -s_nodes[k];
        total += wt * s_weights[k] * std::pow(std::abs(f(x)), p);
      }
    }
  }
  return total / epsilon;
}

TauChoice choose_tau(const HalfSpaceField& f, double epsilon, double p) {
  if (!(epsilon > 0.0)) throw Error("choose_tau: epsilon must be positive");
  if (!(p >= 1.0) || std::isinf(p)) throw Error("choose_tau: need 1 <= p < inf");
  const double floor = f.exact() ? epsilon * std::ldexp(1.0, -50) : f.grid().spacing(0) / 1024.0;
  for (int k = 0;; ++k) {
    const double tau = epsilon * std::ldexp(1.0, -k);
    if (k > 0 && tau < floor) break;
    const double s = slab_integral(f, epsilon, tau, p);
    if (s <= epsilon) return {tau, k, s};
  }
  throw Error("choose_tau: no dyadic tau >= " + std::to_string(floor) +
              " meets the slab bound; refine the grid along x_1");
}

MollifyResult boundary_mollify(const HalfSpaceField& f, double epsilon, double p) {
  const TauChoice tau = choose_tau(f, epsilon, p);
  const DiracSequence phi(f.grid().dim, epsilon, tau.tau);
  return {convolve([&f](const Point& x) { return f(x); }, f.grid(), phi.nodes()), tau};
}

ConvergenceReport convergence_report(const qops::FirstOrderOperator& q, const HalfSpaceField& f,
                                     const HalfSpaceField& qf, const Sampler& f_b,
                                     const std::vector<double>& eps_list, double p) {
  const auto& g = f.grid();
  const int m = g.dim;
  if (q.dim() != m) throw Error("convergence_report: operator dimension does not match the grid");
  const size_t n = g.size();

  std::vector<double> w(n);
  std::vector<cplx> f0(n), qf0(n), b(n);
  std::vector<std::vector<cplx>> a(m, std::vector<cplx>(n));
  std::vector<size_t> bnd;
  std::vector<double> bw;
  std::vector<cplx> fb;
  for (size_t i = 0; i < n; ++i) {
    const Point x = g.node(i);
    w[i] = g.trapezoid_weight(i);
    f0[i] = f(x);
    qf0[i] = qf(x);
    b[i] = q.b()(x);
    for (int j = 0; j < m; ++j) a[j][i] = q.a()[j](x);
    const auto idx = g.unflat(i);
    if (idx[0] == g.count[0] - 1) {
      bnd.push_back(i);
      bw.push_back(w[i] / (g.spacing(0) * 0.5));
      fb.push_back(f_b(x));
    }
  }
  const double f_norm = lp(f0, w, p);

  ConvergenceReport report;
  for (double eps : eps_list) {
    const TauChoice tau = choose_tau(f, eps, p);
    const KernelNodes kernel = DiracSequence(m, eps, tau.tau).nodes();
    const auto fe = convolve([&f](const Point& x) { return f(x); }, g, kernel).samples();
    const auto qf_conv = convolve([&qf](const Point& x) { return qf(x); }, g, kernel).samples();

    std::vector<cplx> qfe(n);
    for (size_t i = 0; i < n; ++i) qfe[i] = b[i] * fe[i];
    for (int j = 0; j < m; ++j) {
      const auto d = derivative_along(g, fe, j);
      for (size_t i = 0; i < n; ++i) qfe[i] += a[j][i] * d[i];
    }

    std::vector<cplx> e_int(n), e_q(n), e_c(n), e_tr(bnd.size());
    for (size_t i = 0; i < n; ++i) {
      e_int[i] = fe[i] - f0[i];
      e_q[i] = qfe[i] - qf0[i];
      e_c[i] = qfe[i] - qf_conv[i];
    }
    for (size_t k = 0; k < bnd.size(); ++k) e_tr[k] = a[0][bnd[k]] * (fe[bnd[k]] - fb[k]);

    ConvergenceRow row;
    row.epsilon = eps;
    row.tau = tau.tau;
    row.interior_err = lp(e_int, w, p);
    row.q_err = lp(e_q, w, p);
    row.commutator_ratio = f_norm > 0.0 ? lp(e_c, w, p) / f_norm : 0.0;
    row.trace_err = lp(e_tr, bw, p);
    report.rows.push_back(row);
  }
  return report;
}

void write_csv(std::ostream& out, const ConvergenceReport& report) {
  out << "epsilon,tau,interior_err,q_err,commutator_ratio,trace_err\n" << std::setprecision(17);
  for (const auto& r : report.rows)
    out << r.epsilon << ',' << r.tau << ',' << r.interior_err << ',' << r.q_err << ',' << r.commutator_ratio << ','
        << r.trace_err << '\n';
}

bool monotone_after_first(const ConvergenceReport& report) {
  auto ok = [](double prev, double cur) { return cur <= prev * (1 + 1e-9) + 1e-15; };
  for (size_t i = 2; i < report.rows.size(); ++i) {
    const auto& r0 = report.rows[i - 1];
    const auto& r1 = report.rows[i];
    if (!ok(r0.interior_err, r1.interior_err) || !ok(r0.q_err, r1.q_err) ||
        !ok(r0.commutator_ratio, r1.commutator_ratio) || !ok(r0.trace_err, r1.trace_err))
      return false;
  }
  return true;
}

IntervalMollifyResult mollify_on_interval(const Sampler& f, double a, double b, int count, double epsilon,
                                          double p) {
  if (!(b > a)) throw Error("mollify_on_interval: need a < b");
  const double width = (b - a) / 8.0;
  if (!(epsilon > 0.0) || epsilon > width) throw Error("mollify_on_interval: need 0 < epsilon <= (b - a) / 8");
  const NormalCutoff h;
  auto chi_left = [&](double x) { return 1.0 - h((x - a) / width); };
  auto chi_right = [&](double x) { return 1.0 - h((b - x) / width); };

  const grid::UniformGrid line({a}, {b}, {count});
  const grid::UniformGrid chart({a - b}, {0.0}, {count});
  const grid::SupportBox end_support{{-2 * width}, {0.0}};

  const auto left = HalfSpaceField::from_function(
      chart, [&](const Point& t) { return chi_left(a - t[0]) * f(Point{a - t[0]}); }, end_support, p);
  const auto right = HalfSpaceField::from_function(
      chart, [&](const Point& t) { return chi_right(t[0] + b) * f(Point{t[0] + b}); }, end_support, p);
  const auto ml = boundary_mollify(left, epsilon, p);
  const auto mr = boundary_mollify(right, epsilon, p);

  const auto middle = convolve(
      [&](const Point& x) {
        if (x[0] <= a || x[0] >= b) return cplx(0.0);
        return (1.0 - chi_left(x[0]) - chi_right(x[0])) * f(x);
      },
      line, InteriorMollifier(1, epsilon).nodes());

  std::vector<cplx> out(line.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = ml.f_eps[out.size() - 1 - i] + mr.f_eps[i] + middle[i];
  return {grid::GridField(line, std::move(out)), ml.tau.tau, mr.tau.tau};
}

}  // namespace fbv::friedrichs
