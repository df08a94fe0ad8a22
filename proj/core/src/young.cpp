#include "fbv/young.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace fbv::young {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

// Smallest p admitted by the case II condition for this b, if the condition
// is defined at all (it is not when sb = 1).
std::optional<double> case2_threshold(double s, const Exponent& b) {
  if (b.is_infinite()) return 1.0;
  const double sb = s * b.value();
  if (sb > 1.0) return sb / (sb - 1.0);
  return std::nullopt;
}

bool case1_holds(double t, const Exponent& p) { return t == 1.0 ? p.is_infinite() : p.value() >= t / (t - 1.0); }

double case3_cap(const KernelSpec& spec) {
  return spec.a.is_infinite() ? kInf : spec.t * (spec.a.value() * (spec.s - spec.t) / spec.s + 1.0);
}

// 1/r from the case III relation at (p, b); b = inf uses the stated reading.
double case3_inverse(double t, double s, double inv_p, const Exponent& b) {
  const double q = inv_p + 1.0 / t - 1.0;
  if (b.is_infinite()) return q;
  const double sb = s * b.value();
  return sb / (sb - t) * q;
}

double snap(double inv_r) { return std::abs(inv_r) < 1e-15 ? 0.0 : inv_r; }

}  // namespace

Exponent::Exponent(double value) {
  if (std::isnan(value)) throw Error("Exponent: NaN");
  if (std::isinf(value)) {
    if (value < 0) throw Error("Exponent: must lie in [1, inf]");
    inf_ = true;
    return;
  }
  if (value < 1.0) throw Error("Exponent: must lie in [1, inf], got " + num(value));
  v_ = value;
}

Exponent Exponent::infinity() { return Exponent(kInf); }

Exponent Exponent::from_reciprocal(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error("Exponent: reciprocal must lie in [0, 1]");
  return q == 0.0 ? infinity() : Exponent(std::max(1.0, 1.0 / q));
}

double Exponent::value() const { return inf_ ? kInf : v_; }

std::string Exponent::to_string() const { return num(value()); }

Exponent parse_exponent(const std::string& text) {
  if (text == "inf" || text == "infinity" || text == "Inf") return Exponent::infinity();
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw Error("not an exponent: '" + text + "'");
  }
  if (used != text.size()) throw Error("not an exponent: '" + text + "'");
  return Exponent(v);
}

void validate(const KernelSpec& spec) {
  if (!(spec.t >= 1.0) || !(spec.s >= spec.t) || std::isinf(spec.s))
    throw Error("KernelSpec: need 1 <= t <= s < inf, got t = " + num(spec.t) + ", s = " + num(spec.s));
}

std::string to_string(Case c) {
  switch (c) {
    case Case::kI: return "I";
    case Case::kII: return "II";
    case Case::kIII: return "III";
  }
  return "?";
}

std::vector<ExponentPair> admissible_exponents(const KernelSpec& spec, Exponent p) {
  validate(spec);
  const double t = spec.t, s = spec.s;
  std::vector<ExponentPair> out;

  if (case1_holds(t, p))
    out.push_back({p, spec.a.is_infinite() ? Exponent::infinity() : Exponent(spec.a.value() * t), Case::kI, true});

  const auto thr = case2_threshold(s, spec.b);
  const bool cond = thr && p.value() >= *thr;
  if (cond && !p.is_infinite()) out.push_back({p, 1.0, Case::kII, false});

  const bool degenerate = !spec.b.is_infinite() && s * spec.b.value() == t;
  if (cond && !degenerate) {
    const double inv_r = snap(case3_inverse(t, s, p.reciprocal(), spec.b));
    if (inv_r >= 0.0 && inv_r <= 1.0) {
      // With b = inf and t = 1 the relation is 1/r = 1/p; keep r = p exactly.
      const Exponent r = (spec.b.is_infinite() && 1.0 / t - 1.0 == 0.0) ? p : Exponent::from_reciprocal(inv_r);
      // Relative slack so that r sitting on the cap survives rounding in the cap.
      if (r.value() <= case3_cap(spec) * (1 + 1e-12)) out.push_back({p, r, Case::kIII, false});
    }
  }
  return out;
}

std::optional<Exponent> target_envelope(const KernelSpec& spec, Exponent p) {
  validate(spec);
  const double t = spec.t, s = spec.s;
  std::optional<double> best;
  auto offer = [&](double r) {
    if (!best || r > *best) best = r;
  };

  if (case1_holds(t, p)) offer(spec.a.is_infinite() ? kInf : spec.a.value() * t);

  const auto thr_b = case2_threshold(s, spec.b);
  if (!thr_b || p.value() < *thr_b) return best ? std::optional<Exponent>(Exponent(*best)) : std::nullopt;
  offer(1.0);

  // Case III over b' <= b and p' <= p. Along b' the inverse 1/r(p, b')
  // decreases; for fixed b' it runs from 1/r(pmin, b') down to 1/r(p, b') as
  // p' grows, so every value in between is reached and the best admissible r
  // is 1 / max(1/r(p, b'), 1/cap) whenever that range meets [1/cap, 1].
  const double inv_cap = 1.0 / (case3_cap(spec) * (1 + 1e-12));
  auto try_b = [&](const Exponent& b) {
    if (!b.is_infinite() && s * b.value() <= t) return;
    const auto thr = case2_threshold(s, b);
    if (!thr || *thr > p.value()) return;
    const double lo = snap(case3_inverse(t, s, p.reciprocal(), b));
    const double hi = snap(case3_inverse(t, s, 1.0 / std::max(1.0, *thr), b));
    if (lo > 1.0 || hi < inv_cap) return;
    const double inv = std::max(lo, inv_cap);
    offer(inv <= 0.0 ? kInf : 1.0 / inv);
  };
  try_b(spec.b);
  const double b_min = std::max(1.0, t / s);
  const double b_max = spec.b.is_infinite() ? 1e8 : spec.b.value();
  if (b_max > b_min) {
    constexpr int kSteps = 512;
    for (int i = 0; i <= kSteps; ++i) try_b(Exponent(b_min * std::pow(b_max / b_min, double(i) / kSteps)));
  }
  return Exponent(*best);
}

void check_admissible(const KernelSpec& spec, Exponent p, Exponent r) {
  const auto env = target_envelope(spec, p);
  if (!env) {
    const auto thr = case2_threshold(spec.s, spec.b);
    throw Error("no case applies at p = " + p.to_string() + ": case I needs p >= " +
                (spec.t == 1.0 ? std::string("inf") : num(spec.t / (spec.t - 1.0))) + ", cases II and III need " +
                (thr ? "p >= " + num(*thr) : std::string("sb > 1")));
  }
  if (env->value() < r.value()) {
    std::string why = "r = " + r.to_string() + " exceeds the largest admissible r = " + env->to_string() +
                      " at p = " + p.to_string();
    if (!spec.a.is_infinite() && r.value() > case3_cap(spec) * (1 + 1e-12))
      why += "; case III caps r at t(a(s-t)/s + 1) = " + num(case3_cap(spec));
    if (!spec.a.is_infinite()) why += "; case I caps r at a t = " + num(spec.a.value() * spec.t);
    throw Error(why);
  }
}

NormEstimate empirical_norm(const KernelSpec& spec, const KernelOperator& op, Exponent p, Exponent r,
                            int sample_count, std::uint64_t seed) {
  check_admissible(spec, p, r);
  if (sample_count < 1) throw Error("empirical_norm: need at least one sample");
  const size_t nx = op.x.size(), ny = op.y.size();
  if (nx == 0 || ny == 0) throw Error("empirical_norm: empty quadrature rule");
  const int m = op.x.nodes[0].dim;

  std::vector<cplx> kw(nx * ny);
  for (size_t j = 0; j < ny; ++j)
    for (size_t i = 0; i < nx; ++i) kw[j * nx + i] = op.kernel(op.x.nodes[i], op.y.nodes[j]) * op.x.weights[i];

  Point lo = op.x.nodes[0], hi = op.x.nodes[0];
  for (const Point& x : op.x.nodes)
    for (int a = 0; a < m; ++a) {
      lo[a] = std::min(lo[a], x[a]);
      hi[a] = std::max(hi[a], x[a]);
    }
  const double diam = std::max(distance(lo, hi), 1e-12);

  numeric::Rng rng(seed);
  NormEstimate est;
  est.level = op.y.level;
  std::vector<cplx> f(nx), tf(ny);
  for (int sample = 0; sample < sample_count; ++sample) {
    const Point c = op.x.nodes[std::min(nx - 1, static_cast<size_t>(rng.uniform(0.0, double(nx))))];
    const double rho = diam * rng.uniform(0.3, 1.0);
    cplx c0(rng.normal(), rng.normal());
    std::vector<cplx> lin(m), quad(m);
    for (int a = 0; a < m; ++a) {
      lin[a] = {rng.normal(), rng.normal()};
      quad[a] = {rng.normal(), rng.normal()};
    }
    for (size_t i = 0; i < nx; ++i) {
      const Point u = (1.0 / rho) * (op.x.nodes[i] - c);
      cplx poly = c0;
      for (int a = 0; a < m; ++a) poly += lin[a] * u[a] + quad[a] * u[a] * u[a];
      const double r2 = dot(u, u);
      f[i] = r2 < 1.0 ? poly * std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
    }
    const double fn = numeric::lp_norm(f, op.x.weights, p.value());
    ++est.samples;
    if (!(fn > 0.0)) continue;
    for (size_t j = 0; j < ny; ++j) {
      cplx acc = 0.0;
      for (size_t i = 0; i < nx; ++i) acc += kw[j * nx + i] * f[i];
      tf[j] = acc / fn;
    }
    est.estimate = std::max(est.estimate, numeric::lp_norm(tf, op.y.weights, r.value()));
  }
  return est;
}

double boundary_kernel_integral(const geometry::Domain& domain, double exponent, const Point& y, int level) {
  const auto rule = geometry::quadrature(domain, geometry::Region::kBoundary, level);
  return rule.integrate([&](const Point& x) { return std::pow(distance(x, y), -exponent); });
}

LogBoundFit log_bound_fit(const geometry::Domain& domain, double exponent, int level, int ladder_size) {
  if (ladder_size < 2) throw Error("log_bound_fit: need at least two ladder points");
  const Point c = domain.center();
  Point e1(domain.dim());
  e1[0] = 1.0;
  const double reach = domain.ray_exit(c, e1);
  const auto rule = geometry::quadrature(domain, geometry::Region::kBoundary, level);

  LogBoundFit fit;
  for (int k = 1; k <= ladder_size; ++k) {
    const double step = std::ldexp(1.0, -k);
    if (step >= reach) continue;
    const Point y = c + (reach - step) * e1;
    const double value = rule.integrate([&](const Point& x) { return std::pow(distance(x, y), -exponent); });
    fit.ladder.push_back({geometry::dist_boundary(domain, y), value});
  }
  if (fit.ladder.size() < 2) throw Error("log_bound_fit: domain too small for the ladder");

  double sl = 0, sv = 0, sll = 0, slv = 0;
  const double n = static_cast<double>(fit.ladder.size());
  for (const auto& pt : fit.ladder) {
    const double l = std::abs(std::log(pt.delta));
    sl += l;
    sv += pt.value;
    sll += l * l;
    slv += l * pt.value;
  }
  fit.c1 = (n * slv - sl * sv) / (n * sll - sl * sl);
  fit.c0 = (sv - fit.c1 * sl) / n;
  auto excess = [&] {
    double e = -kInf;
    for (const auto& pt : fit.ladder) e = std::max(e, pt.value - fit.c0 - fit.c1 * std::abs(std::log(pt.delta)));
    return e;
  };
  fit.least_squares_excess = excess();
  fit.c0 += fit.least_squares_excess;
  // Rounding can leave the residual a few ulps above zero.
  for (fit.fit_residual = excess(); fit.fit_residual > 0.0; fit.fit_residual = excess())
    fit.c0 = std::nextafter(fit.c0 + fit.fit_residual, kInf);
  return fit;
}

double log_bound_integral(const geometry::Domain& domain, const LogBoundFit& fit, double a, int level) {
  auto integrand = [&](double delta) { return std::pow(fit.c0 + fit.c1 * std::abs(std::log(delta)), a); };
  if (domain.kind() == geometry::DomainKind::kBall) {
    // Radial panels halving towards the boundary, truncated at delta = R 2^{-8 level}.
    const int m = domain.dim();
    const double big_r = domain.radius();
    const double sphere = 2.0 * std::pow(kPi, 0.5 * m) / std::tgamma(0.5 * m);
    double total = 0.0;
    for (int j = 0; j < 8 * level; ++j) {
      const double hi = big_r * std::ldexp(1.0, -j), lo = hi / 2;
      const auto g = numeric::composite_gauss(lo, hi, 1, 8);
      for (size_t i = 0; i < g.nodes.size(); ++i)
        total += g.weights[i] * integrand(g.nodes[i]) * sphere * std::pow(big_r - g.nodes[i], m - 1);
    }
    return total;
  }
  const auto rule = geometry::quadrature(domain, geometry::Region::kInterior, level);
  return rule.integrate([&](const Point& y) {
    return integrand(std::max(geometry::dist_boundary(domain, y), std::numeric_limits<double>::min()));
  });
}

void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows) {
  out << "t,s,a,b,p,r,case,estimate,level\n" << std::setprecision(17);
  for (const auto& row : rows)
    out << row.spec.t << ',' << row.spec.s << ',' << row.spec.a.to_string() << ',' << row.spec.b.to_string() << ','
        << row.pair.p.to_string() << ',' << row.pair.r.to_string() << ',' << to_string(row.pair.case_tag) << ','
        << row.estimate << ',' << row.level << '\n';
}

}  // namespace fbv::young
