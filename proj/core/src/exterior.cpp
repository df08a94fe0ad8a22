#include "fbv/exterior.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <mutex>

#include <nlohmann/json.hpp>

#include "fbv/grid.hpp"

namespace fbv::exterior {

// --------------------------------------------------------------- MultiIndex

MultiIndex::MultiIndex(std::vector<int> entries, int n) : entries_(std::move(entries)), n_(n) {
  if (n < 1 || n > kMaxComplexDim) throw Error("MultiIndex: n out of range");
  if (static_cast<int>(entries_.size()) > n) throw Error("MultiIndex: longer than n");
  for (size_t k = 0; k < entries_.size(); ++k) {
    if (entries_[k] < 1 || entries_[k] > n) throw Error("MultiIndex: entry out of range 1..n");
    if (k > 0 && entries_[k] <= entries_[k - 1]) throw Error("MultiIndex: entries must be strictly increasing");
  }
}

MultiIndex MultiIndex::from_mask(Mask mask, int n) {
  std::vector<int> e;
  for (int j = 0; j < n; ++j)
    if (mask & (1u << j)) e.push_back(j + 1);
  return MultiIndex(std::move(e), n);
}

std::vector<MultiIndex> MultiIndex::all(int n, int length) {
  std::vector<MultiIndex> out;
  for (Mask m = 0; m < (1u << n); ++m)
    if (std::popcount(m) == length) out.push_back(from_mask(m, n));
  std::sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) { return a.entries() < b.entries(); });
  return out;
}

Mask MultiIndex::mask() const {
  Mask m = 0;
  for (int e : entries_) m |= 1u << (e - 1);
  return m;
}

// -------------------------------------------------------------------- signs

int reorder_sign(std::span<const int> generators) {
  int inversions = 0;
  for (size_t a = 0; a < generators.size(); ++a) {
    for (size_t b = a + 1; b < generators.size(); ++b) {
      if (generators[a] == generators[b]) return 0;
      if (generators[a] > generators[b]) ++inversions;
    }
  }
  return inversions % 2 == 0 ? 1 : -1;
}

int eps_sign(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) return 0;
  const int sa = reorder_sign(a);
  const int sb = reorder_sign(b);
  if (sa == 0 || sb == 0) return 0;
  std::vector<int> sorted_a(a.begin(), a.end());
  std::vector<int> sorted_b(b.begin(), b.end());
  std::sort(sorted_a.begin(), sorted_a.end());
  std::sort(sorted_b.begin(), sorted_b.end());
  if (sorted_a != sorted_b) return 0;
  // Both are permutations of the same set; the permutation A -> B has the
  // product of their signs relative to sorted order.
  return sa * sb;
}

int wedge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  int swaps = 0;
  for (Mask rest = b; rest != 0; rest &= rest - 1) {
    const int j = std::countr_zero(rest);
    swaps += std::popcount(a >> (j + 1));
  }
  return swaps % 2 == 0 ? 1 : -1;
}

// ------------------------------------------------------------ basis tables

namespace {

using Dense = std::vector<cplx>;

Dense wedge_dense(const Dense& a, const Dense& b) {
  Dense out(a.size(), 0.0);
  for (Mask ma = 0; ma < a.size(); ++ma) {
    if (a[ma] == cplx(0.0)) continue;
    for (Mask mb = 0; mb < b.size(); ++mb) {
      if (b[mb] == cplx(0.0)) continue;
      const int s = wedge_sign(ma, mb);
      if (s != 0) out[ma | mb] += static_cast<double>(s) * a[ma] * b[mb];
    }
  }
  return out;
}

struct Tables {
  std::vector<Dense> complex_to_real;  // per complex mask
  std::vector<Dense> real_to_complex;  // per real mask
  std::vector<Mask> star_target;       // per real mask
  std::vector<int> star_sign;          // per real mask
};

Dense expand(Mask mask, const std::vector<Dense>& generator_images, size_t size) {
  Dense acc(size, 0.0);
  acc[0] = 1.0;
  for (Mask rest = mask; rest != 0; rest &= rest - 1) acc = wedge_dense(acc, generator_images[std::countr_zero(rest)]);
  return acc;
}

Tables build_tables(int n) {
  const int gens = 2 * n;
  const size_t size = size_t{1} << gens;
  std::vector<Dense> dz_images(gens, Dense(size, 0.0));
  std::vector<Dense> dx_images(gens, Dense(size, 0.0));
  for (int j = 0; j < n; ++j) {
    // dz_j = dx_{2j} + i dx_{2j+1}, dzbar_j = dx_{2j} - i dx_{2j+1} (0-based).
    dz_images[j][1u << (2 * j)] = 1.0;
    dz_images[j][1u << (2 * j + 1)] = kI;
    dz_images[n + j][1u << (2 * j)] = 1.0;
    dz_images[n + j][1u << (2 * j + 1)] = -kI;
    // dx = (dz + dzbar)/2, dy = (dz - dzbar)/(2i).
    dx_images[2 * j][1u << j] = 0.5;
    dx_images[2 * j][1u << (n + j)] = 0.5;
    dx_images[2 * j + 1][1u << j] = -0.5 * kI;
    dx_images[2 * j + 1][1u << (n + j)] = 0.5 * kI;
  }
  Tables t;
  t.complex_to_real.reserve(size);
  t.real_to_complex.reserve(size);
  for (Mask m = 0; m < size; ++m) {
    t.complex_to_real.push_back(expand(m, dz_images, size));
    t.real_to_complex.push_back(expand(m, dx_images, size));
  }
  const Mask full = static_cast<Mask>(size - 1);
  for (Mask s = 0; s < size; ++s) {
    t.star_target.push_back(full & ~s);
    t.star_sign.push_back(wedge_sign(s, full & ~s));
  }
#ifndef NDEBUG
  // The star is defined through dx^S ^ *dx^S = dV; confirm the table honours it.
  for (Mask s = 0; s < size; ++s) {
    if (wedge_sign(s, t.star_target[s]) * t.star_sign[s] != 1)
      throw Error("exterior: Hodge star table violates the pairing identity");
  }
#endif
  return t;
}

const Tables& tables(int n) {
  if (n < 1 || n > kMaxComplexDim) throw Error("exterior: complex dimension out of range");
  static std::array<std::once_flag, kMaxComplexDim + 1> flags;
  static std::array<Tables, kMaxComplexDim + 1> cache;
  std::call_once(flags[n], [n] { cache[n] = build_tables(n); });
  return cache[n];
}

Mask low_mask(int n) { return (1u << n) - 1; }

}  // namespace

// ---------------------------------------------------------------- FormValue

FormValue::FormValue(int n) : n_(n), coeffs_(size_t{1} << (2 * n), 0.0) {
  if (n < 1 || n > kMaxComplexDim) throw Error("FormValue: complex dimension out of range");
}

FormValue FormValue::basis(int n, Mask mask, cplx coefficient) {
  FormValue f(n);
  if (mask >= f.coeffs_.size()) throw Error("FormValue::basis: mask out of range");
  f.coeffs_[mask] = coefficient;
  return f;
}

FormValue FormValue::monomial(const MultiIndex& holo, const MultiIndex& antiholo, cplx coefficient) {
  const int n = std::max(holo.n(), antiholo.n());
  if ((holo.size() > 0 && holo.n() != n) || (antiholo.size() > 0 && antiholo.n() != n))
    throw Error("FormValue::monomial: multi-indices disagree on n");
  return basis(n, holo.mask() | (antiholo.mask() << n), coefficient);
}

FormValue FormValue::dz(int n, int j) { return basis(n, 1u << (j - 1)); }
FormValue FormValue::dzbar(int n, int j) { return basis(n, 1u << (n + j - 1)); }

FormValue FormValue::dx(int n, int k) {
  std::vector<cplx> real(size_t{1} << (2 * n), 0.0);
  real[1u << (k - 1)] = 1.0;
  return from_real(n, real);
}

FormValue FormValue::volume(int n) {
  std::vector<cplx> real(size_t{1} << (2 * n), 0.0);
  real.back() = 1.0;
  return from_real(n, real);
}

FormValue FormValue::from_real(int n, std::span<const cplx> real_coefficients) {
  const Tables& t = tables(n);
  FormValue f(n);
  if (real_coefficients.size() != f.coeffs_.size()) throw Error("FormValue::from_real: size mismatch");
  for (Mask s = 0; s < real_coefficients.size(); ++s) {
    const cplx c = real_coefficients[s];
    if (c == cplx(0.0)) continue;
    const Dense& img = t.real_to_complex[s];
    for (Mask m = 0; m < img.size(); ++m)
      if (img[m] != cplx(0.0)) f.coeffs_[m] += c * img[m];
  }
  return f;
}

cplx FormValue::coefficient(const MultiIndex& holo, const MultiIndex& antiholo) const {
  return coeffs_[holo.mask() | (antiholo.mask() << n_)];
}

std::vector<cplx> FormValue::to_real() const {
  const Tables& t = tables(n_);
  std::vector<cplx> real(coeffs_.size(), 0.0);
  for (Mask m = 0; m < coeffs_.size(); ++m) {
    const cplx c = coeffs_[m];
    if (c == cplx(0.0)) continue;
    const Dense& img = t.complex_to_real[m];
    for (Mask s = 0; s < img.size(); ++s)
      if (img[s] != cplx(0.0)) real[s] += c * img[s];
  }
  return real;
}

FormValue FormValue::conj() const {
  std::vector<cplx> real = to_real();
  for (cplx& c : real) c = std::conj(c);
  return from_real(n_, real);
}

FormValue FormValue::hodge_star() const {
  const Tables& t = tables(n_);
  const std::vector<cplx> real = to_real();
  std::vector<cplx> starred(real.size(), 0.0);
  for (Mask s = 0; s < real.size(); ++s)
    if (real[s] != cplx(0.0)) starred[t.star_target[s]] += static_cast<double>(t.star_sign[s]) * real[s];
  FormValue out = from_real(n_, starred);
  // Drop the roundoff residue left by the basis changes.
  const double scale = std::max(1.0, out.max_abs());
  for (cplx& c : out.coeffs_)
    if (std::abs(c) < 1e-15 * scale) c = 0.0;
  return out;
}

std::optional<Bidegree> FormValue::bidegree() const {
  std::optional<Bidegree> found;
  for (Mask m = 0; m < coeffs_.size(); ++m) {
    if (coeffs_[m] == cplx(0.0)) continue;
    const Bidegree b{std::popcount(m & low_mask(n_)), std::popcount(m >> n_)};
    if (found && !(*found == b)) return std::nullopt;
    found = b;
  }
  return found;
}

bool FormValue::is_zero() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](cplx c) { return c == cplx(0.0); });
}

double FormValue::max_abs() const {
  double m = 0.0;
  for (cplx c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

FormValue& FormValue::operator+=(const FormValue& o) {
  if (n_ != o.n_) throw Error("FormValue: dimension mismatch");
  for (size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
  return *this;
}

FormValue& FormValue::operator-=(const FormValue& o) {
  if (n_ != o.n_) throw Error("FormValue: dimension mismatch");
  for (size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
  return *this;
}

FormValue& FormValue::operator*=(cplx s) {
  for (cplx& c : coeffs_) c *= s;
  return *this;
}

FormValue wedge(const FormValue& a, const FormValue& b) {
  if (a.n_ != b.n_) throw Error("wedge: dimension mismatch");
  FormValue out(a.n_);
  out.coeffs_ = wedge_dense(a.coeffs_, b.coeffs_);
  return out;
}

cplx top_density(const FormValue& f) {
  const int n = f.n();
  const Mask full = (1u << (2 * n)) - 1;
  for (Mask m = 0; m < full; ++m)
    if (f[m] != cplx(0.0)) throw Error("top_density: form is not of bidegree (n,n)");
  return f[full] * tables(n).complex_to_real[full][full];
}

cplx inner(const FormValue& a, const FormValue& b) {
  const std::vector<cplx> ra = a.to_real();
  const std::vector<cplx> rb = b.to_real();
  cplx acc = 0.0;
  for (size_t s = 0; s < ra.size(); ++s) acc += ra[s] * std::conj(rb[s]);
  return acc;
}

double norm(const FormValue& a) { return std::sqrt(std::max(0.0, inner(a, a).real())); }

FormValue real_one_form(int n, const Point& covector) {
  std::vector<cplx> real(size_t{1} << (2 * n), 0.0);
  for (int k = 0; k < 2 * n; ++k) real[1u << k] = covector[k];
  return FormValue::from_real(n, real);
}

// --------------------------------------------------------- DifferentialForm

DifferentialForm::DifferentialForm(int n, Bidegree bidegree, DerivativeMode mode, double fd_step)
    : n_(n), bidegree_(bidegree), mode_(mode), fd_step_(fd_step) {
  if (n < 1 || n > kMaxComplexDim) throw Error("DifferentialForm: complex dimension out of range");
  if (bidegree.p < 0 || bidegree.q < 0) throw Error("DifferentialForm: negative bidegree");
  if (!(fd_step > 0.0)) throw Error("DifferentialForm: finite-difference step must be positive");
}

DifferentialForm DifferentialForm::function(int n, Field f) {
  DifferentialForm out(n, {0, 0});
  out.set(Mask{0}, std::move(f));
  return out;
}

DifferentialForm& DifferentialForm::set(const MultiIndex& holo, const MultiIndex& antiholo, Field f) {
  if ((holo.size() > 0 && holo.n() != n_) || (antiholo.size() > 0 && antiholo.n() != n_))
    throw Error("DifferentialForm::set: multi-index dimension mismatch");
  return set(holo.mask() | (antiholo.mask() << n_), std::move(f));
}

DifferentialForm& DifferentialForm::set(Mask mask, Field f) {
  if (mask >= (1u << (2 * n_))) throw Error("DifferentialForm::set: mask out of range");
  if (std::popcount(mask & low_mask(n_)) != bidegree_.p || std::popcount(mask >> n_) != bidegree_.q)
    throw Error("DifferentialForm::set: monomial does not match the form's bidegree");
  if (f.is_zero()) {
    terms_.erase(mask);
  } else {
    terms_.insert_or_assign(mask, std::move(f));
  }
  return *this;
}

Field DifferentialForm::coefficient(const MultiIndex& holo, const MultiIndex& antiholo) const {
  auto it = terms_.find(holo.mask() | (antiholo.mask() << n_));
  return it == terms_.end() ? Field() : it->second;
}

bool DifferentialForm::is_zero() const { return terms_.empty(); }

FormValue DifferentialForm::operator()(const Point& p) const {
  if (p.dim != 2 * n_) throw Error("DifferentialForm: point dimension must be 2n");
  FormValue v(n_);
  for (const auto& [mask, f] : terms_) v[mask] = f(p);
  return v;
}

DifferentialForm DifferentialForm::with_mode(DerivativeMode mode, double fd_step) const {
  DifferentialForm out = *this;
  if (!(fd_step > 0.0)) throw Error("DifferentialForm: finite-difference step must be positive");
  out.mode_ = mode;
  out.fd_step_ = fd_step;
  return out;
}

namespace {

void accumulate(std::map<Mask, Field>& terms, Mask mask, const Field& f) {
  auto it = terms.find(mask);
  if (it == terms.end()) {
    if (!f.is_zero()) terms.emplace(mask, f);
    return;
  }
  it->second = it->second + f;
  if (it->second.is_zero()) terms.erase(it);
}

Field centered_dzbar(const Field& f, int j, double h) {
  return Field::opaque(
      [f, j, h](const Point& p) {
        Point a = p, b = p, c = p, d = p;
        a[2 * j - 2] += h;
        b[2 * j - 2] -= h;
        c[2 * j - 1] += h;
        d[2 * j - 1] -= h;
        const cplx dx = (f(a) - f(b)) / (2.0 * h);
        const cplx dy = (f(c) - f(d)) / (2.0 * h);
        return 0.5 * (dx + kI * dy);
      },
      "fd-dzbar");
}

}  // namespace

DifferentialForm DifferentialForm::conj() const {
  DifferentialForm out(n_, {bidegree_.q, bidegree_.p}, mode_, fd_step_);
  for (const auto& [mask, f] : terms_) {
    std::vector<int> gens;
    Mask target = 0;
    for (Mask rest = mask; rest != 0; rest &= rest - 1) {
      const int g = std::countr_zero(rest);
      const int c = g < n_ ? g + n_ : g - n_;
      gens.push_back(c);
      target |= 1u << c;
    }
    const int s = reorder_sign(gens);
    accumulate(out.terms_, target, static_cast<double>(s) * fbv::conj(f));
  }
  return out;
}

DifferentialForm DifferentialForm::hodge_star() const {
  DifferentialForm out(n_, {n_ - bidegree_.q, n_ - bidegree_.p}, mode_, fd_step_);
  for (const auto& [mask, f] : terms_) {
    const FormValue img = FormValue::basis(n_, mask).hodge_star();
    for (Mask m = 0; m < img.coefficients().size(); ++m)
      if (img[m] != cplx(0.0)) accumulate(out.terms_, m, img[m] * f);
  }
  return out;
}

DifferentialForm DifferentialForm::dbar() const {
  DifferentialForm out(n_, {bidegree_.p, bidegree_.q + 1}, mode_, fd_step_);
  for (const auto& [mask, f] : terms_) {
    if (mode_ == DerivativeMode::kAnalytic && !f.differentiable())
      throw NotDifferentiable("dbar: coefficient is not analytically differentiable; use finite-difference mode");
    for (int j = 1; j <= n_; ++j) {
      const Mask g = 1u << (n_ + j - 1);
      const int s = wedge_sign(g, mask);
      if (s == 0) continue;
      const Field d = mode_ == DerivativeMode::kAnalytic ? f.d_dzbar(j) : centered_dzbar(f, j, fd_step_);
      accumulate(out.terms_, g | mask, static_cast<double>(s) * d);
    }
  }
  return out;
}

DifferentialForm DifferentialForm::del() const { return conj().dbar().conj(); }

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  if (a.n_ != b.n_) throw Error("wedge: dimension mismatch");
  DifferentialForm out(a.n_, {a.bidegree_.p + b.bidegree_.p, a.bidegree_.q + b.bidegree_.q}, a.mode_, a.fd_step_);
  if (out.degree() > 2 * a.n_) return out;
  for (const auto& [ma, fa] : a.terms_) {
    for (const auto& [mb, fb] : b.terms_) {
      const int s = wedge_sign(ma, mb);
      if (s != 0) accumulate(out.terms_, ma | mb, static_cast<double>(s) * (fa * fb));
    }
  }
  return out;
}

DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b) {
  if (a.n_ != b.n_ || !(a.bidegree_ == b.bidegree_)) throw Error("DifferentialForm: adding forms of different type");
  DifferentialForm out = a;
  for (const auto& [m, f] : b.terms_) accumulate(out.terms_, m, f);
  return out;
}

DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b) {
  return a + Field(-1.0) * b;
}

DifferentialForm operator*(const Field& f, const DifferentialForm& a) {
  DifferentialForm out(a.n_, a.bidegree_, a.mode_, a.fd_step_);
  for (const auto& [m, g] : a.terms_) accumulate(out.terms_, m, f * g);
  return out;
}

Field top_density(const DifferentialForm& f) {
  if (f.is_zero()) return Field();
  if (!(f.bidegree() == Bidegree{f.n(), f.n()})) throw Error("top_density: form is not of bidegree (n,n)");
  const Mask full = (1u << (2 * f.n())) - 1;
  return top_density(FormValue::basis(f.n(), full)) * f.terms().at(full);
}

// --------------------------------------------------------------------- JSON

nlohmann::json to_json(const DifferentialForm& f) {
  nlohmann::json j;
  j["n"] = f.n();
  j["bidegree"] = {f.bidegree().p, f.bidegree().q};
  j["derivative_mode"] = f.mode() == DerivativeMode::kAnalytic ? "analytic" : "finite-difference";
  j["fd_step"] = f.fd_step();
  j["terms"] = nlohmann::json::array();
  for (const auto& [mask, coef] : f.terms()) {
    nlohmann::json term;
    term["I"] = MultiIndex::from_mask(mask & low_mask(f.n()), f.n()).entries();
    term["J"] = MultiIndex::from_mask(mask >> f.n(), f.n()).entries();
    const auto label = coef.opaque_label();
    if (label && label->rfind("grid:", 0) == 0) {
      term["coef"] = {{"grid", label->substr(5)}};
    } else {
      term["coef"] = coef.to_string();
    }
    j["terms"].push_back(std::move(term));
  }
  return j;
}

DifferentialForm form_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n").get<int>();
    const auto bideg = j.at("bidegree").get<std::vector<int>>();
    if (bideg.size() != 2) throw Error("form JSON: bidegree must have two entries");
    const std::string mode_name = j.value("derivative_mode", "analytic");
    DerivativeMode mode;
    if (mode_name == "analytic") {
      mode = DerivativeMode::kAnalytic;
    } else if (mode_name == "finite-difference") {
      mode = DerivativeMode::kFiniteDifference;
    } else {
      throw Error("form JSON: unknown derivative_mode '" + mode_name + "'");
    }
    DifferentialForm f(n, {bideg[0], bideg[1]}, mode, j.value("fd_step", 1e-5));
    for (const auto& term : j.at("terms")) {
      const MultiIndex holo(term.at("I").get<std::vector<int>>(), n);
      const MultiIndex anti(term.at("J").get<std::vector<int>>(), n);
      const auto& coef = term.at("coef");
      if (coef.is_string()) {
        f.set(holo, anti, Field::parse(coef.get<std::string>()));
      } else {
        const std::string path = coef.at("grid").get<std::string>();
        auto data = std::make_shared<const grid::GridField>(grid::read_grid(path));
        f.set(holo, anti, Field::opaque([data](const Point& p) { return data->interpolate(p); }, "grid:" + path));
      }
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("form JSON: ") + e.what());
  }
}

}  // namespace fbv::exterior
