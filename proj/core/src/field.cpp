#include "fbv/field.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

namespace fbv {

// ---------------------------------------------------------------- Polynomial

Polynomial Polynomial::constant(cplx c) {
  Polynomial p;
  p.add_term(Exponent{}, c);
  return p;
}

Polynomial Polynomial::coordinate(int k) {
  if (k < 0 || k >= kMaxRealDim) throw Error("Polynomial::coordinate: index out of range");
  Polynomial p;
  Exponent e{};
  e[k] = 1;
  p.add_term(e, 1.0);
  return p;
}

void Polynomial::add_term(const Exponent& e, cplx c) {
  if (c == cplx(0.0)) return;
  auto [it, inserted] = terms_.try_emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == cplx(0.0)) terms_.erase(it);
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial out;
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      Polynomial::Exponent e{};
      for (int k = 0; k < kMaxRealDim; ++k) {
        const int sum = ea[k] + eb[k];
        if (sum > 255) throw Error("Polynomial: exponent overflow");
        e[k] = static_cast<std::uint8_t>(sum);
      }
      out.add_term(e, ca * cb);
    }
  }
  return out;
}

Polynomial operator*(Polynomial a, cplx s) {
  if (s == cplx(0.0)) return {};
  for (auto& [e, c] : a.terms_) c *= s;
  return a;
}

cplx Polynomial::operator()(const Point& p) const {
  cplx acc = 0.0;
  for (const auto& [e, c] : terms_) {
    double mono = 1.0;
    for (int k = 0; k < kMaxRealDim; ++k) {
      if (e[k] == 0) continue;
      if (k >= p.dim) throw Error("Polynomial: coordinate x" + std::to_string(k + 1) + " beyond point dimension");
      for (int r = 0; r < e[k]; ++r) mono *= p.x[k];
    }
    acc += c * mono;
  }
  return acc;
}

Polynomial Polynomial::derivative(int k) const {
  Polynomial out;
  for (const auto& [e, c] : terms_) {
    if (e[k] == 0) continue;
    Exponent d = e;
    d[k] -= 1;
    out.add_term(d, c * static_cast<double>(e[k]));
  }
  return out;
}

Polynomial Polynomial::conj() const {
  Polynomial out;
  for (const auto& [e, c] : terms_) out.add_term(e, std::conj(c));
  return out;
}

bool Polynomial::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == Exponent{});
}

cplx Polynomial::constant_term() const {
  auto it = terms_.find(Exponent{});
  return it == terms_.end() ? cplx(0.0) : it->second;
}

int Polynomial::degree() const {
  int deg = 0;
  for (const auto& [e, c] : terms_) {
    int d = 0;
    for (auto v : e) d += v;
    deg = std::max(deg, d);
  }
  return deg;
}

int Polynomial::span() const {
  int s = 0;
  for (const auto& [e, c] : terms_)
    for (int k = 0; k < kMaxRealDim; ++k)
      if (e[k] != 0) s = std::max(s, k + 1);
  return s;
}

namespace {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_complex(cplx c) {
  if (c.imag() == 0.0) return "(" + format_real(c.real()) + ")";
  if (c.real() == 0.0) return "(" + format_real(c.imag()) + "*i)";
  return "(" + format_real(c.real()) + "+" + format_real(c.imag()) + "*i)";
}

}  // namespace

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const auto& [e, c] : terms_) {
    if (!out.empty()) out += " + ";
    out += format_complex(c);
    for (int k = 0; k < kMaxRealDim; ++k) {
      if (e[k] == 0) continue;
      out += "*x" + std::to_string(k + 1);
      if (e[k] > 1) out += "^" + std::to_string(e[k]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------- Field

enum class Kind { kPoly, kAdd, kMul, kDiv, kExp, kLog, kSqrt, kSin, kCos, kConj, kAbs, kPow, kBump, kWindow, kOpaque };

struct Field::Node {
  Kind kind = Kind::kPoly;
  Polynomial poly;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
  double exponent = 1.0;
  Callable fn;
  std::string label;
};

namespace {

using NodePtr = std::shared_ptr<const Field::Node>;

NodePtr make_poly(Polynomial p) {
  auto n = std::make_shared<Field::Node>();
  n->kind = Kind::kPoly;
  n->poly = std::move(p);
  return n;
}

NodePtr make_node(Kind k, NodePtr a, NodePtr b = nullptr, double exponent = 1.0) {
  auto n = std::make_shared<Field::Node>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  n->exponent = exponent;
  return n;
}

bool is_poly(const NodePtr& n) { return n->kind == Kind::kPoly; }
bool is_zero_node(const NodePtr& n) { return is_poly(n) && n->poly.is_zero(); }
bool is_const(const NodePtr& n, cplx c) {
  return is_poly(n) && n->poly.is_constant() && n->poly.constant_term() == c;
}

NodePtr add(const NodePtr& a, const NodePtr& b) {
  if (is_zero_node(a)) return b;
  if (is_zero_node(b)) return a;
  if (is_poly(a) && is_poly(b)) return make_poly(a->poly + b->poly);
  return make_node(Kind::kAdd, a, b);
}

NodePtr mul(const NodePtr& a, const NodePtr& b) {
  if (is_zero_node(a) || is_zero_node(b)) return make_poly({});
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (is_poly(a) && is_poly(b)) return make_poly(a->poly * b->poly);
  return make_node(Kind::kMul, a, b);
}

NodePtr scale(const NodePtr& a, cplx s) { return mul(make_poly(Polynomial::constant(s)), a); }

NodePtr div(const NodePtr& a, const NodePtr& b) {
  if (is_zero_node(b)) throw Error("Field: division by the zero field");
  if (is_zero_node(a)) return a;
  if (is_poly(b) && b->poly.is_constant()) return scale(a, 1.0 / b->poly.constant_term());
  return make_node(Kind::kDiv, a, b);
}

NodePtr unary(Kind k, const NodePtr& a) {
  if (k == Kind::kConj && is_poly(a)) return make_poly(a->poly.conj());
  if (is_poly(a) && a->poly.is_constant()) {
    const cplx c = a->poly.constant_term();
    switch (k) {
      case Kind::kExp: return make_poly(Polynomial::constant(std::exp(c)));
      case Kind::kSin: return make_poly(Polynomial::constant(std::sin(c)));
      case Kind::kCos: return make_poly(Polynomial::constant(std::cos(c)));
      case Kind::kAbs: return make_poly(Polynomial::constant(std::abs(c)));
      default: break;
    }
  }
  return make_node(k, a);
}

NodePtr power_real(const NodePtr& a, double e) {
  if (e == 0.0) return make_poly(Polynomial::constant(1.0));
  if (e == 1.0) return a;
  return make_node(Kind::kPow, a, nullptr, e);
}

// order-th derivative of exp(1 - 1/(1 - s)) for s < 1, zero for s >= 1. The
// derivatives are b(s) P_k(t) with t = 1/(1 - s), P_0 = 1 and
// P_{k+1} = t^2 (P_k' - P_k).
double bump_value(double s, int order) {
  if (s >= 1.0) return 0.0;
  const double t = 1.0 / (1.0 - s);
  std::vector<double> c{1.0};
  for (int k = 0; k < order; ++k) {
    std::vector<double> next(c.size() + 2, 0.0);
    for (size_t a = 0; a < c.size(); ++a) {
      next[a + 2] -= c[a];
      if (a > 0) next[a + 1] += a * c[a];
    }
    c = std::move(next);
  }
  double poly = 0.0;
  for (size_t a = c.size(); a-- > 0;) poly = poly * t + c[a];
  const double b = std::exp(1.0 - t);
  return b == 0.0 ? 0.0 : b * poly;
}

cplx eval(const Field::Node& n, const Point& p) {
  switch (n.kind) {
    case Kind::kPoly: return n.poly(p);
    case Kind::kAdd: return eval(*n.lhs, p) + eval(*n.rhs, p);
    case Kind::kMul: return eval(*n.lhs, p) * eval(*n.rhs, p);
    case Kind::kDiv: return eval(*n.lhs, p) / eval(*n.rhs, p);
    case Kind::kExp: return std::exp(eval(*n.lhs, p));
    case Kind::kLog: return std::log(eval(*n.lhs, p));
    case Kind::kSqrt: return std::sqrt(eval(*n.lhs, p));
    case Kind::kSin: return std::sin(eval(*n.lhs, p));
    case Kind::kCos: return std::cos(eval(*n.lhs, p));
    case Kind::kConj: return std::conj(eval(*n.lhs, p));
    case Kind::kAbs: return std::abs(eval(*n.lhs, p));
    case Kind::kPow: {
      const cplx base = eval(*n.lhs, p);
      if (base.imag() == 0.0 && base.real() >= 0.0) return std::pow(base.real(), n.exponent);
      return std::pow(base, n.exponent);
    }
    case Kind::kBump: return bump_value(eval(*n.lhs, p).real(), static_cast<int>(n.exponent));
    case Kind::kWindow: {
      const double t = eval(*n.lhs, p).real();
      return std::abs(t) < 1.0 ? std::pow(1.0 - t * t, n.exponent) : 0.0;
    }
    case Kind::kOpaque: return n.fn(p);
  }
  return 0.0;
}

NodePtr derive(const NodePtr& n, int k) {
  switch (n->kind) {
    case Kind::kPoly: return make_poly(n->poly.derivative(k));
    case Kind::kAdd: return add(derive(n->lhs, k), derive(n->rhs, k));
    case Kind::kMul: return add(mul(derive(n->lhs, k), n->rhs), mul(n->lhs, derive(n->rhs, k)));
    case Kind::kDiv: {
      const NodePtr da = derive(n->lhs, k);
      const NodePtr db = derive(n->rhs, k);
      NodePtr first = div(da, n->rhs);
      if (is_zero_node(db)) return first;
      return add(first, scale(div(mul(n->lhs, db), mul(n->rhs, n->rhs)), -1.0));
    }
    case Kind::kExp: return mul(n, derive(n->lhs, k));
    case Kind::kLog: return div(derive(n->lhs, k), n->lhs);
    case Kind::kSqrt: return div(derive(n->lhs, k), scale(n, 2.0));
    case Kind::kSin: return mul(unary(Kind::kCos, n->lhs), derive(n->lhs, k));
    case Kind::kCos: return scale(mul(unary(Kind::kSin, n->lhs), derive(n->lhs, k)), -1.0);
    case Kind::kConj: return unary(Kind::kConj, derive(n->lhs, k));
    case Kind::kPow:
      return mul(scale(power_real(n->lhs, n->exponent - 1.0), n->exponent), derive(n->lhs, k));
    case Kind::kBump: return mul(make_node(Kind::kBump, n->lhs, nullptr, n->exponent + 1.0), derive(n->lhs, k));
    case Kind::kWindow:
      if (n->exponent == 0.0) return make_poly({});
      return mul(scale(mul(n->lhs, make_node(Kind::kWindow, n->lhs, nullptr, n->exponent - 1.0)), -2.0 * n->exponent),
                 derive(n->lhs, k));
    case Kind::kAbs: throw NotDifferentiable("Field: |.| has no analytic derivative");
    case Kind::kOpaque:
      throw NotDifferentiable("Field: opaque field '" + n->label + "' has no analytic derivative");
  }
  return make_poly({});
}

bool differentiable_node(const Field::Node& n) {
  if (n.kind == Kind::kAbs || n.kind == Kind::kOpaque) return false;
  if (n.lhs && !differentiable_node(*n.lhs)) return false;
  if (n.rhs && !differentiable_node(*n.rhs)) return false;
  return true;
}

std::string print(const Field::Node& n) {
  const auto fn = [&](const char* name) { return std::string(name) + "(" + print(*n.lhs) + ")"; };
  switch (n.kind) {
    case Kind::kPoly: return "(" + n.poly.to_string() + ")";
    case Kind::kAdd: return "(" + print(*n.lhs) + " + " + print(*n.rhs) + ")";
    case Kind::kMul: return "(" + print(*n.lhs) + "*" + print(*n.rhs) + ")";
    case Kind::kDiv: return "(" + print(*n.lhs) + "/" + print(*n.rhs) + ")";
    case Kind::kExp: return fn("exp");
    case Kind::kLog: return fn("log");
    case Kind::kSqrt: return fn("sqrt");
    case Kind::kSin: return fn("sin");
    case Kind::kCos: return fn("cos");
    case Kind::kConj: return fn("conj");
    case Kind::kAbs: return fn("abs");
    case Kind::kPow: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.exponent);
      return "(" + print(*n.lhs) + ")^(" + buf + ")";
    }
    case Kind::kBump:
      return n.exponent == 0.0 ? fn("bump") : fn(("bump_d" + std::to_string(static_cast<int>(n.exponent))).c_str());
    case Kind::kWindow: return fn(("window_" + std::to_string(static_cast<int>(n.exponent))).c_str());
    case Kind::kOpaque: throw Error("Field: opaque field '" + n.label + "' has no textual form");
  }
  return "0";
}

// Recursive-descent parser for the expression language.
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    NodePtr n = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error("Field::parse: " + what + " at offset " + std::to_string(pos_) + " in '" +
                std::string(text_) + "'");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = add(lhs, term());
      } else if (accept('-')) {
        lhs = add(lhs, scale(term(), -1.0));
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = signed_factor();
    for (;;) {
      if (accept('*')) {
        lhs = mul(lhs, signed_factor());
      } else if (accept('/')) {
        lhs = div(lhs, signed_factor());
      } else {
        return lhs;
      }
    }
  }

  NodePtr signed_factor() {
    if (accept('-')) return scale(signed_factor(), -1.0);
    if (accept('+')) return signed_factor();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (!accept('^')) return base;
    NodePtr ex = signed_factor();
    if (!is_poly(ex) || !ex->poly.is_constant() || ex->poly.constant_term().imag() != 0.0)
      fail("exponent must be a real constant");
    const double e = ex->poly.constant_term().real();
    if (e >= 0.0 && e == std::floor(e) && e <= 64.0) {
      NodePtr out = make_poly(Polynomial::constant(1.0));
      for (int r = 0; r < static_cast<int>(e); ++r) out = mul(out, base);
      return out;
    }
    return power_real(base, e);
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expression();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const char* begin = text_.data() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<size_t>(end - begin);
    return make_poly(Polynomial::constant(v));
  }

  NodePtr identifier() {
    const size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string id(text_.substr(start, pos_ - start));
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      NodePtr arg = expression();
      if (!accept(')')) fail("expected ')' after function argument");
      if (id == "exp") return unary(Kind::kExp, arg);
      if (id == "log") return unary(Kind::kLog, arg);
      if (id == "sqrt") return unary(Kind::kSqrt, arg);
      if (id == "sin") return unary(Kind::kSin, arg);
      if (id == "cos") return unary(Kind::kCos, arg);
      if (id == "conj") return unary(Kind::kConj, arg);
      if (id == "abs") return unary(Kind::kAbs, arg);
      if (id == "bump") return make_node(Kind::kBump, arg, nullptr, 0.0);
      if (id.rfind("bump_d", 0) == 0 && id.size() > 6 &&
          id.find_first_not_of("0123456789", 6) == std::string::npos)
        return make_node(Kind::kBump, arg, nullptr, std::stoi(id.substr(6)));
      if (id.rfind("window_", 0) == 0 && id.size() > 7 &&
          id.find_first_not_of("0123456789", 7) == std::string::npos)
        return make_node(Kind::kWindow, arg, nullptr, std::stoi(id.substr(7)));
      fail("unknown function '" + id + "'");
    }
    if (id == "i") return make_poly(Polynomial::constant(kI));
    if (id == "pi") return make_poly(Polynomial::constant(kPi));
    if (id == "x") return make_poly(Polynomial::coordinate(0));
    if (id == "y") return make_poly(Polynomial::coordinate(1));
    if (id == "z") return make_poly(complex_coordinate(1, false));
    if (id == "zb") return make_poly(complex_coordinate(1, true));
    const auto indexed = [&](std::string_view prefix) -> int {
      if (id.size() <= prefix.size() || id.compare(0, prefix.size(), prefix) != 0) return -1;
      for (size_t k = prefix.size(); k < id.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(id[k]))) return -1;
      return std::stoi(id.substr(prefix.size()));
    };
    if (int k = indexed("zb"); k >= 1) return make_poly(complex_coordinate(k, true));
    if (int k = indexed("z"); k >= 1) return make_poly(complex_coordinate(k, false));
    if (int k = indexed("x"); k >= 1 && k <= kMaxRealDim) return make_poly(Polynomial::coordinate(k - 1));
    fail("unknown identifier '" + id + "'");
  }

  static Polynomial complex_coordinate(int j, bool conjugate) {
    if (2 * j > kMaxRealDim) throw Error("Field::parse: complex coordinate index out of range");
    return Polynomial::coordinate(2 * j - 2) + Polynomial::coordinate(2 * j - 1) * (conjugate ? -kI : kI);
  }

  std::string_view text_;
  size_t pos_ = 0;
};

}  // namespace

Field::Field() : node_(make_poly({})) {}
Field::Field(cplx c) : node_(make_poly(Polynomial::constant(c))) {}
Field::Field(double c) : node_(make_poly(Polynomial::constant(c))) {}
Field::Field(Polynomial poly) : node_(make_poly(std::move(poly))) {}

Field Field::coordinate(int k) { return Field(Polynomial::coordinate(k)); }

Field Field::z(int j) {
  return Field(Polynomial::coordinate(2 * j - 2) + Polynomial::coordinate(2 * j - 1) * kI);
}

Field Field::zbar(int j) {
  return Field(Polynomial::coordinate(2 * j - 2) + Polynomial::coordinate(2 * j - 1) * (-kI));
}

Field Field::opaque(Callable fn, std::string label) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kOpaque;
  n->fn = std::move(fn);
  n->label = std::move(label);
  return Field(NodePtr(std::move(n)));
}

Field Field::parse(std::string_view text) { return Field(Parser(text).parse()); }

cplx Field::operator()(const Point& p) const { return eval(*node_, p); }

Field Field::derivative(int k) const {
  if (k < 0 || k >= kMaxRealDim) throw Error("Field::derivative: index out of range");
  return Field(derive(node_, k));
}

Field Field::d_dz(int j) const {
  return Field(scale(add(derive(node_, 2 * j - 2), scale(derive(node_, 2 * j - 1), -kI)), 0.5));
}

Field Field::d_dzbar(int j) const {
  return Field(scale(add(derive(node_, 2 * j - 2), scale(derive(node_, 2 * j - 1), kI)), 0.5));
}

bool Field::differentiable() const { return differentiable_node(*node_); }
bool Field::is_zero() const { return is_zero_node(node_); }

std::optional<Polynomial> Field::as_polynomial() const {
  if (is_poly(node_)) return node_->poly;
  return std::nullopt;
}

std::optional<std::string> Field::opaque_label() const {
  if (node_->kind == Kind::kOpaque) return node_->label;
  return std::nullopt;
}

std::string Field::to_string() const { return print(*node_); }

Field operator+(const Field& a, const Field& b) { return Field(add(a.node_, b.node_)); }
Field operator-(const Field& a, const Field& b) { return Field(add(a.node_, scale(b.node_, -1.0))); }
Field operator*(const Field& a, const Field& b) { return Field(mul(a.node_, b.node_)); }
Field operator/(const Field& a, const Field& b) { return Field(div(a.node_, b.node_)); }
Field operator-(const Field& a) { return Field(scale(a.node_, -1.0)); }

Field exp(const Field& a) { return Field(unary(Kind::kExp, a.node_)); }
Field log(const Field& a) { return Field(unary(Kind::kLog, a.node_)); }
Field sqrt(const Field& a) { return Field(unary(Kind::kSqrt, a.node_)); }
Field sin(const Field& a) { return Field(unary(Kind::kSin, a.node_)); }
Field cos(const Field& a) { return Field(unary(Kind::kCos, a.node_)); }
Field conj(const Field& a) { return Field(unary(Kind::kConj, a.node_)); }
Field abs(const Field& a) { return Field(unary(Kind::kAbs, a.node_)); }
Field bump(const Field& s) { return Field(make_node(Kind::kBump, s.node_, nullptr, 0.0)); }

Field window(const Field& t, int power) {
  if (power < 0) throw Error("window: power must be non-negative");
  return Field(make_node(Kind::kWindow, t.node_, nullptr, power));
}
Field pow(const Field& a, double exponent) { return Field(power_real(a.node_, exponent)); }

Field pow(const Field& a, int exponent) {
  if (exponent < 0) return Field(1.0) / pow(a, -exponent);
  Field out(1.0);
  for (int r = 0; r < exponent; ++r) out = out * a;
  return out;
}

}  // namespace fbv
