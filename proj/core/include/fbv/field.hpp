#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "fbv/numeric.hpp"
#include "fbv/point.hpp"

namespace fbv {

/// Raised when an analytic derivative is requested from a field that has none.
class NotDifferentiable : public Error {
 public:
  using Error::Error;
};

/// Complex polynomial in the real coordinates x_1..x_m. Terms with zero
/// coefficient are never stored, so structural equality is value equality.
class Polynomial {
 public:
  using Exponent = std::array<std::uint8_t, kMaxRealDim>;

  Polynomial() = default;
  static Polynomial constant(cplx c);
  /// The coordinate x_k, k is 0-based.
  static Polynomial coordinate(int k);

  cplx operator()(const Point& p) const;
  Polynomial derivative(int k) const;
  Polynomial conj() const;

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  cplx constant_term() const;
  int degree() const;
  /// One past the largest coordinate index that appears, 0 for constants.
  int span() const;
  const std::map<Exponent, cplx>& terms() const { return terms_; }
  std::string to_string() const;

  Polynomial& operator+=(const Polynomial& o);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a += b * cplx(-1.0); }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, cplx s);
  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void add_term(const Exponent& e, cplx c);
  std::map<Exponent, cplx> terms_;
};

/// Immutable complex scalar field on R^m. Built from polynomials, arithmetic,
/// a few elementary functions, or an opaque callable. Analytic derivatives
/// are symbolic; polynomial subtrees fold into Polynomial so mixed partials
/// commute exactly there.
class Field {
 public:
  using Callable = std::function<cplx(const Point&)>;

  Field();  // zero
  Field(cplx c);           // NOLINT(google-explicit-constructor)
  Field(double c);         // NOLINT(google-explicit-constructor)
  Field(Polynomial poly);  // NOLINT(google-explicit-constructor)

  /// Real coordinate x_k, 0-based.
  static Field coordinate(int k);
  /// Complex coordinate z_j, 1-based.
  static Field z(int j);
  static Field zbar(int j);
  /// Sampled or otherwise non-symbolic field. Not differentiable analytically.
  static Field opaque(Callable fn, std::string label);
  /// Parses the textual expression language used in configs and JSON.
  static Field parse(std::string_view text);

  cplx operator()(const Point& p) const;

  /// d/dx_k, k 0-based. Throws NotDifferentiable for opaque or |.| nodes.
  Field derivative(int k) const;
  /// d/dz_j and d/dzbar_j, j 1-based.
  Field d_dz(int j) const;
  Field d_dzbar(int j) const;

  bool differentiable() const;
  bool is_zero() const;
  std::optional<Polynomial> as_polynomial() const;
  /// Label of an opaque field, empty optional for symbolic ones.
  std::optional<std::string> opaque_label() const;
  /// Round-trippable through parse(); throws for opaque fields.
  std::string to_string() const;

  friend Field operator+(const Field& a, const Field& b);
  friend Field operator-(const Field& a, const Field& b);
  friend Field operator*(const Field& a, const Field& b);
  friend Field operator/(const Field& a, const Field& b);
  friend Field operator-(const Field& a);

  friend Field exp(const Field& a);
  friend Field log(const Field& a);
  friend Field sqrt(const Field& a);
  friend Field sin(const Field& a);
  friend Field cos(const Field& a);
  friend Field conj(const Field& a);
  friend Field abs(const Field& a);
  friend Field bump(const Field& s);
/// (1 - t^2)^power for |Re t| < 1, zero otherwise: a C^{power-1} piecewise
/// polynomial. Written "window_<power>(t)" in expressions.
Field window(const Field& t, int power);
  friend Field window(const Field& t, int power);
  friend Field pow(const Field& a, double exponent);
  friend Field pow(const Field& a, int exponent);

  struct Node;

 private:
  explicit Field(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Field exp(const Field& a);
Field log(const Field& a);
Field sqrt(const Field& a);
Field sin(const Field& a);
Field cos(const Field& a);
Field conj(const Field& a);
Field abs(const Field& a);
/// Smooth bump exp(1 - 1/(1 - s)) for Re s < 1, zero otherwise; bump(0) = 1.
/// Vanishes to infinite order at s = 1. Written "bump(s)" in expressions.
Field bump(const Field& s);
Field pow(const Field& a, double exponent);
Field pow(const Field& a, int exponent);

}  // namespace fbv
