#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fbv/field.hpp"
#include "fbv/numeric.hpp"
#include "fbv/point.hpp"

// Exterior algebra of complex differential forms on C^n, n <= 4.
//
// Generators are ordered dz_1..dz_n, dzbar_1..dzbar_n; a basis monomial is a
// bitmask over these 2n generators (bit j-1 for dz_j, bit n+j-1 for dzbar_j)
// and is always stored in ascending generator order, which puts dz^I before
// dzbar^J. The real basis dx_1..dx_2n uses the same mask convention with
// dz_j = dx_{2j-1} + i dx_{2j}. The metric is Euclidean in the real basis, so
// <dz_j, dz_j> = 2.
namespace fbv::exterior {

inline constexpr int kMaxComplexDim = kMaxRealDim / 2;

using Mask = unsigned;

/// Strictly increasing list of indices in 1..n.
class MultiIndex {
 public:
  MultiIndex() = default;
  MultiIndex(std::vector<int> entries, int n);
  MultiIndex(std::initializer_list<int> entries, int n) : MultiIndex(std::vector<int>(entries), n) {}

  static MultiIndex from_mask(Mask mask, int n);
  /// All multi-indices of the given length, in lexicographic order.
  static std::vector<MultiIndex> all(int n, int length);

  const std::vector<int>& entries() const { return entries_; }
  int size() const { return static_cast<int>(entries_.size()); }
  int n() const { return n_; }
  /// Bit j-1 set for every entry j.
  Mask mask() const;
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<int> entries_;
  int n_ = 0;
};

struct Bidegree {
  int p = 0;
  int q = 0;
  friend bool operator==(const Bidegree&, const Bidegree&) = default;
};

/// Sign of the permutation taking A to B; 0 when they differ as sets or repeat.
int eps_sign(std::span<const int> a, std::span<const int> b);

/// Sign from sorting a product of generators into ascending order; 0 on repeats.
int reorder_sign(std::span<const int> generators);

/// Sign of (basis a) ^ (basis b) relative to basis (a | b); 0 if they overlap.
int wedge_sign(Mask a, Mask b);

/// Constant-coefficient form on C^n (the value of a form at one point).
/// Not necessarily homogeneous.
class FormValue {
 public:
  FormValue() = default;
  explicit FormValue(int n);

  static FormValue monomial(const MultiIndex& holo, const MultiIndex& antiholo, cplx coefficient = 1.0);
  static FormValue basis(int n, Mask mask, cplx coefficient = 1.0);
  static FormValue dz(int n, int j);
  static FormValue dzbar(int n, int j);
  /// Real coordinate 1-form dx_k, k in 1..2n.
  static FormValue dx(int n, int k);
  /// The Euclidean volume form dx_1 ^ ... ^ dx_2n.
  static FormValue volume(int n);
  /// Builds a form from coefficients in the real basis, indexed by real mask.
  static FormValue from_real(int n, std::span<const cplx> real_coefficients);

  int n() const { return n_; }
  cplx operator[](Mask mask) const { return coeffs_[mask]; }
  cplx& operator[](Mask mask) { return coeffs_[mask]; }
  cplx coefficient(const MultiIndex& holo, const MultiIndex& antiholo) const;
  const std::vector<cplx>& coefficients() const { return coeffs_; }

  /// Coefficients in the real basis dx^S, indexed by real mask.
  std::vector<cplx> to_real() const;
  /// Pointwise complex conjugate (conj(dz_j) = dzbar_j).
  FormValue conj() const;
  /// Euclidean Hodge star, complex linear: (p,q) -> (n-q, n-p).
  FormValue hodge_star() const;
  /// Bidegree when homogeneous and nonzero.
  std::optional<Bidegree> bidegree() const;
  bool is_zero() const;
  double max_abs() const;

  FormValue& operator+=(const FormValue& o);
  FormValue& operator-=(const FormValue& o);
  FormValue& operator*=(cplx s);
  friend FormValue operator+(FormValue a, const FormValue& b) { return a += b; }
  friend FormValue operator-(FormValue a, const FormValue& b) { return a -= b; }
  friend FormValue operator*(cplx s, FormValue a) { return a *= s; }
  friend FormValue wedge(const FormValue& a, const FormValue& b);

 private:
  int n_ = 0;
  std::vector<cplx> coeffs_;
};

/// The scalar c with f = c dV for an (n,n)-form f. Throws on other bidegrees.
cplx top_density(const FormValue& f);

/// Pointwise Hermitian inner product, sum over real basis of a_S conj(b_S).
cplx inner(const FormValue& a, const FormValue& b);

/// Hermitian norm.
double norm(const FormValue& a);

/// Real 1-form sum_k w_k dx_k from a real covector.
FormValue real_one_form(int n, const Point& covector);

enum class DerivativeMode { kAnalytic, kFiniteDifference };

/// Homogeneous (p,q)-form with field coefficients. Value type; never mutated
/// after it has been shared.
class DifferentialForm {
 public:
  DifferentialForm() = default;
  DifferentialForm(int n, Bidegree bidegree, DerivativeMode mode = DerivativeMode::kAnalytic,
                   double fd_step = 1e-5);

  static DifferentialForm function(int n, Field f);

  DifferentialForm& set(const MultiIndex& holo, const MultiIndex& antiholo, Field f);
  DifferentialForm& set(Mask mask, Field f);

  int n() const { return n_; }
  Bidegree bidegree() const { return bidegree_; }
  int degree() const { return bidegree_.p + bidegree_.q; }
  DerivativeMode mode() const { return mode_; }
  double fd_step() const { return fd_step_; }
  const std::map<Mask, Field>& terms() const { return terms_; }
  Field coefficient(const MultiIndex& holo, const MultiIndex& antiholo) const;
  bool is_zero() const;

  FormValue operator()(const Point& p) const;

  DifferentialForm with_mode(DerivativeMode mode, double fd_step) const;
  DifferentialForm conj() const;
  DifferentialForm hodge_star() const;
  /// Classical dbar of the coefficients. In analytic mode throws
  /// NotDifferentiable for coefficients without symbolic derivatives.
  DifferentialForm dbar() const;
  /// d-prime, computed as conj(dbar(conj(f))).
  DifferentialForm del() const;

  friend DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);
  friend DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b);
  friend DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b);
  friend DifferentialForm operator*(const Field& f, const DifferentialForm& a);

 private:
  int n_ = 0;
  Bidegree bidegree_;
  DerivativeMode mode_ = DerivativeMode::kAnalytic;
  double fd_step_ = 1e-5;
  std::map<Mask, Field> terms_;
};

/// The scalar density of a field (n,n)-form relative to dV.
Field top_density(const DifferentialForm& f);

/// JSON description: {"n", "bidegree": [p,q], "derivative_mode", "fd_step",
/// "terms": [{"I": [...], "J": [...], "coef": "<expression>" | {"grid": path}}]}.
nlohmann::json to_json(const DifferentialForm& f);
DifferentialForm form_from_json(const nlohmann::json& j);

}  // namespace fbv::exterior
