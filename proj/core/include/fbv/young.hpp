#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fbv/geometry.hpp"

// Exponent bookkeeping for integral operators Tf(y) = int_X K(x, y) f(x) dmu(x)
// with int_X |K|^t dmu <= g(y), g in L^a(Y), and int_Y |K|^s dnu <= h(x),
// h in L^b(X), plus empirical norms and the logarithmic majorant of the
// boundary kernel.
namespace fbv::young {

/// Exponent in [1, inf] with 1/inf = 0.
class Exponent {
 public:
  Exponent(double value);  // NOLINT: exponents are written as plain numbers
  static Exponent infinity();
  /// q in [0, 1]; q = 0 gives infinity.
  static Exponent from_reciprocal(double q);

  bool is_infinite() const { return inf_; }
  /// +inf for the infinite exponent.
  double value() const;
  double reciprocal() const { return inf_ ? 0.0 : 1.0 / v_; }
  std::string to_string() const;

  friend bool operator==(const Exponent& a, const Exponent& b) { return a.inf_ == b.inf_ && (a.inf_ || a.v_ == b.v_); }
  friend bool operator<(const Exponent& a, const Exponent& b) { return a.value() < b.value(); }
  friend bool operator<=(const Exponent& a, const Exponent& b) { return a.value() <= b.value(); }

 private:
  double v_ = 1.0;
  bool inf_ = false;
};

/// Parses a number or "inf".
Exponent parse_exponent(const std::string& text);

struct KernelSpec {
  double t = 1.0;
  double s = 1.0;
  Exponent a = 1.0;
  Exponent b = 1.0;
};

/// Throws unless 1 <= t <= s < inf.
void validate(const KernelSpec& spec);

enum class Case { kI, kII, kIII };
std::string to_string(Case c);

struct ExponentPair {
  Exponent p = 1.0;
  Exponent r = 1.0;
  Case case_tag = Case::kI;
  /// Case I bounds every r up to this value; the other cases name one r.
  bool r_is_upper_bound = false;
};

/// The pairs the theorem grants at this p, case by case, read literally:
///   I:   p >= t/(t-1) (p = inf when t = 1), every r <= a t;
///   II:  p < inf and p >= sb/(sb-1) (p >= 1 when b = inf), r = 1;
///   III: the case II condition, sb != t, 1/r = (sb/(sb-t))(1/p + 1/t - 1)
///        (1/r = 1/p + 1/t - 1 when b = inf) and r <= t(a(s-t)/s + 1)
///        (no cap when a = inf).
std::vector<ExponentPair> admissible_exponents(const KernelSpec& spec, Exponent p);

/// Largest r with T: L^p -> L^r implied by the theorem, allowing the weaker
/// hypotheses a' <= a, b' <= b and p' <= p that finite measures permit. The
/// literal case III set is not monotone in b; this closure is.
std::optional<Exponent> target_envelope(const KernelSpec& spec, Exponent p);

/// Throws with the violated constraint unless r <= target_envelope(p).
void check_admissible(const KernelSpec& spec, Exponent p, Exponent r);

/// Discretized T between two quadrature rules.
struct KernelOperator {
  geometry::QuadratureRule x;
  geometry::QuadratureRule y;
  std::function<cplx(const Point& x, const Point& y)> kernel;
};

struct NormEstimate {
  /// max_i ||T f_i||_r over the samples; a lower bound for the operator norm.
  double estimate = 0.0;
  int level = 0;
  int samples = 0;
};

/// Random test functions f_i = polynomial * bump on X, ||f_i||_p = 1. The
/// first n samples do not depend on sample_count. Throws on inadmissible (p, r).
NormEstimate empirical_norm(const KernelSpec& spec, const KernelOperator& op, Exponent p, Exponent r,
                            int sample_count, std::uint64_t seed = 1);

struct LadderPoint {
  double delta = 0.0;
  double value = 0.0;
};

struct LogBoundFit {
  double c0 = 0.0;
  double c1 = 0.0;
  /// max_k (I_k - C0 - C1 |log delta_k|); C0 is raised by the least-squares
  /// excess so this is <= 0.
  double fit_residual = 0.0;
  /// The excess of the plain least-squares line before the shift.
  double least_squares_excess = 0.0;
  std::vector<LadderPoint> ladder;
};

/// I(y) = int_{bD} |x - y|^{-exponent} dS(x) by the boundary rule at `level`.
double boundary_kernel_integral(const geometry::Domain& domain, double exponent, const Point& y, int level);

/// I on the points y_k = c + (R - 2^-k) e_1, k = 1..ladder_size, where c is
/// the centre and R the exit distance along e_1, then I <= C0 + C1 |log delta|.
LogBoundFit log_bound_fit(const geometry::Domain& domain, double exponent, int level, int ladder_size = 8);

/// int_D (C0 + C1 |log delta(y)|)^a dV. Balls use a radial rule graded towards
/// the boundary and cut off at delta = R 2^{-8 level}; other domains use the
/// interior rule at `level`.
double log_bound_integral(const geometry::Domain& domain, const LogBoundFit& fit, double a, int level);

struct ScanRow {
  KernelSpec spec;
  ExponentPair pair;
  double estimate = 0.0;
  int level = 0;
};

/// Columns t,s,a,b,p,r,case,estimate,level.
void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows);

}  // namespace fbv::young
