#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbv {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr cplx kI{0.0, 1.0};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace numeric {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Returns the `count`-point Gauss-Legendre rule. Results are cached per count.
const GaussRule& gauss_legendre(int count);

/// Maps the Gauss-Legendre rule onto [lo, hi], split into `panels` equal panels.
GaussRule composite_gauss(double lo, double hi, int panels, int points_per_panel);

/// Portable random source. Raw 64-bit draws come from std::mt19937_64 whose
/// output sequence is fixed by the standard; conversion to doubles is done
/// here instead of through std::uniform_real_distribution, which is not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi_inclusive) {
    const auto span = static_cast<std::uint64_t>(hi_inclusive - lo + 1);
    return lo + static_cast<int>(engine_() % span);
  }
  /// Standard normal via Box-Muller on the portable uniforms.
  double normal();

 private:
  std::mt19937_64 engine_;
};

double factorial(int n);
double binomial(int n, int k);

/// Discrete L^p norm sum_i w_i |v_i|^p to the power 1/p.
double lp_norm(std::span<const cplx> values, std::span<const double> weights, double p);

}  // namespace numeric
}  // namespace fbv
