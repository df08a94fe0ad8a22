#include "fbv/numeric.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace fbv::numeric {

namespace {

GaussRule compute_gauss_legendre(int count) {
  if (count == 1) return GaussRule{{0.0}, {2.0}};
  GaussRule rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  // Newton iteration on P_n starting from the Chebyshev-like guess.
  for (int i = 0; i < (count + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= count; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = count * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[count - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[count - 1 - i] = w;
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int count) {
  if (count < 1) throw Error("gauss_legendre: count must be positive");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(count);
  if (it == cache.end()) it = cache.emplace(count, compute_gauss_legendre(count)).first;
  return it->second;
}

GaussRule composite_gauss(double lo, double hi, int panels, int points_per_panel) {
  if (panels < 1) throw Error("composite_gauss: panels must be positive");
  const GaussRule& ref = gauss_legendre(points_per_panel);
  GaussRule out;
  out.nodes.reserve(static_cast<size_t>(panels) * points_per_panel);
  out.weights.reserve(out.nodes.capacity());
  const double width = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * width;
    for (int k = 0; k < points_per_panel; ++k) {
      out.nodes.push_back(a + 0.5 * width * (ref.nodes[k] + 1.0));
      out.weights.push_back(0.5 * width * ref.weights[k]);
    }
  }
  return out;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double b = 1.0;
  for (int j = 1; j <= k; ++j) b = b * (n - k + j) / j;
  return std::round(b);
}

double lp_norm(std::span<const cplx> values, std::span<const double> weights, double p) {
  if (values.size() != weights.size()) throw Error("lp_norm: size mismatch");
  double acc = 0.0;
  if (std::isinf(p)) {
    for (const cplx& v : values) acc = std::max(acc, std::abs(v));
    return acc;
  }
  for (size_t i = 0; i < values.size(); ++i) acc += weights[i] * std::pow(std::abs(values[i]), p);
  return std::pow(acc, 1.0 / p);
}

}  // namespace fbv::numeric
