#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "fbv/grid.hpp"
#include "fbv/qops.hpp"

// Mollification in the half-space model U = {x_1 < 0}. The boundary kernel
// is anisotropic: tangential scale epsilon, normal scale tau <= epsilon, and
// its support sits in {x_1 > 0} so f * phi only reads f inside U.
namespace fbv::friedrichs {

using Sampler = std::function<cplx(const Point&)>;

/// Samples of f on a grid over a box of the closed half-space whose x_1 range
/// ends at 0. Optionally carries the exact callable; evaluation then uses it
/// instead of multilinear interpolation.
class HalfSpaceField {
 public:
  HalfSpaceField(grid::GridField samples, grid::SupportBox support, double p = 2.0);
  static HalfSpaceField from_function(const grid::UniformGrid& grid, Sampler fn, grid::SupportBox support,
                                      double p = 2.0);

  const grid::UniformGrid& grid() const { return samples_.grid(); }
  const grid::GridField& samples() const { return samples_; }
  const grid::SupportBox& support() const { return support_; }
  double p() const { return p_; }
  bool exact() const { return static_cast<bool>(fn_); }

  /// Zero outside the support box.
  cplx operator()(const Point& x) const;

 private:
  grid::GridField samples_;
  grid::SupportBox support_;
  double p_;
  Sampler fn_;
};

/// Integral of bump(|u|^2) = exp(1 - 1/(1 - |u|^2)) over the unit ball of R^d, d <= 3.
double unit_bump_integral(int d);

/// psi(x') = bump(|x'|^2) / unit_bump_integral on the unit ball of R^d.
class TangentialMollifier {
 public:
  explicit TangentialMollifier(int d);
  int dim() const { return d_; }
  double operator()(const Point& xp) const;
  /// Mass by a tensor Gauss rule on the cube, 2^level panels per axis.
  double mass(int level) const;

 private:
  int d_;
  double c_;
};

/// Smoothed step: h = 0 on s <= 1, h = 1 on s >= 2, h' = beta(s - 1) / B with
/// beta(u) = bump((2u - 1)^2).
class NormalCutoff {
 public:
  NormalCutoff();
  double operator()(double s) const;
  double derivative(double s) const;

 private:
  double inv_mass_;
};

/// Quadrature offsets y_i with weights summing to 1 exactly.
struct KernelNodes {
  std::vector<Point> offsets;
  std::vector<double> weights;
};

/// phi(y) = psi_eps(y') h'(y_1 / tau) / tau on R^m, m in 1..3.
class DiracSequence {
 public:
  DiracSequence(int m, double epsilon, double tau);

  int dim() const { return m_; }
  double epsilon() const { return eps_; }
  double tau() const { return tau_; }
  double operator()(const Point& y) const;
  KernelNodes nodes(int tangential_points = 16, int normal_points = 8) const;
  /// Independent check of the unit mass on the bounding box of the support.
  double mass(int level) const;

 private:
  int m_;
  double eps_, tau_;
  TangentialMollifier psi_;
  NormalCutoff h_;
};

/// phi_eps(y) = eps^{-m} phi(y / eps), phi a bump on the ball of radius 1/2
/// centred at e_1 / 2, so the support lies in {y_1 > 0}.
class InteriorMollifier {
 public:
  InteriorMollifier(int m, double epsilon);

  int dim() const { return m_; }
  double epsilon() const { return eps_; }
  double operator()(const Point& y) const;
  KernelNodes nodes(int points_per_axis = 16) const;
  double mass(int level) const;

 private:
  int m_;
  double eps_;
  double c_;
};

InteriorMollifier build_interior_mollifier(int m, double epsilon);

/// (f * phi)(x) = sum_i w_i f(x - y_i) at every grid node.
grid::GridField convolve(const Sampler& f, const grid::UniformGrid& grid, const KernelNodes& kernel);

struct TauChoice {
  double tau = 0.0;
  int k = 0;
  /// (1/eps) int |f|^p (1 - h_tau(-t_1)) dt at the chosen tau.
  double slab = 0.0;
};

/// (1/eps) int |f|^p (1 - h_tau(-t_1)) dt, graded Gauss panels towards t_1 = 0.
double slab_integral(const HalfSpaceField& f, double epsilon, double tau, double p);

/// Smallest k >= 0 with slab_integral(eps 2^-k) <= eps. Throws when no tau
/// down to the grid floor (x_1 spacing / 1024 for sampled fields) works.
TauChoice choose_tau(const HalfSpaceField& f, double epsilon, double p);

struct MollifyResult {
  grid::GridField f_eps;
  TauChoice tau;
};

MollifyResult boundary_mollify(const HalfSpaceField& f, double epsilon, double p);

struct ConvergenceRow {
  double epsilon = 0.0;
  double tau = 0.0;
  double interior_err = 0.0;
  double q_err = 0.0;
  double commutator_ratio = 0.0;
  double trace_err = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
};

/// Per epsilon: ||f_eps - f||_p, ||Q f_eps - Qf||_p, ||Q f_eps - (Qf) * phi||_p / ||f||_p
/// and ||a_1 (f_eps - f_b)||_{L^p(x_1 = 0)}. Norms are trapezoid sums on the grid
/// of f; Q f_eps uses fourth-order differences of the grid samples of f_eps.
ConvergenceReport convergence_report(const qops::FirstOrderOperator& q, const HalfSpaceField& f,
                                     const HalfSpaceField& qf, const Sampler& f_b,
                                     const std::vector<double>& eps_list, double p);

void write_csv(std::ostream& out, const ConvergenceReport& report);

/// Each column non-increasing from the second row on.
bool monotone_after_first(const ConvergenceReport& report);

/// Partition of unity on [a, b]: the end pieces go through the half-space
/// kernel in the charts x_1 = a - x and x_1 = x - b, the middle piece through
/// the interior mollifier.
struct IntervalMollifyResult {
  grid::GridField f_eps;
  double tau_left = 0.0;
  double tau_right = 0.0;
};

IntervalMollifyResult mollify_on_interval(const Sampler& f, double a, double b, int count, double epsilon,
                                          double p);

}  // namespace fbv::friedrichs
