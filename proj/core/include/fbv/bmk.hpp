#pragma once

#include <vector>

#include "fbv/exterior.hpp"
#include "fbv/geometry.hpp"

// Bochner-Martinelli-Koppelman kernel on C^n and its volume and boundary
// operators. B_{nq}(zeta, z) is stored as a double form: for every dzbar^J in
// z (|J| = q) an (n, n-q-1)-form in zeta.
namespace fbv::bmk {

using exterior::FormValue;
using exterior::Mask;

class Kernel {
 public:
  /// q in -1..n-1; q = -1 is the zero kernel.
  Kernel(int n, int q);

  int n() const { return n_; }
  int q() const { return q_; }
  /// (n-1)! / (2^{q+1} pi^n).
  double constant() const { return constant_; }
  /// The z-side multi-indices J, |J| = q, in lexicographic order.
  const std::vector<exterior::MultiIndex>& z_indices() const { return js_; }

  /// zeta-side form for each J at (zeta, z). Throws when zeta == z.
  std::vector<FormValue> eval(const Point& zeta, const Point& z) const;
  /// Hermitian norm of the double form (|dzbar^J|^2 = 2^q).
  double norm(const Point& zeta, const Point& z) const;

  /// J-coefficients of top_density(g ^ B) for a (0,q+1)-form value g at zeta.
  std::vector<cplx> volume_density(const FormValue& g, const Point& zeta, const Point& z) const;
  /// J-coefficients of the dS-density of iota^*(f ^ B) for a (0,q)-form value f.
  std::vector<cplx> boundary_density(const FormValue& f, const Point& nu, const Point& zeta, const Point& z) const;

 private:
  struct Term {
    int J;          // index into js_
    int j;          // 0-based zeta coordinate of (zetabar_j - zbar_j)
    int sign;       // eps^L_{jJ}
    FormValue star; // *dzeta^L
  };
  struct DensityEntry {
    int J;
    int j;
    Mask K;  // antiholomorphic index of the paired coefficient, as a full mask
    int k;   // real covector slot for boundary entries, -1 for volume entries
    cplx c;  // constant * sign * top_density(...)
  };

  int n_;
  int q_;
  double constant_ = 0.0;
  std::vector<exterior::MultiIndex> js_;
  std::vector<Term> terms_;
  std::vector<DensityEntry> volume_;
  std::vector<DensityEntry> boundary_;
};

struct SingularQuadratureConfig {
  int base_level = 0;
  double exclusion_factor = 2.0;
  int refinement_steps = 3;
  /// Level of the boundary rule; -1 picks 7 on the circle (2048 nodes) and 3 on S^3.
  int boundary_level = -1;
  /// Finite-difference step for dbar_z of the potential, as a fraction of the
  /// exclusion radius.
  double fd_ratio = 0.5;
  /// Evaluation points closer than margin * radius to bD are skipped.
  double margin = 0.25;
  /// Radius of the ball around z handled by the ray rule, as a fraction of
  /// dist(z, bD). At most 0.8 so the shifted finite-difference rules stay inside.
  double local_fraction = 0.75;
  /// chi falls from 1 to 0 on [cutoff_start, 1] * local radius. Steeper
  /// transitions cost the outer domain rule accuracy: at start 0.5 the sup
  /// residual of zbar on |z| <= 0.5 is 7 to 60 times larger over four levels.
  double cutoff_start = 0.0;
};

/// Rule for integrands singular at z. A smooth cutoff chi splits the domain:
/// chi * F is integrated on the local ball |zeta - z| < local_fraction *
/// dist(z, bD) by rays from z (polar for m = 2, Hopf directions for m = 4)
/// whose Jacobian s^{m-1} cancels the kernel singularity; (1 - chi) * F is
/// smooth and uses the nested domain rule. The ball of the exclusion radius
/// around z is left out.
geometry::QuadratureRule centred_rule(const geometry::Domain& domain, const Point& z, int level,
                                      const SingularQuadratureConfig& config);

/// exclusion_factor times the local node spacing local_radius / (4 * 2^level).
double exclusion_radius(const geometry::Domain& domain, const Point& z, int level,
                        const SingularQuadratureConfig& config);

struct VolumeResult {
  /// J-coefficients at the finest level.
  std::vector<cplx> value;
  /// J-coefficients per level, coarse to fine.
  std::vector<std::vector<cplx>> levels;
  /// Max-norm differences between consecutive levels.
  std::vector<double> deltas;
  /// Set when z lies within the evaluation margin of bD.
  bool near_boundary = false;
};

/// Throws on out-of-range settings.
void validate(const SingularQuadratureConfig& config);

/// B^D_q g(z) = int_D g ^ B_{nq}(., z) for a (0,q+1)-form g.
VolumeResult op_volume(const exterior::DifferentialForm& g, int q, const geometry::Domain& domain, const Point& z,
                       const SingularQuadratureConfig& config = {});

/// B^D_q g(z) at a single level.
std::vector<cplx> op_volume_level(const exterior::DifferentialForm& g, int q, const geometry::Domain& domain,
                                  const Point& z, int level, const SingularQuadratureConfig& config);

/// B^{bD}_q f(z) = int_{bD} f ^ B_{nq}(., z) for a (0,q)-form f given at
/// boundary points. Throws unless z is strictly inside the domain.
std::vector<cplx> op_boundary(const exterior::DifferentialForm& f_b, int q, const geometry::Domain& domain,
                              const Point& z, const geometry::QuadratureRule& boundary_rule);
std::vector<cplx> op_boundary(const exterior::DifferentialForm& f_b, int q, const geometry::Domain& domain,
                              const Point& z, int boundary_level);

/// dbar_z of B^D_{q-1} f at z by centred differences, as (0,q)-coefficients
/// indexed like Kernel(n, q).z_indices().
std::vector<cplx> potential_dbar(const exterior::DifferentialForm& f, const geometry::Domain& domain, const Point& z,
                                 int level, const SingularQuadratureConfig& config);

struct ResidualRow {
  Point z;
  int level = 0;
  double residual = 0.0;
  double boundary_term_norm = 0.0;
  double volume_term_norm = 0.0;
  double potential_dbar_norm = 0.0;
  /// B^{bD} f_b - B^D(dbar f) - dbar_z B^D_{q-1} f, J-coefficients.
  std::vector<cplx> reproduced;
};

/// Max-norm differences of `reproduced` between consecutive levels of one point.
std::vector<double> level_deltas(const std::vector<ResidualRow>& rows_of_one_point);

struct ReproduceReport {
  /// One row per (point, level); points in input order, levels coarse to fine.
  std::vector<ResidualRow> rows;
  /// Points skipped for lying within the evaluation margin of bD.
  std::vector<Point> skipped;
  /// Finest-level residual per evaluated point.
  std::vector<double> final_residuals;
};

/// Residual of f = B^{bD} f_b - B^D(dbar f) - dbar_z B^D_{q-1} f at each point
/// and level. f is a (0,q)-form, f_b its boundary values, dbar_f a (0,q+1)-form.
ReproduceReport reproduce_residual(const exterior::DifferentialForm& f, const exterior::DifferentialForm& f_b,
                                   const exterior::DifferentialForm& dbar_f, const geometry::Domain& domain,
                                   const std::vector<Point>& points, const SingularQuadratureConfig& config = {});

/// Sup over the evaluated points of the residual, one entry per level.
std::vector<double> sup_residuals(const ReproduceReport& report, int levels);

/// Sup over the evaluated points of level_deltas, one entry per level step.
/// Pointwise deltas can dip where the error changes sign between levels; the
/// sup is the quantity that must contract.
std::vector<double> sup_deltas(const ReproduceReport& report, int levels);

/// Max-norm of a coefficient vector.
double max_abs(const std::vector<cplx>& v);

}  // namespace fbv::bmk
