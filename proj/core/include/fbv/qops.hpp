#pragma once

#include <cstdint>
#include <vector>

#include "fbv/exterior.hpp"
#include "fbv/field.hpp"
#include "fbv/geometry.hpp"

// First-order operators Q = sum_j a_j d/dx_j + b on scalar fields over R^m,
// their adjoints under (u, v) = int u conj(v) dV, and residuals of the
// Green-Stokes identity and of weak boundary values. The dbar_* functions
// wire the same tests for Q = dbar on (0,q)-forms in C^n.
namespace fbv::qops {

class FirstOrderOperator {
 public:
  FirstOrderOperator(std::vector<Field> a, Field b);

  int dim() const { return static_cast<int>(a_.size()); }
  const std::vector<Field>& a() const { return a_; }
  const Field& b() const { return b_; }

  /// Qu, symbolically. Throws NotDifferentiable for opaque u.
  Field apply(const Field& u) const;

 private:
  std::vector<Field> a_;
  Field b_;
};

/// Q* v = -sum_j (conj(a_j) dv/dx_j + d conj(a_j)/dx_j v) + conj(b) v.
FirstOrderOperator formal_adjoint(const FirstOrderOperator& q);

/// sigma_Q(x, xi) = i sum_j a_j(x) xi_j.
class PrincipalSymbol {
 public:
  explicit PrincipalSymbol(std::vector<Field> a) : a_(std::move(a)) {}
  cplx operator()(const Point& x, const Point& xi) const;

 private:
  std::vector<Field> a_;
};

PrincipalSymbol principal_symbol(const FirstOrderOperator& q);

/// Symbol of dbar on forms: sigma(xi) u = i xi^{0,1} ^ u, where
/// xi^{0,1} = sum_j (xi_{2j-1} + i xi_{2j}) / 2 dzbar_j. At a boundary point
/// with xi = nu this makes (1/i) sigma u = dbar r ^ u.
exterior::FormValue dbar_symbol(const Point& xi, const exterior::FormValue& u);

/// (u, v) = int_D u conj(v) dV by the domain rule at `level`.
cplx pairing(const Field& u, const Field& v, const geometry::Domain& domain, int level);

/// (Qu, v) - (u, Q*v) - (1/i) int_{bD} sigma_Q(x, nu) u conj(v) dS.
cplx green_stokes_defect(const FirstOrderOperator& q, const Field& u, const Field& v,
                         const geometry::Domain& domain, int level);
double green_stokes_residual(const FirstOrderOperator& q, const Field& u, const Field& v,
                             const geometry::Domain& domain, int level);

struct WeakBVCandidate {
  Field u;
  /// Image Qu, supplied; may be a distributional image of a rough u.
  Field qu;
  /// Boundary values, evaluated at boundary nodes only.
  Field u_b;
};

struct ResidualRecord {
  int test_index = 0;
  double residual = 0.0;
  int level = 0;
};

struct ResidualReport {
  std::vector<ResidualRecord> records;
  double max_residual = 0.0;
};

/// Factor that keeps test functions away from boundary faces the domain does
/// not count as boundary: 1 on balls, ellipsoids and boxes; on a half-space
/// patch the polynomial prod_k (1 - t_k^2)^2 in coordinates t_k scaled so it
/// vanishes to second order on the cut faces and equals 1 at x_1 = 0 on the
/// centre line.
Field boundary_adapted_bump(const geometry::Domain& domain);

/// Compactly supported C^3 factor prod_k window_4((x_k - c_k) / h_k) around
/// the domain centre c. On boxes h_k is half the half-width, so the support
/// edges fall on panel edges of every rule from level 1 on and the panel
/// rules keep their full order; on balls the
/// support is the cube of half-width dist(c, bD) / (2 sqrt(m)).
Field interior_bump(const geometry::Domain& domain);

struct TestFamilyOptions {
  int size = 30;
  int max_degree = 4;
  std::uint64_t seed = 1;
};

/// Test functions p_k(x) * boundary_adapted_bump. The first members are the
/// monomials of total degree <= max_degree in coordinates centred and scaled
/// to the domain; further members are random complex combinations of them.
std::vector<Field> test_family(const geometry::Domain& domain, const TestFamilyOptions& options = {});

/// Max over phi of |(Qu, phi) - (u, Q* phi) - (1/i) int sigma_Q(nu) u_b conj(phi) dS|
/// divided by ||phi||_{L^2(D)} on the same rule. Throws on an empty family.
ResidualReport weak_bv_residual(const FirstOrderOperator& q, const WeakBVCandidate& candidate,
                                const std::vector<Field>& family, const geometry::Domain& domain, int level);

/// Test (n, n-q-1)-forms: scalar member k times dz^{1..n} ^ dzbar^{J_k}, J_k
/// cycling through the multi-indices of length n-q-1.
std::vector<exterior::DifferentialForm> form_test_family(int n, int q, const geometry::Domain& domain,
                                                         const TestFamilyOptions& options = {});

/// Residual of int_D dbar f ^ phi + (-1)^q int_D f ^ dbar phi - int_{bD} f_b ^ phi
/// per test form, divided by ||phi||_{L^2(D)}.
ResidualReport dbar_bv_residual(const exterior::DifferentialForm& f, const exterior::DifferentialForm& dbar_f,
                                const exterior::DifferentialForm& f_b, const geometry::Domain& domain,
                                const std::vector<exterior::DifferentialForm>& family, int level);

/// The same test written as (Qf, g) - (f, Q* g) - int <dbar r ^ f_b, g> dS with
/// Q = dbar, Q* = -* del *, g = (-1)^{q+1} * conj(phi) and (u, v) = int <u, v> dV.
ResidualReport dbar_weak_bv_residual(const exterior::DifferentialForm& f, const exterior::DifferentialForm& dbar_f,
                                     const exterior::DifferentialForm& f_b, const geometry::Domain& domain,
                                     const std::vector<exterior::DifferentialForm>& family, int level);

struct EquivalenceReport {
  ResidualReport wedge_form;
  ResidualReport adjoint_form;
  /// Largest |difference| of the two residuals over the family.
  double max_gap = 0.0;
};

EquivalenceReport equivalence_check(const exterior::DifferentialForm& f, const exterior::DifferentialForm& dbar_f,
                                    const exterior::DifferentialForm& f_b, const geometry::Domain& domain,
                                    const std::vector<exterior::DifferentialForm>& family, int level);

struct NormalTangentialSplit {
  /// Coefficient c with Q* = -c d/dx_1 + Q'; c = conj(a_1) under the Hermitian pairing.
  Field normal_coefficient;
  /// Q' with no d/dx_1 term.
  FirstOrderOperator remainder;
};

/// Splits Q* in the half-space model. Throws unless frame.nu = e_1.
NormalTangentialSplit normal_tangential_split(const FirstOrderOperator& q, const geometry::BoundaryFrame& frame);

}  // namespace fbv::qops
