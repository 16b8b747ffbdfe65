#pragma once

// Mean-field equilibrium conditions for rings, ellipses and stripes under a
// homogeneous tensor field with s = (0,1). All integrals use the
// untruncated force coefficients.

#include <filesystem>
#include <functional>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "anisoswarm/forces.hpp"

namespace anisoswarm {

struct QuadratureSpec {
  int panels = 64;
  int nodes_per_panel = 8;
  double refinement_tol = 1e-10;
  int max_doublings = 10;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_value = 0.0;        // integral of |f|, the convergence scale
  double relative_change = 0.0;  // |I_2n - I_n| / max(|I_2n|, int |f|)
  int panels = 0;                // per segment, at acceptance
};

/// Composite Gauss-Legendre over [a, b], split additionally at `breaks`.
/// Doubles the panel count until the relative change drops below
/// refinement_tol. Throws Error{QuadratureNotConverged}.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           std::initializer_list<double> breaks = {},
                           const QuadratureSpec& q = {});

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

// ---------------------------------------------------------------------------

/// int_0^pi (f_A+f_R)(R sqrt((1-cos)^2 + sin^2)) (1 - cos) dphi.
QuadratureResult ring_G(double R, const ForceParams& p, const QuadratureSpec& q = {});
/// Same integral with the chord length written as 2R sin(phi/2).
QuadratureResult ring_G_chord(double R, const ForceParams& p, const QuadratureSpec& q = {});

/// int_{pi/2}^{3pi/2} (chi f_A + f_R)(R sqrt(cos^2 + (1-sin)^2)) (1 - sin) dphi:
/// the force balance at the top of the ring.
QuadratureResult ring_condition_chi(double R, double chi, const ForceParams& p,
                                    const QuadratureSpec& q = {});

/// Unique root of ring_G on (d_a/2, d_e/2]. Throws Error{NoRoot}.
double solve_ring_radius(const ForceParams& p, const QuadratureSpec& q = {});

double ellipse_w1(double phi, double R, double r);
double ellipse_w2(double phi, double R, double r);
double ellipse_w3(double phi, double R, double r);

/// G(R, r) = int_0^pi (f_A+f_R)(w1) R (1-cos) w2 dphi.
QuadratureResult ellipse_G(double R, double r, const ForceParams& p,
                           const QuadratureSpec& q = {});
/// g(R, r) = G(R, r) / R, continuous at R = 0 with g(0, r) = r gbar(r).
QuadratureResult ellipse_g(double R, double r, const ForceParams& p,
                           const QuadratureSpec& q = {});

/// Upper end of the R search box: largest R with max(2R, R + r) <= d_e.
double ellipse_R_max(double r, const LengthScales& ls);

/// Largest positive root of G(., r) on (0, R_e). Throws Error{NoRoot}.
double solve_ellipse_R(double r, const ForceParams& p, const QuadratureSpec& q = {});

/// gbar(r) = int_0^pi (f_A+f_R)(r|sin|) (1-cos) |cos| dphi.
QuadratureResult gbar(double r, const ForceParams& p, const QuadratureSpec& q = {});

/// Unique root of gbar in (d_a, d_e). Throws Error{NoRoot} when gbar(d_e) >= 0.
double solve_trivial_r(const ForceParams& p, const QuadratureSpec& q = {});

/// H(R, r, chi) = chi A(R, r) + B(R, r) with
/// A = int_{pi/2}^{3pi/2} f_A(w3) (R+r)(1-sin) w2, B the same with f_R.
struct EllipseHTerms {
  QuadratureResult A;
  QuadratureResult B;
  double at(double chi) const { return chi * A.value + B.value; }
};
EllipseHTerms ellipse_H_terms(double R, double r, const ForceParams& p,
                              const QuadratureSpec& q = {});
/// Direct quadrature of H with the combined coefficient chi f_A + f_R.
QuadratureResult ellipse_H(double R, double r, double chi, const ForceParams& p,
                           const QuadratureSpec& q = {});

struct ChiResult {
  double chi = 0.0;
  bool in_range = true;  // chi in [0, 1]
};
/// chi = -B/A. At R = 0 the common factor r^2 cancels and this is the
/// trivial-ellipse value chibar. Throws Error{DegenerateDenominator}.
ChiResult chi_for_tuple(double R, double r, const ForceParams& p, const QuadratureSpec& q = {});

struct EllipseTuple {
  double R = 0.0;
  double r = 0.0;
  double chi = 0.0;
  bool chi_in_range = true;
  double eccentricity = 0.0;
  double residual_G = 0.0;
  double residual_H = 0.0;
};

/// sqrt(1 - (R/(R+r))^2); zero when R + r == 0.
double eccentricity(double R, double r);

struct EquilibriumBranch {
  std::vector<EllipseTuple> tuples;  // r = rbar * i / n, i = 0..n-1
  EllipseTuple ring_endpoint;        // (Rbar, 0, chi = 1)
  EllipseTuple trivial_endpoint;     // (0, rbar, chibar)
};

/// Samples n_points values of r in [0, rbar). Throws on n_points < 2 and
/// propagates solver errors.
EquilibriumBranch ellipse_branch(const ForceParams& p, int n_points,
                                 const QuadratureSpec& q = {});

/// CSV `r,R,chi,eccentricity,residual_G,residual_H`: the sampled tuples
/// followed by the trivial endpoint.
std::string branch_csv(const EquilibriumBranch& branch);

/// e_1 . int_{[xa, xb] x R} F(x', T) dx' with T = diag(1, chi), the
/// integrand vanishing beyond the cutoff.
QuadratureResult strip_force_integral(double xa, double xb, double chi, const ForceParams& p,
                                      const QuadratureSpec& q = {});

/// Stripe balance over [x1, Delta - x1]; zero for x1 = Delta/2.
/// Throws InvalidArgument for Delta <= 0 or x1 outside [0, Delta/2].
double stripe_condition(double Delta, double x1, const ForceParams& p, double chi,
                        const QuadratureSpec& q = {});

}  // namespace anisoswarm
