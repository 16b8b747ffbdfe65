#pragma once

// Kuecken-Champod style force coefficients and the anisotropic pair force
//   F(d, T) = delta_A f_A(|d|) T d + delta_R f_R(|d|) d,
// truncated at a spherical cutoff radius.

#include <cmath>

#include "anisoswarm/types.hpp"

namespace anisoswarm {

struct ForceParams {
  double alpha = 270.0;
  double beta = 0.1;
  double gamma = 35.0;
  double e_A = 95.0;
  double e_R = 100.0;
  double delta_A = 1.0;  // attraction scaling
  double delta_R = 1.0;  // repulsion scaling
  double cutoff = 0.5;

  /// Throws Error{InvalidArgument} on non-finite or negative fields,
  /// scalings outside [0,1], or cutoff <= 0.
  void validate() const;
};

struct LengthScales {
  double d_a = 0.0;  // zero crossing of the along-l coefficient
  double d_e = 0.0;  // argmin of the along-l coefficient
};

// Coefficient functions. Untruncated; the cutoff only enters total_force.
inline double f_R(double dist, const ForceParams& p) {
  return (p.alpha * dist * dist + p.beta) * std::exp(-p.e_R * dist);
}
inline double f_A(double dist, const ForceParams& p) {
  return -p.gamma * dist * std::exp(-p.e_A * dist);
}
double df_R(double dist, const ForceParams& p);
double df_A(double dist, const ForceParams& p);

/// chi * delta_A * f_A + delta_R * f_R: the signed force coefficient along an
/// eigendirection of T with eigenvalue chi. chi = 1 gives the along-l value.
inline double radial_coefficient(double dist, double chi, const ForceParams& p) {
  return chi * p.delta_A * f_A(dist, p) + p.delta_R * f_R(dist, p);
}

/// Same as total_force without the cutoff.
inline Vec2 total_force_untruncated(const Vec2& d, const Mat2& T, const ForceParams& p) {
  const double rho = norm(d);
  const double a = p.delta_A * f_A(rho, p);
  const double r = p.delta_R * f_R(rho, p);
  const Vec2 td = T * d;
  return {a * td.x + r * d.x, a * td.y + r * d.y};
}

/// Truncated pair force. Zero for |d| >= cutoff.
inline Vec2 total_force(const Vec2& d, const Mat2& T, const ForceParams& p) {
  if (norm(d) >= p.cutoff) return {};
  return total_force_untruncated(d, T, p);
}

/// Jacobian of the untruncated force with respect to the displacement d for
/// a fixed tensor T.
Mat2 total_force_jacobian(const Vec2& d, const Mat2& T, const ForceParams& p);

/// d_a by grid bracketing + bisection, d_e by golden-section search, both to
/// relative tolerance 1e-12. Throws Error{NoSignChange} when the along-l
/// coefficient does not change sign on (0, cutoff).
LengthScales compute_length_scales(const ForceParams& p);

}  // namespace anisoswarm
