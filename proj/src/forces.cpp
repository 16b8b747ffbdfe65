#include "anisoswarm/forces.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace anisoswarm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::FileError: return "FileError";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::NotDivisibleBy4: return "NotDivisibleBy4";
    case ErrorCode::NotUnit: return "NotUnit";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::PairAtCutoff: return "PairAtCutoff";
    case ErrorCode::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorCode::Degenerate: return "Degenerate";
  }
  return "Unknown";
}

void ForceParams::validate() const {
  auto check_nonneg = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string("force parameter '") + name + "' must be finite and >= 0");
    }
  };
  check_nonneg(alpha, "alpha");
  check_nonneg(beta, "beta");
  check_nonneg(gamma, "gamma");
  check_nonneg(e_A, "e_A");
  check_nonneg(e_R, "e_R");
  check_nonneg(delta_A, "delta_A");
  check_nonneg(delta_R, "delta_R");
  if (delta_A > 1.0 || delta_R > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "force scalings delta_A, delta_R must lie in [0,1]");
  }
  if (!std::isfinite(cutoff) || cutoff <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "cutoff must be finite and > 0");
  }
}

double df_R(double dist, const ForceParams& p) {
  return (2.0 * p.alpha * dist - p.e_R * (p.alpha * dist * dist + p.beta)) *
         std::exp(-p.e_R * dist);
}

double df_A(double dist, const ForceParams& p) {
  return -p.gamma * (1.0 - p.e_A * dist) * std::exp(-p.e_A * dist);
}

Mat2 total_force_jacobian(const Vec2& d, const Mat2& T, const ForceParams& p) {
  const double rho = norm(d);
  const double a = p.delta_A * f_A(rho, p);
  const double r = p.delta_R * f_R(rho, p);
  Mat2 J = a * T + r * Mat2::identity();
  if (rho > 0.0) {
    const double da = p.delta_A * df_A(rho, p) / rho;
    const double dr = p.delta_R * df_R(rho, p) / rho;
    J += da * Mat2::outer(T * d, d);
    J += dr * Mat2::outer(d, d);
  }
  return J;
}

namespace {

constexpr double kRelTol = 1e-12;

double along_l(double d, const ForceParams& p) { return radial_coefficient(d, 1.0, p); }

}  // namespace

LengthScales compute_length_scales(const ForceParams& p) {
  p.validate();
  // Scan for the first sign change; the coefficient starts at beta >= 0.
  constexpr int kScan = 20000;
  const double h = p.cutoff / kScan;
  double lo = 0.0;
  double hi = -1.0;
  double prev = along_l(0.0, p);
  for (int i = 1; i < kScan; ++i) {
    const double d = i * h;
    const double v = along_l(d, p);
    if (prev > 0.0 && v <= 0.0) {
      lo = d - h;
      hi = d;
      break;
    }
    prev = v;
  }
  if (hi < 0.0) {
    throw Error(ErrorCode::NoSignChange,
                "f_A + f_R does not change sign on (0, cutoff); the force is purely "
                "repulsive or purely attractive");
  }
  while (hi - lo > kRelTol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (along_l(mid, p) > 0.0 ? lo : hi) = mid;
  }
  LengthScales out;
  out.d_a = 0.5 * (lo + hi);

  // Locate the grid minimum on [d_a, cutoff], then refine by golden section.
  int best = 0;
  double best_v = along_l(out.d_a, p);
  const double hm = (p.cutoff - out.d_a) / kScan;
  for (int i = 1; i <= kScan; ++i) {
    const double v = along_l(out.d_a + i * hm, p);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  double a = out.d_a + std::max(0, best - 1) * hm;
  double b = out.d_a + std::min(kScan, best + 1) * hm;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = along_l(c, p);
  double fd = along_l(d, p);
  while (b - a > kRelTol * b) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = along_l(c, p);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = along_l(d, p);
    }
  }
  out.d_e = 0.5 * (a + b);
  return out;
}

}  // namespace anisoswarm
