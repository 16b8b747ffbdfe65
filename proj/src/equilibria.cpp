#include "anisoswarm/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include <lapacke.h>

#include "anisoswarm/io.hpp"
#include "anisoswarm/tensor.hpp"

namespace anisoswarm {

void QuadratureSpec::validate() const {
  if (panels < 1 || nodes_per_panel < 2 || !(refinement_tol > 0.0) || max_doublings < 0) {
    throw Error(ErrorCode::InvalidArgument,
                "quadrature needs panels >= 1, nodes_per_panel >= 2, refinement_tol > 0");
  }
}

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Golub-Welsch: eigen-decomposition of the Jacobi matrix of the Legendre
  // recurrence.
  std::vector<double> diag(n, 0.0), off(std::max(n - 1, 1), 0.0), z(static_cast<std::size_t>(n) * n);
  for (int k = 1; k < n; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  const lapack_int info = LAPACKE_dstev(LAPACK_COL_MAJOR, 'V', n, diag.data(), off.data(), z.data(), n);
  if (info != 0) throw Error(ErrorCode::QuadratureNotConverged, "Gauss-Legendre eigensolve failed");
  GaussRule rule;
  rule.nodes = diag;
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = z[static_cast<std::size_t>(i) * n];
    rule.weights[i] = 2.0 * v0 * v0;
  }
  // Symmetrise against rounding so that odd integrands vanish exactly.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return cache.emplace(n, std::move(rule)).first->second;
}

namespace {

struct Sum {
  double value = 0.0;
  double abs_value = 0.0;
};

Sum composite(const std::function<double(double)>& f, const std::vector<double>& cuts, int panels,
              const GaussRule& rule) {
  Sum s;
  for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    const double a = cuts[seg], b = cuts[seg + 1];
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = a + (p + 0.5) * h;
      double acc = 0.0, acc_abs = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double v = f(mid + 0.5 * h * rule.nodes[i]);
        acc += rule.weights[i] * v;
        acc_abs += rule.weights[i] * std::abs(v);
      }
      s.value += 0.5 * h * acc;
      s.abs_value += 0.5 * h * std::abs(acc_abs);
    }
  }
  return s;
}

/// Bisection on a bracket with f(lo) > 0 >= f(hi), then a few
/// Illinois-style secant steps kept inside the bracket.
template <typename F>
double bracketed_root(F&& f, double lo, double hi, double f_lo, double f_hi, double width) {
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm > 0.0) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
      f_hi = fm;
    }
  }
  int side = 0;
  for (int it = 0; it < 30 && f_lo != f_hi; ++it) {
    const double x = hi - f_hi * (hi - lo) / (f_hi - f_lo);
    if (!(x > lo && x < hi)) break;
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (fx > 0.0) {
      lo = x;
      f_lo = fx;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = x;
      f_hi = fx;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
    if (hi - lo <= 4e-16 * hi) break;
  }
  return std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
}

double tot(double d, const ForceParams& p) { return radial_coefficient(d, 1.0, p); }

constexpr double kHalfPi = kPi / 2;

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           std::initializer_list<double> breaks, const QuadratureSpec& q) {
  q.validate();
  std::vector<double> cuts{a};
  for (double c : breaks) {
    if (c > a && c < b) cuts.push_back(c);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  const GaussRule& rule = gauss_legendre(q.nodes_per_panel);
  int panels = q.panels;
  Sum coarse = composite(f, cuts, panels, rule);
  for (int d = 0; d < q.max_doublings; ++d) {
    panels *= 2;
    const Sum fine = composite(f, cuts, panels, rule);
    const double scale = std::max(std::abs(fine.value), fine.abs_value);
    const double diff = std::abs(fine.value - coarse.value);
    const double rel = scale > 0.0 ? diff / scale : 0.0;
    if (rel <= q.refinement_tol) return {fine.value, fine.abs_value, rel, panels};
    coarse = fine;
  }
  throw Error(ErrorCode::QuadratureNotConverged,
              "quadrature did not converge after " + std::to_string(q.max_doublings) +
                  " panel doublings");
}

QuadratureResult ring_G(double R, const ForceParams& p, const QuadratureSpec& q) {
  return integrate(
      [&](double phi) {
        const double c = 1.0 - std::cos(phi), s = std::sin(phi);
        return tot(R * std::sqrt(c * c + s * s), p) * c;
      },
      0.0, kPi, {}, q);
}

QuadratureResult ring_G_chord(double R, const ForceParams& p, const QuadratureSpec& q) {
  return integrate(
      [&](double phi) { return tot(2.0 * R * std::sin(0.5 * phi), p) * (1.0 - std::cos(phi)); },
      0.0, kPi, {}, q);
}

QuadratureResult ring_condition_chi(double R, double chi, const ForceParams& p,
                                    const QuadratureSpec& q) {
  return integrate(
      [&](double phi) {
        const double c = std::cos(phi), s = 1.0 - std::sin(phi);
        return radial_coefficient(R * std::sqrt(c * c + s * s), chi, p) * s;
      },
      kHalfPi, 1.5 * kPi, {kPi}, q);
}

double solve_ring_radius(const ForceParams& p, const QuadratureSpec& q) {
  LengthScales ls;
  try {
    ls = compute_length_scales(p);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoSignChange) {
      throw Error(ErrorCode::NoRoot, "no ring radius: the along-l coefficient has no zero");
    }
    throw;
  }
  const double lo = 0.5 * ls.d_a, hi = 0.5 * ls.d_e;
  const double g_lo = ring_G(lo, p, q).value;
  const double g_hi = ring_G(hi, p, q).value;
  if (!(g_lo > 0.0) || !(g_hi < 0.0)) {
    throw Error(ErrorCode::NoRoot, "ring condition has no sign change on (d_a/2, d_e/2]");
  }
  return bracketed_root([&](double R) { return ring_G(R, p, q).value; }, lo, hi, g_lo, g_hi,
                        1e-10);
}

double ellipse_w1(double phi, double R, double r) {
  const double a = R * (1.0 - std::cos(phi)), b = (R + r) * std::sin(phi);
  return std::sqrt(a * a + b * b);
}
double ellipse_w2(double phi, double R, double r) {
  const double a = R * std::sin(phi), b = (R + r) * std::cos(phi);
  return std::sqrt(a * a + b * b);
}
double ellipse_w3(double phi, double R, double r) {
  const double a = R * std::cos(phi), b = (R + r) * (1.0 - std::sin(phi));
  return std::sqrt(a * a + b * b);
}

QuadratureResult ellipse_g(double R, double r, const ForceParams& p, const QuadratureSpec& q) {
  return integrate(
      [&](double phi) {
        return tot(ellipse_w1(phi, R, r), p) * (1.0 - std::cos(phi)) * ellipse_w2(phi, R, r);
      },
      0.0, kPi, {kHalfPi}, q);
}

QuadratureResult ellipse_G(double R, double r, const ForceParams& p, const QuadratureSpec& q) {
  QuadratureResult g = ellipse_g(R, r, p, q);
  g.value *= R;
  g.abs_value *= R;
  return g;
}

double ellipse_R_max(double r, const LengthScales& ls) {
  return std::min(0.5 * ls.d_e, ls.d_e - r);
}

double solve_ellipse_R(double r, const ForceParams& p, const QuadratureSpec& q) {
  const LengthScales ls = compute_length_scales(p);
  const double R_e = ellipse_R_max(r, ls);
  if (!(R_e > 0.0)) throw Error(ErrorCode::NoRoot, "empty search interval for R");
  constexpr int kGrid = 1000;
  auto g = [&](double R) { return ellipse_g(R, r, p, q).value; };
  std::vector<double> v(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i) v[i] = g(R_e * i / kGrid);
  for (int i = kGrid - 1; i >= 0; --i) {
    if (v[i] > 0.0 && v[i + 1] <= 0.0) {
      const double lo = R_e * i / kGrid, hi = R_e * (i + 1) / kGrid;
      if (v[i + 1] == 0.0) return hi;
      return bracketed_root(g, lo, hi, v[i], v[i + 1], 1e-14 * R_e);
    }
  }
  throw Error(ErrorCode::NoRoot, "no positive root of the ellipse condition for r = " +
                                     format_double(r) + " (only the trivial state R = 0)");
}

QuadratureResult gbar(double r, const ForceParams& p, const QuadratureSpec& q) {
  return integrate(
      [&](double phi) {
        return tot(r * std::abs(std::sin(phi)), p) * (1.0 - std::cos(phi)) *
               std::abs(std::cos(phi));
      },
      0.0, kPi, {kHalfPi}, q);
}

double solve_trivial_r(const ForceParams& p, const QuadratureSpec& q) {
  LengthScales ls;
  try {
    ls = compute_length_scales(p);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoSignChange) {
      throw Error(ErrorCode::NoRoot, "no trivial ellipse: the along-l coefficient has no zero");
    }
    throw;
  }
  const double g_lo = gbar(ls.d_a, p, q).value;
  const double g_hi = gbar(ls.d_e, p, q).value;
  if (!(g_hi < 0.0)) throw Error(ErrorCode::NoRoot, "gbar(d_e) >= 0: no trivial ellipse state");
  if (!(g_lo > 0.0)) throw Error(ErrorCode::NoRoot, "gbar(d_a) <= 0: sign structure violated");
  return bracketed_root([&](double r) { return gbar(r, p, q).value; }, ls.d_a, ls.d_e, g_lo,
                        g_hi, 1e-16);
}

EllipseHTerms ellipse_H_terms(double R, double r, const ForceParams& p, const QuadratureSpec& q) {
  auto weight = [R, r](double phi) {
    return (R + r) * (1.0 - std::sin(phi)) * ellipse_w2(phi, R, r);
  };
  EllipseHTerms h;
  h.A = integrate(
      [&](double phi) { return p.delta_A * f_A(ellipse_w3(phi, R, r), p) * weight(phi); },
      kHalfPi, 1.5 * kPi, {kPi}, q);
  h.B = integrate(
      [&](double phi) { return p.delta_R * f_R(ellipse_w3(phi, R, r), p) * weight(phi); },
      kHalfPi, 1.5 * kPi, {kPi}, q);
  return h;
}

QuadratureResult ellipse_H(double R, double r, double chi, const ForceParams& p,
                           const QuadratureSpec& q) {
  return integrate(
      [&](double phi) {
        return radial_coefficient(ellipse_w3(phi, R, r), chi, p) * (R + r) *
               (1.0 - std::sin(phi)) * ellipse_w2(phi, R, r);
      },
      kHalfPi, 1.5 * kPi, {kPi}, q);
}

ChiResult chi_for_tuple(double R, double r, const ForceParams& p, const QuadratureSpec& q) {
  const EllipseHTerms h = ellipse_H_terms(R, r, p, q);
  if (!(std::abs(h.A.value) > 1e-12 * std::abs(h.B.value)) || h.A.value == 0.0) {
    throw Error(ErrorCode::DegenerateDenominator,
                "attraction integral vanishes; chi is undetermined for this tuple");
  }
  ChiResult out;
  out.chi = -h.B.value / h.A.value;
  out.in_range = out.chi >= 0.0 && out.chi <= 1.0;
  return out;
}

double eccentricity(double R, double r) {
  const double a = R + r;
  if (a <= 0.0) return 0.0;
  const double ratio = R / a;
  return std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
}

namespace {

EllipseTuple make_tuple(double R, double r, const ForceParams& p, const QuadratureSpec& q) {
  EllipseTuple t;
  t.R = R;
  t.r = r;
  const ChiResult c = chi_for_tuple(R, r, p, q);
  t.chi = c.chi;
  t.chi_in_range = c.in_range;
  t.eccentricity = eccentricity(R, r);
  t.residual_G = ellipse_G(R, r, p, q).value;
  t.residual_H = ellipse_H(R, r, c.chi, p, q).value;
  return t;
}

}  // namespace

EquilibriumBranch ellipse_branch(const ForceParams& p, int n_points, const QuadratureSpec& q) {
  if (n_points < 2) throw Error(ErrorCode::InvalidArgument, "ellipse branch needs n_points >= 2");
  const double R_bar = solve_ring_radius(p, q);
  const double r_bar = solve_trivial_r(p, q);
  EquilibriumBranch br;
  br.tuples.resize(n_points);
  std::vector<std::string> errors(n_points);
  std::vector<ErrorCode> codes(n_points, ErrorCode::InvalidArgument);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_points; ++i) {
    try {
      const double r = r_bar * i / n_points;
      const double R = i == 0 ? R_bar : solve_ellipse_R(r, p, q);
      br.tuples[i] = make_tuple(R, r, p, q);
    } catch (const Error& e) {
      errors[i] = e.what();
      codes[i] = e.code();
    }
  }
  for (int i = 0; i < n_points; ++i) {
    if (!errors[i].empty()) throw Error(codes[i], "branch point " + std::to_string(i) + ": " + errors[i]);
  }
  br.ring_endpoint = br.tuples.front();
  br.trivial_endpoint = make_tuple(0.0, r_bar, p, q);
  br.trivial_endpoint.eccentricity = 1.0;
  return br;
}

std::string branch_csv(const EquilibriumBranch& branch) {
  std::string out = "r,R,chi,eccentricity,residual_G,residual_H\n";
  auto row = [&out](const EllipseTuple& t) {
    out += format_double(t.r) + "," + format_double(t.R) + "," + format_double(t.chi) + "," +
           format_double(t.eccentricity) + "," + format_double(t.residual_G) + "," +
           format_double(t.residual_H) + "\n";
  };
  for (const auto& t : branch.tuples) row(t);
  row(branch.trivial_endpoint);
  return out;
}

QuadratureResult strip_force_integral(double xa, double xb, double chi, const ForceParams& p,
                                      const QuadratureSpec& q) {
  const Mat2 T = tensor_from_angle(chi, 0.0);
  const double c = p.cutoff;
  auto inner = [&](double x) {
    if (std::abs(x) >= c) return 0.0;
    const double ymax = std::sqrt(c * c - x * x);
    return integrate([&](double y) { return total_force_untruncated({x, y}, T, p).x; }, -ymax,
                     ymax, {0.0}, q)
        .value;
  };
  return integrate(inner, xa, xb, {0.0}, q);
}

double stripe_condition(double Delta, double x1, const ForceParams& p, double chi,
                        const QuadratureSpec& q) {
  if (!(Delta > 0.0) || !(x1 >= 0.0) || x1 > 0.5 * Delta) {
    throw Error(ErrorCode::InvalidArgument, "stripe condition needs Delta > 0, 0 <= x1 <= Delta/2");
  }
  if (x1 == 0.5 * Delta) return 0.0;
  return strip_force_integral(x1, Delta - x1, chi, p, q).value;
}

}  // namespace anisoswarm
