#include "anisoswarm/discrete.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "anisoswarm/io.hpp"

namespace anisoswarm {

namespace {

constexpr double kCutoffBand = 1e-12;
constexpr double kCutoffJump = 1e-14;

void require_n(int n, int min_n) {
  if (n < min_n) {
    throw Error(ErrorCode::InvalidArgument,
                "ansatz needs at least " + std::to_string(min_n) + " particles");
  }
}

double coefficient_derivative(double rho, const ForceParams& p) {
  return p.delta_A * df_A(rho, p) + p.delta_R * df_R(rho, p);
}

/// Bisection down to adjacent doubles on f(lo) > 0 >= f(hi).
template <typename F>
double bisect(F&& f, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<Vec2> AnsatzSpec::positions() const {
  return std::visit(
      [&](const auto& k) -> std::vector<Vec2> {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ansatz::Ring>) {
          return ring_positions(n_particles, center, k.R);
        } else if constexpr (std::is_same_v<K, ansatz::Ellipse>) {
          return ellipse_positions(n_particles, center, k.R, k.r);
        } else {
          return line_positions(n_particles, center);
        }
      },
      kind);
}

TensorFieldSpec vertical_field(double chi) {
  TensorFieldSpec f;
  f.chi = chi;
  f.direction = direction::Homogeneous{0.0};
  return f;
}

std::vector<Vec2> ansatz_residual_vectors(const AnsatzSpec& spec, double chi,
                                          const ForceParams& p, const DomainSpec& domain) {
  require_n(spec.n_particles, 2);
  std::vector<Vec2> x = spec.positions();
  for (auto& v : x) v = wrap_position(v, domain);
  std::vector<Vec2> out(x.size());
  rhs(x, vertical_field(chi), p, domain, out);
  const double n = static_cast<double>(x.size());
  for (auto& v : out) v *= n;
  return out;
}

double ansatz_residual(const AnsatzSpec& spec, double chi, const ForceParams& p,
                       const DomainSpec& domain) {
  const auto r = ansatz_residual_vectors(spec, chi, p, domain);
  double m = 0.0;
  for (const auto& v : r) m = std::max(m, norm(v));
  return m;
}

DiscreteRingCondition discrete_ring_condition(int n, double R, const ForceParams& p) {
  require_n(n, 2);
  DiscreteRingCondition out;
  for (int k = 1; k < n; ++k) {
    const double phi = kTwoPi * k / n;
    const double u = 1.0 - std::cos(phi);
    const double v = -std::sin(phi);
    const Vec2 d{R * u, R * v};
    const double rho = norm(d);
    if (rho >= p.cutoff) continue;
    const double c = radial_coefficient(rho, 1.0, p);
    out.re += c * d.x;
    out.im += c * d.y;
    out.d_re += u * (c + rho * coefficient_derivative(rho, p));
  }
  return out;
}

double solve_discrete_ring(int n, const ForceParams& p) {
  require_n(n, 2);
  LengthScales ls;
  try {
    ls = compute_length_scales(p);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoSignChange) throw Error(ErrorCode::NoRoot, e.what());
    throw;
  }
  double lo = 0.5 * ls.d_a, hi = 0.5 * ls.d_e;
  const double f_lo = discrete_ring_condition(n, lo, p).re;
  const double f_hi = discrete_ring_condition(n, hi, p).re;
  if (!(f_lo > 0.0 && f_hi < 0.0)) {
    throw Error(ErrorCode::NoRoot, "discrete ring condition has no sign change on (d_a/2, d_e/2] for N = " +
                                       std::to_string(n));
  }
  double R = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const auto c = discrete_ring_condition(n, R, p);
    if (c.re == 0.0) return R;
    (c.re > 0.0 ? lo : hi) = R;
    double next = c.d_re != 0.0 ? R - c.re / c.d_re : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - R) <= 2e-16 * R || hi - lo <= 2e-16 * hi) return next;
    R = next;
  }
  return R;
}

DiscreteEllipse solve_discrete_ellipse(int n, double r, const ForceParams& p) {
  require_n(n, 4);
  if (n % 4 != 0) {
    throw Error(ErrorCode::NotDivisibleBy4,
                "the quarter-point condition needs N divisible by 4, got " + std::to_string(n));
  }
  if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidArgument, "r must be >= 0");
  const LengthScales ls = compute_length_scales(p);

  // First component of the particle-0 residual divided by R; chi drops out.
  auto g = [&](double R) {
    double s = 0.0;
    for (int k = 1; k < n; ++k) {
      const double phi = kTwoPi * k / n;
      const double u = 1.0 - std::cos(phi);
      const Vec2 d{R * u, -(R + r) * std::sin(phi)};
      const double rho = norm(d);
      if (rho >= p.cutoff) continue;
      s += radial_coefficient(rho, 1.0, p) * u;
    }
    return s;
  };

  const double R_e = std::min(0.5 * ls.d_e, ls.d_e - r);
  if (!(R_e > 0.0)) throw Error(ErrorCode::NoRoot, "empty search interval for R");
  constexpr int kGrid = 1000;
  std::vector<double> v(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i) v[i] = g(R_e * i / kGrid);
  double R = -1.0;
  for (int i = kGrid - 1; i >= 0; --i) {
    if (v[i] > 0.0 && v[i + 1] <= 0.0) {
      R = v[i + 1] == 0.0 ? R_e * (i + 1) / kGrid : bisect(g, R_e * i / kGrid, R_e * (i + 1) / kGrid);
      break;
    }
  }
  if (R < 0.0) {
    throw Error(ErrorCode::NoRoot,
                "no positive root of the discrete ellipse condition for r = " + format_double(r));
  }

  // Second component at particle N/4, linear in chi.
  double A = 0.0, B = 0.0;
  for (int k = 0; k < n; ++k) {
    if (k == n / 4) continue;
    const double phi = kTwoPi * k / n;
    const Vec2 d{-R * std::cos(phi), (R + r) * (1.0 - std::sin(phi))};
    const double rho = norm(d);
    if (rho >= p.cutoff) continue;
    A += p.delta_A * f_A(rho, p) * d.y;
    B += p.delta_R * f_R(rho, p) * d.y;
  }
  if (A == 0.0 || std::abs(A) <= 1e-12 * std::abs(B)) {
    throw Error(ErrorCode::DegenerateDenominator, "attractive part of the quarter-point condition vanishes");
  }
  DiscreteEllipse out;
  out.R = R;
  out.chi = -B / A;
  out.chi_in_range = out.chi >= 0.0 && out.chi <= 1.0;
  return out;
}

DenseMatrix jacobian(const ParticleState& state, const TensorFieldSpec& field,
                     const ForceParams& p, const DomainSpec& domain, JacobianMode mode) {
  p.validate();
  field.validate();
  check_domain(domain, p);
  const auto& x = state.positions;
  const int n = static_cast<int>(x.size());
  require_n(n, 2);
  DenseMatrix J(2 * n);
  const double inv_n = 1.0 / n;

  // Pairs sitting on the cutoff make the truncated force discontinuous.
  for (int j = 0; j < n; ++j) {
    const Mat2 T = tensor_at(field, wrap_position(x[j], domain));
    for (int k = 0; k < n; ++k) {
      if (k == j) continue;
      const Vec2 d = min_image(x[j] - x[k], domain);
      const double rho = norm(d);
      if (std::abs(rho - p.cutoff) <= kCutoffBand &&
          norm(total_force_untruncated(d, T, p)) > kCutoffJump) {
        throw Error(ErrorCode::PairAtCutoff, "particles " + std::to_string(j) + " and " +
                                                 std::to_string(k) + " sit at the cutoff distance");
      }
    }
  }

  if (mode.kind == JacobianMode::Kind::FiniteDifference) {
    if (!(mode.h > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be > 0");
    std::vector<Vec2> xp(x.begin(), x.end());
    std::vector<Vec2> vp(n), vm(n);
    for (int i = 0; i < 2 * n; ++i) {
      double& c = (i % 2 == 0) ? xp[i / 2].x : xp[i / 2].y;
      const double c0 = c;
      const double h = mode.h * std::max(1.0, std::abs(c0));
      c = c0 + h;
      const double up = c;
      rhs(xp, field, p, domain, vp);
      c = c0 - h;
      const double down = c;
      rhs(xp, field, p, domain, vm);
      c = c0;
      const double inv = 1.0 / (up - down);
      for (int r = 0; r < n; ++r) {
        J(2 * r, i) = (vp[r].x - vm[r].x) * inv;
        J(2 * r + 1, i) = (vp[r].y - vm[r].y) * inv;
      }
    }
    return J;
  }

  const bool homogeneous = field.is_homogeneous();
  for (int j = 0; j < n; ++j) {
    const Vec2 xj = wrap_position(x[j], domain);
    const Mat2 T = tensor_at(field, xj);
    TensorGradient grad{};
    if (!homogeneous) grad = tensor_gradient_at(field, xj);
    Mat2 diag{};
    Vec2 gx{}, gy{};
    for (int k = 0; k < n; ++k) {
      if (k == j) continue;
      const Vec2 d = min_image(x[j] - x[k], domain);
      const double rho = norm(d);
      if (rho >= p.cutoff) continue;
      Mat2 A = total_force_jacobian(d, T, p);
      A *= inv_n;
      diag += A;
      J(2 * j, 2 * k) -= A.xx;
      J(2 * j, 2 * k + 1) -= A.xy;
      J(2 * j + 1, 2 * k) -= A.yx;
      J(2 * j + 1, 2 * k + 1) -= A.yy;
      if (!homogeneous) {
        const double a = p.delta_A * f_A(rho, p) * inv_n;
        gx += a * (grad.dx * d);
        gy += a * (grad.dy * d);
      }
    }
    J(2 * j, 2 * j) += diag.xx + gx.x;
    J(2 * j + 1, 2 * j) += diag.yx + gx.y;
    J(2 * j, 2 * j + 1) += diag.xy + gy.x;
    J(2 * j + 1, 2 * j + 1) += diag.yy + gy.y;
  }
  return J;
}

std::vector<std::complex<double>> eigenvalues(const DenseMatrix& m) {
  const int n = m.n;
  if (n == 0) return {};
  std::vector<double> a = m.a;
  std::vector<double> wr(n), wi(n);
  const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, wr.data(),
                                        wi.data(), nullptr, 1, nullptr, 1);
  if (info != 0) {
    throw Error(ErrorCode::InvalidArgument, "dgeev failed with info " + std::to_string(info));
  }
  std::vector<std::complex<double>> out(n);
  for (int i = 0; i < n; ++i) out[i] = {wr[i], wi[i]};
  return out;
}

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "Stable";
    case Stability::Unstable: return "Unstable";
    case Stability::Marginal: return "Marginal";
  }
  return "Unknown";
}

StabilityReport classify_spectrum(std::vector<std::complex<double>> eig, double eps_zero) {
  StabilityReport rep;
  rep.max_real_nonzero = -std::numeric_limits<double>::infinity();
  for (const auto& l : eig) {
    if (std::abs(l.real()) <= eps_zero) {
      ++rep.n_zero_modes;
    } else {
      rep.max_real_nonzero = std::max(rep.max_real_nonzero, l.real());
    }
  }
  if (rep.n_zero_modes == static_cast<int>(eig.size())) {
    rep.classification = Stability::Marginal;
  } else {
    rep.classification = rep.max_real_nonzero < 0.0 ? Stability::Stable : Stability::Unstable;
  }
  rep.eigenvalues = std::move(eig);
  return rep;
}

StabilityReport stability(const AnsatzSpec& spec, double chi, const ForceParams& p,
                          const DomainSpec& domain, const StabilityOptions& opt) {
  if (!(opt.eps_zero >= 0.0) || !(opt.residual_gate > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "eps_zero must be >= 0 and residual_gate > 0");
  }
  const double res = ansatz_residual(spec, chi, p, domain);
  if (!(res <= opt.residual_gate)) {
    throw Error(ErrorCode::ResidualTooLarge, "ansatz residual " + format_double(res) +
                                                 " exceeds the gate " +
                                                 format_double(opt.residual_gate));
  }
  ParticleState state;
  state.positions = spec.positions();
  for (auto& v : state.positions) v = wrap_position(v, domain);
  const DenseMatrix J = jacobian(state, vertical_field(chi), p, domain);
  StabilityReport rep = classify_spectrum(eigenvalues(J), opt.eps_zero);
  rep.residual = res;
  return rep;
}

ThresholdResult line_stability_threshold(int n, const ForceParams& p, double tol_chi,
                                         const StabilityOptions& opt) {
  if (!(tol_chi > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol_chi must be > 0");
  require_n(n, 2);
  AnsatzSpec spec{ansatz::Line{}, n, {0.5, 0.5}};
  const DomainSpec torus = DomainSpec::torus();
  ThresholdResult out;
  auto cls = [&](double chi) {
    ++out.evaluations;
    return stability(spec, chi, p, torus, opt).classification;
  };
  if (cls(0.0) != Stability::Stable || cls(1.0) != Stability::Unstable) {
    throw Error(ErrorCode::NoBracket, "line ansatz is not Stable at chi = 0 and Unstable at chi = 1");
  }
  double lo = 0.0, hi = 1.0;
  while (hi - lo > tol_chi) {
    const double mid = 0.5 * (lo + hi);
    (cls(mid) == Stability::Stable ? lo : hi) = mid;
  }
  out.chi_stable = lo;
  out.chi_unstable = hi;
  out.chi_star = 0.5 * (lo + hi);
  return out;
}

std::string stability_sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "chi,max_real_nonzero,n_zero_modes,classification\n";
  for (const auto& r : rows) {
    os << format_double(r.chi) << ',' << format_double(r.report.max_real_nonzero) << ','
       << r.report.n_zero_modes << ',' << to_string(r.report.classification) << '\n';
  }
  return os.str();
}

}  // namespace anisoswarm
