#pragma once

// Finite-N ansatz states (ring, ellipse, vertical line), their parameter
// solves, the Jacobian of the particle dynamics and its spectrum.

#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "anisoswarm/forces.hpp"
#include "anisoswarm/sim.hpp"
#include "anisoswarm/tensor.hpp"

namespace anisoswarm {

namespace ansatz {
struct Ring {
  double R = 0.0;
};
struct Ellipse {
  double R = 0.0;
  double r = 0.0;
};
struct Line {};
}  // namespace ansatz

struct AnsatzSpec {
  std::variant<ansatz::Ring, ansatz::Ellipse, ansatz::Line> kind;
  int n_particles = 600;
  Vec2 center{0.5, 0.5};

  /// Same generators as init_state; torus wrapping applied by the caller.
  std::vector<Vec2> positions() const;
};

/// Homogeneous field with s = (0, 1), i.e. T = diag(1, chi).
TensorFieldSpec vertical_field(double chi);

/// max_j |rhs_j| * N at the ansatz positions under vertical_field(chi).
double ansatz_residual(const AnsatzSpec& spec, double chi, const ForceParams& p,
                       const DomainSpec& domain);

/// Residual vectors sum_{k != j} F(x_j - x_k, T) of every particle.
std::vector<Vec2> ansatz_residual_vectors(const AnsatzSpec& spec, double chi,
                                          const ForceParams& p, const DomainSpec& domain);

struct DiscreteRingCondition {
  double re = 0.0;  // first component of the particle-0 residual
  double im = 0.0;  // second component, zero by symmetry
  double d_re = 0.0;
};
/// Residual of particle 0 of the N-ring of radius R (chi = 1, plane).
DiscreteRingCondition discrete_ring_condition(int n, double R, const ForceParams& p);

/// Root of Re G_0 on (d_a/2, d_e/2] by bracketed Newton. Throws Error{NoRoot}.
double solve_discrete_ring(int n, const ForceParams& p);

struct DiscreteEllipse {
  double R = 0.0;
  double chi = 0.0;
  bool chi_in_range = true;
};
/// R from the chi-free first component at particle 0, chi from the linear
/// second component at particle N/4. Throws NotDivisibleBy4, NoRoot,
/// DegenerateDenominator.
DiscreteEllipse solve_discrete_ellipse(int n, double r, const ForceParams& p);

/// Dense column-major n x n matrix.
struct DenseMatrix {
  int n = 0;
  std::vector<double> a;

  explicit DenseMatrix(int size = 0) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(j) * n + i]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(j) * n + i]; }
};

struct JacobianMode {
  enum class Kind { Analytic, FiniteDifference } kind = Kind::Analytic;
  double h = 1e-8;  // relative FD step, scaled by max(1, |x|)

  static JacobianMode analytic() { return {}; }
  static JacobianMode finite_difference(double h = 1e-8) { return {Kind::FiniteDifference, h}; }
};

/// d rhs / d x for coordinates ordered (x_0, y_0, x_1, y_1, ...).
/// Throws Error{PairAtCutoff} when a pair sits within 1e-12 of the cutoff
/// and the force jump there is not negligible.
DenseMatrix jacobian(const ParticleState& state, const TensorFieldSpec& field,
                     const ForceParams& p, const DomainSpec& domain,
                     JacobianMode mode = JacobianMode::analytic());

/// Eigenvalues of a general real matrix (LAPACK dgeev).
std::vector<std::complex<double>> eigenvalues(const DenseMatrix& m);

enum class Stability { Stable, Unstable, Marginal };
std::string_view to_string(Stability s);

struct StabilityReport {
  std::vector<std::complex<double>> eigenvalues;
  double max_real_nonzero = 0.0;  // -inf when every mode is a zero mode
  int n_zero_modes = 0;
  Stability classification = Stability::Marginal;
  double residual = 0.0;
};

struct StabilityOptions {
  double eps_zero = 1e-8;
  double residual_gate = 1e-8;
};

/// Spectrum of the linearisation at the ansatz. Symmetry modes (two
/// translations; one rotation for the chi = 1 ring) have zero real part and
/// are excluded through eps_zero. Throws ResidualTooLarge, PairAtCutoff.
StabilityReport stability(const AnsatzSpec& spec, double chi, const ForceParams& p,
                          const DomainSpec& domain, const StabilityOptions& opt = {});

/// Classification from a spectrum.
StabilityReport classify_spectrum(std::vector<std::complex<double>> eig, double eps_zero);

struct ThresholdResult {
  double chi_star = 0.0;
  double chi_stable = 0.0;    // largest chi found Stable
  double chi_unstable = 1.0;  // smallest chi found Unstable
  int evaluations = 0;
};

/// Bisection in chi on the stability of the torus line ansatz. Throws
/// Error{NoBracket} unless chi = 0 is Stable and chi = 1 Unstable.
ThresholdResult line_stability_threshold(int n, const ForceParams& p, double tol_chi = 1e-3,
                                         const StabilityOptions& opt = {});

struct SweepRow {
  double chi = 0.0;
  StabilityReport report;
};
std::string stability_sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace anisoswarm
