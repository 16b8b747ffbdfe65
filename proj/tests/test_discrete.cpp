#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "anisoswarm/discrete.hpp"
#include "anisoswarm/equilibria.hpp"

using namespace anisoswarm;

// Radii from Brent's method on the particle-0 residual, and line thresholds
// from the closed-form circulant spectrum of the line Jacobian, both in an
// independent double-precision script.
namespace ref {
struct RingRadius {
  int n;
  double R;
};
constexpr RingRadius ring[] = {
    {8, 0.0017171730936582743},   {50, 0.0017181177083458417},
    {100, 0.0017181182711116228}, {300, 0.0017181183081413506},
    {600, 0.001718118308575211},
};
constexpr double line_chi_star_100 = 0.2732572004501656;
}  // namespace ref

namespace {

double max_abs(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.a) s = std::max(s, std::abs(v));
  return s;
}

}  // namespace

TEST_SUITE("discrete") {
  TEST_CASE("discrete ring radius") {
    const ForceParams p;
    for (const auto& r : ref::ring) {
      const double R = solve_discrete_ring(r.n, p);
      CHECK(R == doctest::Approx(r.R).epsilon(1e-11));
      CHECK(std::abs(discrete_ring_condition(r.n, R, p).im) <= 1e-14);
    }
    const double R600 = solve_discrete_ring(600, p);
    CHECK(std::abs(R600 - 0.0017) <= 1e-4);
    const double Rc = solve_ring_radius(p);
    CHECK(std::abs(R600 - Rc) / Rc < 0.02);

    double prev_gap = 1.0;
    for (int n : {50, 100, 300, 600}) {
      const double gap = std::abs(solve_discrete_ring(n, p) - Rc);
      CHECK(gap < prev_gap);
      prev_gap = gap;
    }
  }

  TEST_CASE("N = 8 ring against a scan") {
    const ForceParams p;
    const double R = solve_discrete_ring(8, p);
    const AnsatzSpec spec{ansatz::Ring{R}, 8, {0.5, 0.5}};
    CHECK(ansatz_residual(spec, 1.0, p, DomainSpec::plane()) <= 1e-12);
    const LengthScales ls = compute_length_scales(p);
    const double lo = 0.5 * ls.d_a, hi = 0.5 * ls.d_e;
    constexpr int kScan = 200000;
    double root = -1.0;
    for (int i = 1; i <= kScan; ++i) {
      const double x = lo + (hi - lo) * i / kScan;
      if (discrete_ring_condition(8, x, p).re <= 0.0) {
        root = x;
        break;
      }
    }
    CHECK(std::abs(root - R) <= (hi - lo) / kScan);
  }

  TEST_CASE("discrete ring errors") {
    ForceParams p;
    p.gamma = 0.0;
    try {
      solve_discrete_ring(600, p);
      FAIL("expected NoRoot");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoRoot);
    }
  }

  TEST_CASE("ring residuals are rotations of each other") {
    const ForceParams p;
    for (double R : {0.001, 0.0017, 0.003}) {
      const AnsatzSpec spec{ansatz::Ring{R}, 600, {0.5, 0.5}};
      const auto v = ansatz_residual_vectors(spec, 1.0, p, DomainSpec::plane());
      double lo = 1e300, hi = 0.0;
      for (const auto& w : v) {
        lo = std::min(lo, norm(w));
        hi = std::max(hi, norm(w));
      }
      CHECK(hi - lo <= 1e-13);
    }
  }

  TEST_CASE("ring is no equilibrium for chi < 1") {
    const ForceParams p;
    const double R = solve_discrete_ring(600, p);
    const AnsatzSpec spec{ansatz::Ring{R}, 600, {0.5, 0.5}};
    CHECK(ansatz_residual(spec, 1.0, p, DomainSpec::plane()) <= 1e-12);
    for (double chi : {0.0, 0.2, 0.5, 0.9}) {
      CHECK(ansatz_residual(spec, chi, p, DomainSpec::plane()) > 1e-3);
    }
  }

  TEST_CASE("line ansatz is an equilibrium on the torus") {
    const ForceParams p;
    for (int n : {2, 100, 1200}) {
      const AnsatzSpec spec{ansatz::Line{}, n, {0.5, 0.5}};
      for (double chi : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        CHECK(ansatz_residual(spec, chi, p, DomainSpec::torus()) <= 1e-14);
      }
    }
  }

  TEST_CASE("discrete ellipse tuples") {
    const ForceParams p;
    const int n = 600;
    const DiscreteEllipse e0 = solve_discrete_ellipse(n, 0.0, p);
    CHECK(e0.R == doctest::Approx(solve_discrete_ring(n, p)).epsilon(1e-12));
    CHECK(e0.chi == doctest::Approx(1.0).epsilon(1e-9));

    double prev_R = 1.0, prev_chi = 2.0, prev_e = -1.0;
    for (int i = 0; i < 10; ++i) {
      const double r = 0.0005 * i;
      const DiscreteEllipse t = solve_discrete_ellipse(n, r, p);
      CHECK(t.R < prev_R);
      CHECK(t.chi < prev_chi);
      const double e = eccentricity(t.R, r);
      CHECK(e > prev_e);
      prev_R = t.R;
      prev_chi = t.chi;
      prev_e = e;

      // Both conditions hold at the points where they are imposed.
      const AnsatzSpec spec{ansatz::Ellipse{t.R, r}, n, {0.5, 0.5}};
      const auto v = ansatz_residual_vectors(spec, t.chi, p, DomainSpec::plane());
      CHECK(norm(v[0]) <= 1e-12);
      CHECK(norm(v[n / 4]) <= 1e-12);
    }
    CHECK(prev_chi > 0.0);
  }

  TEST_CASE("discrete ellipse errors") {
    const ForceParams p;
    try {
      solve_discrete_ellipse(602, 0.001, p);
      FAIL("expected NotDivisibleBy4");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotDivisibleBy4);
    }
    try {
      solve_discrete_ellipse(600, 0.0075, p);
      FAIL("expected NoRoot");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoRoot);
    }
  }

  TEST_CASE("two-body Jacobian structure") {
    const ForceParams p;
    const TensorFieldSpec f{0.3, direction::Homogeneous{0.7}};
    ParticleState s;
    s.positions = {{0.5, 0.5}, {0.503, 0.498}};
    const DenseMatrix J = jacobian(s, f, p, DomainSpec::plane());
    const Mat2 A = total_force_jacobian(s.positions[0] - s.positions[1],
                                        tensor_at(f, s.positions[0]), p);
    const double a[2][2] = {{A.xx, A.xy}, {A.yx, A.yy}};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        CHECK(J(i, j) == doctest::Approx(a[i][j] / 2).epsilon(1e-14));
        CHECK(J(i, 2 + j) == doctest::Approx(-a[i][j] / 2).epsilon(1e-14));
        CHECK(J(2 + i, 2 + j) == doctest::Approx(a[i][j] / 2).epsilon(1e-14));
        CHECK(J(2 + i, j) == doctest::Approx(-a[i][j] / 2).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("analytic Jacobian matches finite differences") {
    const ForceParams p;
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-0.01, 0.01);
    const TensorFieldSpec fields[] = {
        {0.3, direction::Homogeneous{0.4}},
        {0.6, direction::Circular{{0.5, 0.5}}},
        {0.2, direction::SinusoidalAngle{1.0, {30.0, 20.0}}},
    };
    for (int trial = 0; trial < 20; ++trial) {
      ParticleState s;
      for (int k = 0; k < 10; ++k) s.positions.push_back({0.5 + u(gen), 0.5 + u(gen)});
      const TensorFieldSpec& f = fields[trial % 3];
      const DomainSpec dom = trial % 2 ? DomainSpec::torus() : DomainSpec::plane();
      const DenseMatrix Ja = jacobian(s, f, p, dom);
      const DenseMatrix Jf = jacobian(s, f, p, dom, JacobianMode::finite_difference());
      double diff = 0.0;
      for (std::size_t i = 0; i < Ja.a.size(); ++i) diff = std::max(diff, std::abs(Ja.a[i] - Jf.a[i]));
      CHECK(diff / max_abs(Ja) <= 1e-5);
    }
  }

  TEST_CASE("translations are in the kernel for homogeneous fields") {
    const ForceParams p;
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-0.01, 0.01);
    ParticleState s;
    for (int k = 0; k < 30; ++k) s.positions.push_back({0.5 + u(gen), 0.5 + u(gen)});
    const DenseMatrix J = jacobian(s, {0.4, direction::Homogeneous{1.1}}, p, DomainSpec::plane());
    for (int dir = 0; dir < 2; ++dir) {
      for (int row = 0; row < J.n; ++row) {
        double acc = 0.0;
        for (int k = 0; k < 30; ++k) acc += J(row, 2 * k + dir);
        CHECK(std::abs(acc) <= 1e-10);
      }
    }
  }

  TEST_CASE("pair at the cutoff") {
    ForceParams p;
    p.cutoff = 0.01;
    ParticleState s;
    s.positions = {{0.5, 0.5}, {0.51, 0.5}};
    try {
      jacobian(s, {}, p, DomainSpec::plane());
      FAIL("expected PairAtCutoff");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::PairAtCutoff);
    }
    // A negligible force jump is tolerated.
    const ForceParams q;
    s.positions = {{0.25, 0.5}, {0.75, 0.5}};
    CHECK_NOTHROW(jacobian(s, {}, q, DomainSpec::torus()));
  }

  TEST_CASE("ring stability at chi = 1") {
    const ForceParams p;
    const double R = solve_discrete_ring(600, p);
    const StabilityReport rep =
        stability({ansatz::Ring{R}, 600, {0.5, 0.5}}, 1.0, p, DomainSpec::plane());
    CHECK(rep.classification == Stability::Stable);
    CHECK(rep.n_zero_modes == 3);
    CHECK(rep.max_real_nonzero < 0.0);
    CHECK(rep.eigenvalues.size() == 1200);
  }

  TEST_CASE("spectral conjugate symmetry") {
    const ForceParams p;
    const StabilityReport rep =
        stability({ansatz::Line{}, 100, {0.5, 0.5}}, 0.5, p, DomainSpec::torus());
    std::vector<double> im;
    for (const auto& l : rep.eigenvalues) im.push_back(l.imag());
    std::vector<double> neg(im.size());
    std::transform(im.begin(), im.end(), neg.begin(), [](double v) { return -v; });
    std::sort(im.begin(), im.end());
    std::sort(neg.begin(), neg.end());
    for (std::size_t i = 0; i < im.size(); ++i) CHECK(std::abs(im[i] - neg[i]) <= 1e-10);
  }

  TEST_CASE("line stability") {
    const ForceParams p;
    const AnsatzSpec line{ansatz::Line{}, 100, {0.5, 0.5}};
    const auto s01 = stability(line, 0.1, p, DomainSpec::torus());
    CHECK(s01.classification == Stability::Stable);
    CHECK(s01.n_zero_modes >= 1);
    CHECK(stability(line, 0.4, p, DomainSpec::torus()).classification == Stability::Unstable);

    const ThresholdResult t = line_stability_threshold(100, p, 1e-6);
    CHECK(std::abs(t.chi_star - ref::line_chi_star_100) <= 1e-5);
    CHECK(t.chi_unstable - t.chi_stable <= 1e-6);
    CHECK(stability(line, t.chi_stable, p, DomainSpec::torus()).classification ==
          Stability::Stable);
    CHECK(stability(line, t.chi_unstable, p, DomainSpec::torus()).classification ==
          Stability::Unstable);
  }

  TEST_CASE("stability errors") {
    const ForceParams p;
    const double R = solve_discrete_ring(100, p);
    try {
      stability({ansatz::Ring{R}, 100, {0.5, 0.5}}, 0.5, p, DomainSpec::plane());
      FAIL("expected ResidualTooLarge");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ResidualTooLarge);
    }
    // Two particles half a period apart do not interact: no bracket.
    try {
      line_stability_threshold(2, p);
      FAIL("expected NoBracket");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoBracket);
    }
  }

  TEST_CASE("spectrum classification and CSV") {
    const auto st = classify_spectrum({{0.0, 0.0}, {-1e-3, 0.0}}, 1e-8);
    CHECK(st.classification == Stability::Stable);
    CHECK(st.n_zero_modes == 1);
    CHECK(classify_spectrum({{0.0, 0.0}, {1e-3, 2.0}}, 1e-8).classification == Stability::Unstable);
    CHECK(classify_spectrum({{1e-9, 0.0}}, 1e-8).classification == Stability::Marginal);
    const std::string csv = stability_sweep_csv({{0.25, st}});
    CHECK(csv == "chi,max_real_nonzero,n_zero_modes,classification\n0.25,-0.001,1,Stable\n");
  }
}
