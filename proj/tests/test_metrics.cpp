#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "anisoswarm/equilibria.hpp"
#include "anisoswarm/metrics.hpp"

using namespace anisoswarm;

namespace {

std::vector<Vec2> uniform_points(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec2> x(n);
  for (auto& p : x) p = {u(gen), u(gen)};
  return x;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("ring fit") {
    // Equiangular ring: second moment R^2/2 per axis, so sqrt(2 lambda) = R.
    const double R = 0.0017;
    const auto x = ring_positions(600, {0.5, 0.5}, R);
    const EllipseFit f = fit_ellipse(x);
    CHECK(std::abs(f.fitted_R - R) <= 0.01 * R);
    CHECK(std::abs(f.fitted_R + f.fitted_r - R) <= 0.01 * R);
    CHECK(eccentricity(f.fitted_R, f.fitted_r) < 0.05);
    CHECK(f.center.x == doctest::Approx(0.5).epsilon(1e-14));
  }

  TEST_CASE("ellipse fit") {
    for (int n : {200, 600, 1000}) {
      const double R = 0.0012, r = 0.0015;
      const EllipseFit f = fit_ellipse(ellipse_positions(n, {0.3, 0.6}, R, r));
      CHECK(std::abs(f.orientation - kPi / 2) <= kPi / 180);
      CHECK(f.fitted_R == doctest::Approx(R).epsilon(1e-10));
      CHECK(f.fitted_R + f.fitted_r == doctest::Approx(R + r).epsilon(1e-10));
      const double e = eccentricity(f.fitted_R, f.fitted_r);
      CHECK(std::abs(e - eccentricity(R, r)) <= 0.02 * eccentricity(R, r));
    }
    // Collinear points: rank one, horizontal major axis.
    const EllipseFit h = fit_ellipse(std::vector<Vec2>{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}});
    CHECK(h.orientation == doctest::Approx(0.0));
    CHECK(h.fitted_R == 0.0);
  }

  TEST_CASE("fit errors") {
    const std::vector<Vec2> same(10, Vec2{0.4, 0.4});
    try {
      fit_ellipse(same);
      FAIL("expected Degenerate");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Degenerate);
    }
    const std::vector<Vec2> few(4, Vec2{0.4, 0.4});
    CHECK_THROWS_AS(fit_ellipse(few), Error);
  }

  TEST_CASE("distance to ellipse") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (auto [a, b] : {std::pair{2.0, 1.0}, std::pair{1.0, 1.0}, std::pair{2.0, 0.1}, std::pair{2.0, 0.0}}) {
      for (int t = 0; t < 50; ++t) {
        const double x = u(gen), y = u(gen);
        double best = 1e300;
        constexpr int kS = 200000;
        for (int i = 0; i < kS; ++i) {
          const double th = kTwoPi * i / kS;
          best = std::min(best, std::hypot(x - a * std::cos(th), y - b * std::sin(th)));
        }
        CHECK(distance_to_ellipse(x, y, a, b) == doctest::Approx(best).epsilon(1e-6));
      }
    }
    CHECK(distance_to_ellipse(0.0, 0.0, 2.0, 1.0) == doctest::Approx(1.0));
    CHECK(distance_to_ellipse(1.0, 0.0, 2.0, 0.0) == 0.0);
  }

  TEST_CASE("cluster count") {
    const double R = 0.0017;
    const int n = 600;
    CHECK(cluster_count(ring_positions(n, {0.5, 0.5}, R), 1.01 * kTwoPi * R / n) == 1);

    auto two = ring_positions(100, {0.3, 0.5}, 0.01);
    for (const auto& p : ring_positions(100, {0.6, 0.5}, 0.01)) two.push_back(p);
    CHECK(cluster_count(two, 0.05) == 2);

    std::vector<Vec2> grid;
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) grid.push_back({0.05 + 0.1 * i, 0.05 + 0.1 * j});
    CHECK(cluster_count(grid, 0.09) == 100);
    // Across the periodic boundary.
    CHECK(cluster_count(std::vector<Vec2>{{0.001, 0.5}, {0.999, 0.5}}, 0.01) == 1);
    CHECK(cluster_count(std::vector<Vec2>{{0.001, 0.5}, {0.999, 0.5}}, 0.01, DomainSpec::plane()) == 2);

    const auto rnd = uniform_points(400, 9);
    int prev = 401;
    for (double lr : {0.005, 0.01, 0.02, 0.04, 0.08}) {
      const int k = cluster_count(rnd, lr);
      CHECK(k <= prev);
      prev = k;
    }
    CHECK_THROWS_AS(cluster_count(rnd, 0.0), Error);
  }

  TEST_CASE("classify ansatz states") {
    const auto line = line_positions(600, {0.5, 0.5});
    std::vector<Vec2> wrapped;
    for (const auto& p : line) wrapped.push_back(wrap_position(p, DomainSpec::torus()));
    CHECK(classify(wrapped, DomainSpec::torus()).cls == PatternClass::VerticalLine);

    const auto ring = classify(ring_positions(600, {0.5, 0.5}, 0.0017), DomainSpec::torus());
    CHECK(ring.cls == PatternClass::Ring);
    CHECK(ring.cluster_count == 1);
    CHECK(ring.fitted_R == doctest::Approx(0.0017).epsilon(1e-6));

    const auto ell = classify(ellipse_positions(600, {0.5, 0.5}, 0.0012, 0.0017), DomainSpec::torus());
    CHECK(ell.cls == PatternClass::Ellipse);
    CHECK(ell.boundary_rms < 1e-6);

    // A collapsed vertical segment counts as a flat ellipse.
    std::vector<Vec2> seg;
    for (int k = 0; k < 600; ++k) seg.push_back({0.5, 0.5 + 0.006 * std::sin(kTwoPi * k / 600)});
    const auto s = classify(seg, DomainSpec::torus());
    CHECK(s.cls == PatternClass::Ellipse);
    CHECK(s.eccentricity == doctest::Approx(1.0));

    std::vector<Vec2> filled;
    std::mt19937_64 gen(1);
    std::normal_distribution<double> nd(0.0, 0.002);
    for (int k = 0; k < 600; ++k) filled.push_back({0.5 + nd(gen), 0.5 + nd(gen)});
    CHECK(classify(filled, DomainSpec::torus()).cls == PatternClass::Dispersed);
  }

  TEST_CASE("classify random states") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto s = classify(uniform_points(600, seed), DomainSpec::torus());
      CHECK(s.cls != PatternClass::Ring);
      CHECK(s.cls != PatternClass::Ellipse);
      CHECK(s.cls != PatternClass::VerticalLine);
      if (s.cls == PatternClass::Clusters) CHECK(s.cluster_count > 10);
    }
  }

  TEST_CASE("classify is translation invariant on the torus") {
    const auto base = ellipse_positions(600, {0.5, 0.5}, 0.001, 0.002);
    const auto ref = classify(base, DomainSpec::torus());
    for (Vec2 shift : {Vec2{0.4999, 0.0}, Vec2{0.0, 0.4995}, Vec2{0.3, -0.7}}) {
      std::vector<Vec2> moved;
      for (const auto& p : base) moved.push_back(wrap_position(p + shift, DomainSpec::torus()));
      const auto s = classify(moved, DomainSpec::torus());
      CHECK(s.cls == ref.cls);
      CHECK(s.eccentricity == doctest::Approx(ref.eccentricity).epsilon(1e-9));
      CHECK(s.fitted_R == doctest::Approx(ref.fitted_R).epsilon(1e-9));
      const Vec2 d = min_image(s.center - wrap_position(ref.center + shift, DomainSpec::torus()),
                               DomainSpec::torus());
      CHECK(norm(d) <= 1e-12);
    }
  }

  TEST_CASE("summary JSON") {
    const auto s = classify(ring_positions(100, {0.5, 0.5}, 0.002), DomainSpec::torus());
    const auto j = nlohmann::json::parse(pattern_summary_json(s));
    CHECK(j["class"] == "Ring");
    for (const char* key : {"center", "fitted_R", "fitted_r", "eccentricity", "vertical_extent",
                            "cluster_count"}) {
      CHECK(j.contains(key));
    }
    CHECK(j["cluster_count"] == 1);
  }
}
