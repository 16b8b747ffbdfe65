#include <cmath>
#include <type_traits>

#include "anisoswarm/io.hpp"
#include "anisoswarm/rng.hpp"
#include "anisoswarm/sim.hpp"

namespace anisoswarm {

namespace {

double wrap_half(double v) {
  double w = v - std::floor(v + 0.5);
  if (w >= 0.5) w -= 1.0;
  if (w < -0.5) w += 1.0;
  return w;
}

double wrap_unit(double v) {
  const double w = v - std::floor(v);
  return w >= 1.0 ? 0.0 : w;
}

void invalid(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

bool finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

}  // namespace

Vec2 min_image(const Vec2& d, const DomainSpec& domain) {
  if (!domain.is_torus()) return d;
  return {wrap_half(d.x), wrap_half(d.y)};
}

Vec2 wrap_position(const Vec2& x, const DomainSpec& domain) {
  if (!domain.is_torus()) return x;
  return {wrap_unit(x.x), wrap_unit(x.y)};
}

void check_domain(const DomainSpec& domain, const ForceParams& params) {
  if (domain.is_torus() && params.cutoff > 0.5) {
    invalid("cutoff must not exceed 0.5 on the unit torus");
  }
}

void SimConfig::validate() const {
  if (n_particles < 2) invalid("n_particles must be >= 2");
  if (!(dt > 0.0) || !std::isfinite(dt)) invalid("dt must be > 0");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) invalid("t_end must be > 0");
  if (!(stationarity_tol >= 0.0)) invalid("stationarity_tol must be >= 0");
  if (!(perturbation_delta >= 0.0) || !std::isfinite(perturbation_delta)) {
    invalid("perturbation_delta must be >= 0");
  }
  if (snapshot_every < 0) invalid("snapshot_every must be >= 0");
  if (integrator.kind == IntegratorKind::DormandPrinceAdaptive &&
      (!(integrator.abs_tol > 0.0) || !(integrator.rel_tol >= 0.0))) {
    invalid("adaptive tolerances must satisfy abs_tol > 0, rel_tol >= 0");
  }
  std::visit(
      [](const auto& ic) {
        using T = std::decay_t<decltype(ic)>;
        if constexpr (std::is_same_v<T, initial::Gaussian>) {
          if (!(ic.sigma.x >= 0.0) || !(ic.sigma.y >= 0.0)) invalid("Gaussian sigma must be >= 0");
          if (!finite(ic.mean)) invalid("Gaussian mean must be finite");
        } else if constexpr (std::is_same_v<T, initial::RingEquiangular>) {
          if (!(ic.R >= 0.0) || !finite(ic.center)) invalid("ring radius must be >= 0");
        } else if constexpr (std::is_same_v<T, initial::EllipseEquiangular>) {
          if (!(ic.R >= 0.0) || !(ic.r >= 0.0) || !finite(ic.center)) {
            invalid("ellipse radii must be >= 0");
          }
        } else if constexpr (std::is_same_v<T, initial::LineUniform>) {
          if (!finite(ic.center)) invalid("line center must be finite");
        } else if constexpr (std::is_same_v<T, initial::FromFile>) {
          if (ic.path.empty()) invalid("initial file path is empty");
        }
      },
      initial);
}

std::vector<Vec2> ring_positions(int n, const Vec2& center, double R) {
  return ellipse_positions(n, center, R, 0.0);
}

std::vector<Vec2> ellipse_positions(int n, const Vec2& center, double R, double r) {
  std::vector<Vec2> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double phi = kTwoPi * k / n;
    out[k] = {center.x + R * std::cos(phi), center.y + (R + r) * std::sin(phi)};
  }
  return out;
}

std::vector<Vec2> line_positions(int n, const Vec2& center) {
  std::vector<Vec2> out(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    out[k - 1] = {center.x, center.y + (2.0 * k - 1.0) / (2.0 * n)};
  }
  return out;
}

ParticleState init_state(const SimConfig& config, const DomainSpec& domain) {
  config.validate();
  SplitMix64 rng(config.seed);
  ParticleState state;
  const int n = config.n_particles;

  std::visit(
      [&](const auto& ic) {
        using T = std::decay_t<decltype(ic)>;
        if constexpr (std::is_same_v<T, initial::Gaussian>) {
          state.positions.resize(n);
          for (auto& p : state.positions) {
            const Vec2 z = rng.normal_pair();
            p = {ic.mean.x + ic.sigma.x * z.x, ic.mean.y + ic.sigma.y * z.y};
          }
        } else if constexpr (std::is_same_v<T, initial::UniformRandom>) {
          state.positions.resize(n);
          for (auto& p : state.positions) {
            const double x = rng.uniform();
            p = {x, rng.uniform()};
          }
        } else if constexpr (std::is_same_v<T, initial::RingEquiangular>) {
          state.positions = ring_positions(n, ic.center, ic.R);
        } else if constexpr (std::is_same_v<T, initial::EllipseEquiangular>) {
          state.positions = ellipse_positions(n, ic.center, ic.R, ic.r);
        } else if constexpr (std::is_same_v<T, initial::LineUniform>) {
          state.positions = line_positions(n, ic.center);
        } else {
          // The file fixes N; n_particles is ignored.
          state.positions = read_positions_csv(ic.path);
          if (state.positions.size() < 2) {
            throw Error(ErrorCode::InvalidConfig, "initial file must contain at least 2 particles");
          }
        }
      },
      config.initial);

  if (config.perturbation_delta > 0.0) {
    for (auto& p : state.positions) p += config.perturbation_delta * rng.normal_pair();
  }
  for (auto& p : state.positions) p = wrap_position(p, domain);
  return state;
}

}  // namespace anisoswarm
