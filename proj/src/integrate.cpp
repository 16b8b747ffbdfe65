#include <algorithm>
#include <chrono>
#include <cmath>

#include "anisoswarm/sim.hpp"

namespace anisoswarm {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kMinSubstep = 1e-14;

}  // namespace

std::string_view to_string(TerminationReason r) {
  return r == TerminationReason::Stationary ? "Stationary" : "ReachedTEnd";
}

Stepper::Stepper(const SimConfig& config, const TensorFieldSpec& field, const ForceParams& params,
                 const DomainSpec& domain)
    : config_(config), field_(field), params_(params), domain_(domain), h_suggest_(config.dt) {}

void Stepper::advance(ParticleState& state, std::span<const Vec2> velocity) {
  if (config_.integrator.kind == IntegratorKind::EulerFixed) {
    advance_euler(state, velocity);
  } else {
    advance_dopri(state, velocity);
  }
}

void Stepper::advance_euler(ParticleState& state, std::span<const Vec2> velocity) {
  const double dt = config_.dt;
  for (std::size_t i = 0; i < state.positions.size(); ++i) {
    state.positions[i] = wrap_position(state.positions[i] + dt * velocity[i], domain_);
  }
  state.t += dt;
  ++accepted_;
}

void Stepper::advance_dopri(ParticleState& state, std::span<const Vec2> velocity) {
  const std::size_t n = state.positions.size();
  for (auto& k : k_) k.resize(n);
  stage_.resize(n);
  std::copy(velocity.begin(), velocity.end(), k_[0].begin());

  const double atol = config_.integrator.abs_tol;
  const double rtol = config_.integrator.rel_tol;
  std::vector<Vec2>& y = state.positions;
  std::vector<Vec2> y_new(n);

  auto eval_stage = [&](int out, auto&& combine) {
    for (std::size_t i = 0; i < n; ++i) stage_[i] = wrap_position(combine(i), domain_);
    rhs(stage_, field_, params_, domain_, k_[out]);
  };

  double remaining = config_.dt;
  while (remaining > 0.0) {
    const bool last = h_suggest_ >= remaining * (1.0 - 1e-12);
    const double h = last ? remaining : h_suggest_;
    if (h < kMinSubstep) {
      throw Error(ErrorCode::StepSizeUnderflow,
                  "adaptive substep fell below 1e-14 at t=" + std::to_string(state.t));
    }
    const auto& k1 = k_[0];
    const auto& k2 = k_[1];
    const auto& k3 = k_[2];
    const auto& k4 = k_[3];
    const auto& k5 = k_[4];
    const auto& k6 = k_[5];
    eval_stage(1, [&](std::size_t i) { return y[i] + (h * a21) * k1[i]; });
    eval_stage(2, [&](std::size_t i) { return y[i] + h * (a31 * k1[i] + a32 * k2[i]); });
    eval_stage(3, [&](std::size_t i) {
      return y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    });
    eval_stage(4, [&](std::size_t i) {
      return y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    });
    eval_stage(5, [&](std::size_t i) {
      return y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    });
    for (std::size_t i = 0; i < n; ++i) {
      y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    }
    for (std::size_t i = 0; i < n; ++i) stage_[i] = wrap_position(y_new[i], domain_);
    rhs(stage_, field_, params_, domain_, k_[6]);
    const auto& k7 = k_[6];

    double err2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                          e7 * k7[i]);
      const double sx = atol + rtol * std::max(std::abs(y[i].x), std::abs(y_new[i].x));
      const double sy = atol + rtol * std::max(std::abs(y[i].y), std::abs(y_new[i].y));
      err2 += (e.x / sx) * (e.x / sx) + (e.y / sy) * (e.y / sy);
    }
    const double err = std::sqrt(err2 / (2.0 * static_cast<double>(n)));

    if (err <= 1.0) {
      for (std::size_t i = 0; i < n; ++i) y[i] = stage_[i];
      std::swap(k_[0], k_[6]);  // first-same-as-last
      remaining = last ? 0.0 : remaining - h;
      ++accepted_;
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      // A truncated final substep says little about the natural step size.
      if (!last || h >= h_suggest_) h_suggest_ = h * factor;
    } else {
      ++rejected_;
      h_suggest_ = h * std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
    }
  }
  state.t += config_.dt;
}

ParticleState step(const ParticleState& state, const SimConfig& config,
                   const TensorFieldSpec& field, const ForceParams& params,
                   const DomainSpec& domain) {
  ParticleState next = state;
  const std::vector<Vec2> v = rhs(state, field, params, domain);
  Stepper stepper(config, field, params, domain);
  stepper.advance(next, v);
  return next;
}

Trajectory simulate(const SimConfig& config, const TensorFieldSpec& field,
                    const ForceParams& params, const DomainSpec& domain) {
  return simulate_from(init_state(config, domain), config, field, params, domain);
}

Trajectory simulate_from(ParticleState state, const SimConfig& config,
                         const TensorFieldSpec& field, const ForceParams& params,
                         const DomainSpec& domain) {
  config.validate();
  params.validate();
  field.validate();
  check_domain(domain, params);
  const auto t0 = std::chrono::steady_clock::now();

  const long n_total = static_cast<long>(std::ceil(config.t_end / config.dt - 1e-9));
  Trajectory traj;
  Stepper stepper(config, field, params, domain);
  std::vector<Vec2> v(state.positions.size());
  const double t_start = state.t;
  if (config.snapshot_every > 0) traj.snapshots.push_back(state);

  long n = 0;
  for (;;) {
    rhs(state.positions, field, params, domain, v);
    traj.max_speed_final = max_speed(v);
    if (traj.max_speed_final < config.stationarity_tol) {
      traj.termination = TerminationReason::Stationary;
      break;
    }
    if (n >= n_total) {
      traj.termination = TerminationReason::ReachedTEnd;
      break;
    }
    stepper.advance(state, v);
    ++n;
    // Re-derive t from the step count so it does not drift.
    state.t = t_start + static_cast<double>(n) * config.dt;
    if (config.snapshot_every > 0 && n % config.snapshot_every == 0) traj.snapshots.push_back(state);
  }
  if (traj.snapshots.empty() || traj.snapshots.back().t != state.t) traj.snapshots.push_back(state);
  traj.n_steps = n;
  traj.t_final = state.t;
  traj.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return traj;
}

}  // namespace anisoswarm
