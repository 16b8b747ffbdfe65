#pragma once

// N-particle integration of dx_j/dt = (1/N) sum_{k != j} F(x_j - x_k, T(x_j))
// on the unit torus (minimum image) or the plane.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "anisoswarm/forces.hpp"
#include "anisoswarm/tensor.hpp"
#include "anisoswarm/types.hpp"

namespace anisoswarm {

enum class DomainKind { Torus, Plane };

struct DomainSpec {
  DomainKind kind = DomainKind::Torus;

  static constexpr DomainSpec torus() { return {DomainKind::Torus}; }
  static constexpr DomainSpec plane() { return {DomainKind::Plane}; }
  constexpr bool is_torus() const { return kind == DomainKind::Torus; }
};

struct ParticleState {
  double t = 0.0;
  std::vector<Vec2> positions;
};

namespace initial {
struct Gaussian {
  Vec2 mean{0.5, 0.5};
  Vec2 sigma{0.005, 0.005};
};
struct UniformRandom {};
struct RingEquiangular {
  Vec2 center{0.5, 0.5};
  double R = 0.005;
};
struct EllipseEquiangular {
  Vec2 center{0.5, 0.5};
  double R = 0.005;
  double r = 0.0;
};
struct LineUniform {
  Vec2 center{0.5, 0.5};
};
struct FromFile {
  std::filesystem::path path;
};
}  // namespace initial

using InitialCondition =
    std::variant<initial::Gaussian, initial::UniformRandom, initial::RingEquiangular,
                 initial::EllipseEquiangular, initial::LineUniform, initial::FromFile>;

enum class IntegratorKind { EulerFixed, DormandPrinceAdaptive };

struct IntegratorSpec {
  IntegratorKind kind = IntegratorKind::EulerFixed;
  double abs_tol = 1e-6;
  double rel_tol = 1e-6;
};

struct SimConfig {
  int n_particles = 600;
  double dt = 0.2;
  IntegratorSpec integrator;
  double t_end = 2000.0;
  double stationarity_tol = 1e-9;  // 0 disables the early stop
  std::uint64_t seed = 1;
  InitialCondition initial = initial::Gaussian{};
  double perturbation_delta = 0.0;
  int snapshot_every = 0;  // 0 records only the final state

  /// Throws Error{InvalidConfig}.
  void validate() const;
};

/// Torus: each component wrapped into [-0.5, 0.5). Plane: identity.
Vec2 min_image(const Vec2& d, const DomainSpec& domain);

/// Torus: coordinates wrapped into [0, 1). Plane: identity.
Vec2 wrap_position(const Vec2& x, const DomainSpec& domain);

// Deterministic generators shared with the discrete ansatz module.
std::vector<Vec2> ring_positions(int n, const Vec2& center, double R);
std::vector<Vec2> ellipse_positions(int n, const Vec2& center, double R, double r);
/// Particle k = 1..N at vertical offset (2k-1)/(2N) above the center.
std::vector<Vec2> line_positions(int n, const Vec2& center);

/// Initial state per config. Normal draws are consumed in particle order
/// (x then y per particle): first for Gaussian placement, then for the
/// perturbation delta * Z_k. Throws FileError / InvalidConfig.
ParticleState init_state(const SimConfig& config, const DomainSpec& domain);

// ---------------------------------------------------------------------------
// Right-hand side kernels

/// Serial O(N^2) reference. Pairs at or beyond the cutoff are skipped; the
/// sum over k runs in ascending index order.
void rhs_reference(std::span<const Vec2> x, const TensorFieldSpec& field,
                   const ForceParams& params, const DomainSpec& domain, std::span<Vec2> out);

/// Production kernel: cell list with cell edge >= cutoff, OpenMP over the
/// target particle. Neighbour candidates are sorted by index so the
/// accumulation order (and every bit of the result) matches rhs_reference.
void rhs(std::span<const Vec2> x, const TensorFieldSpec& field, const ForceParams& params,
         const DomainSpec& domain, std::span<Vec2> out);

std::vector<Vec2> rhs(const ParticleState& state, const TensorFieldSpec& field,
                      const ForceParams& params, const DomainSpec& domain);

double max_speed(std::span<const Vec2> v);

/// Isotropic pair potential w(rho) = -int_0^rho (delta_A f_A + delta_R f_R)(s) s ds,
/// held constant beyond the cutoff.
double pair_potential(double rho, const ForceParams& params);

/// E = 1/(2N^2) sum_{j != k} w(|x_j - x_k|). A Lyapunov function of the
/// dynamics when chi = 1 and the field is homogeneous.
double interaction_energy(std::span<const Vec2> x, const ForceParams& params,
                          const DomainSpec& domain);

/// Sets the OpenMP team size for subsequent kernels (no-op without OpenMP).
void set_num_threads(int n);

// ---------------------------------------------------------------------------
// Time stepping

/// Carries the adaptive step-size suggestion between calls.
class Stepper {
 public:
  Stepper(const SimConfig& config, const TensorFieldSpec& field, const ForceParams& params,
          const DomainSpec& domain);

  /// Advances `state` by exactly config.dt. `velocity` must hold rhs(state);
  /// it is reused as the first stage. Throws Error{StepSizeUnderflow}.
  void advance(ParticleState& state, std::span<const Vec2> velocity);

  long rejected_substeps() const { return rejected_; }
  long accepted_substeps() const { return accepted_; }

 private:
  void advance_euler(ParticleState& state, std::span<const Vec2> velocity);
  void advance_dopri(ParticleState& state, std::span<const Vec2> velocity);

  const SimConfig& config_;
  const TensorFieldSpec& field_;
  const ForceParams& params_;
  DomainSpec domain_;
  double h_suggest_;
  long rejected_ = 0;
  long accepted_ = 0;
  std::vector<Vec2> k_[7];
  std::vector<Vec2> stage_;
};

/// One step of length config.dt from `state`.
ParticleState step(const ParticleState& state, const SimConfig& config,
                   const TensorFieldSpec& field, const ForceParams& params,
                   const DomainSpec& domain);

enum class TerminationReason { ReachedTEnd, Stationary };
std::string_view to_string(TerminationReason r);

struct Trajectory {
  std::vector<ParticleState> snapshots;  // last entry is the final state
  TerminationReason termination = TerminationReason::ReachedTEnd;
  double t_final = 0.0;
  double max_speed_final = 0.0;
  long n_steps = 0;
  double wall_seconds = 0.0;

  const ParticleState& final_state() const { return snapshots.back(); }
};

/// Throws Error{InvalidConfig} when the cutoff exceeds half the torus side.
void check_domain(const DomainSpec& domain, const ForceParams& params);

/// Integrates until t_end or until max_j |rhs_j| < stationarity_tol (checked
/// before every step, including the first).
Trajectory simulate(const SimConfig& config, const TensorFieldSpec& field,
                    const ForceParams& params, const DomainSpec& domain);

Trajectory simulate_from(ParticleState initial, const SimConfig& config,
                         const TensorFieldSpec& field, const ForceParams& params,
                         const DomainSpec& domain);

}  // namespace anisoswarm
