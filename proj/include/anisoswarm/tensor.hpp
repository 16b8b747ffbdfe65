#pragma once

// Stress tensor fields T(x) = chi s(x) (x) s(x) + l(x) (x) l(x), with
// l = s rotated by -pi/2. The direction s is parametrised by the angle theta
// of the rotation R_theta that maps (0,1) onto s, i.e. s = (-sin, cos).

#include <filesystem>
#include <variant>
#include <vector>

#include "anisoswarm/types.hpp"

namespace anisoswarm {

struct RotationAngle {
  double theta = 0.0;  // in [0, 2pi)

  /// Reduces any angle into [0, 2pi).
  static RotationAngle wrapped(double theta);
  Mat2 matrix() const;
};

namespace direction {

/// s = R_theta (0,1) everywhere.
struct Homogeneous {
  double theta = 0.0;
};

/// s is tangent to circles around `center` (counter-clockwise).
struct Circular {
  Vec2 center{0.5, 0.5};
};

/// theta(x) = amplitude * sin(wavevector . x).
struct SinusoidalAngle {
  double amplitude = 0.0;
  Vec2 wavevector{};
};

/// Unit vectors sampled on a regular lattice, bilinear interpolation with
/// renormalisation. Queries outside the lattice are clamped to its boundary.
struct PiecewiseGrid {
  Vec2 origin{};
  Vec2 spacing{1.0, 1.0};
  int nx = 0;
  int ny = 0;
  std::vector<Vec2> s;  // row-major, index = iy * nx + ix

  /// Loads `x,y,sx,sy` rows on a regular lattice. Throws FileError for
  /// unreadable files and InvalidConfig for irregular lattices or vectors
  /// that are not unit within 1e-9.
  static PiecewiseGrid load_csv(const std::filesystem::path& path);
};

}  // namespace direction

using DirectionField = std::variant<direction::Homogeneous, direction::Circular,
                                    direction::SinusoidalAngle, direction::PiecewiseGrid>;

struct TensorFieldSpec {
  double chi = 1.0;
  DirectionField direction = direction::Homogeneous{};

  void validate() const;
  bool is_homogeneous() const {
    return std::holds_alternative<direction::Homogeneous>(direction);
  }
};

/// Unit vector s(x).
Vec2 s_at(const TensorFieldSpec& spec, const Vec2& x);

/// l = s rotated by -pi/2.
constexpr Vec2 l_from_s(const Vec2& s) { return {s.y, -s.x}; }

Mat2 tensor_at(const TensorFieldSpec& spec, const Vec2& x);

/// Tensor for s = R_theta (0,1): I + (chi - 1) s s^T.
Mat2 tensor_from_angle(double chi, double theta);

/// dT/dx_i for i = 0 (x) and 1 (y).
struct TensorGradient {
  Mat2 dx;
  Mat2 dy;
};
TensorGradient tensor_gradient_at(const TensorFieldSpec& spec, const Vec2& x);

/// Rotates a homogeneous field: s' = R_theta s. Throws InvalidArgument for
/// non-homogeneous directions.
TensorFieldSpec rotate_homogeneous(const TensorFieldSpec& spec, RotationAngle theta);

/// Angle with R_theta (0,1) = s. Throws Error{NotUnit} when |s| deviates from
/// one by more than 1e-9.
RotationAngle angle_from_s(const Vec2& s);

}  // namespace anisoswarm
