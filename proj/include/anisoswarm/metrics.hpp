#pragma once

// Shape descriptors for particle states: covariance ellipse fit, single-link
// clusters and a coarse pattern label.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anisoswarm/sim.hpp"

namespace anisoswarm {

struct EllipseFit {
  Vec2 center{};
  double fitted_R = 0.0;     // minor semi-axis
  double fitted_r = 0.0;     // major minus minor semi-axis
  double orientation = 0.0;  // angle of the major axis from e_x, in [0, pi)
};

/// Semi-axes sqrt(2 lambda) from the position covariance. Throws
/// InvalidArgument for N < 5 and Degenerate when all points coincide.
EllipseFit fit_ellipse(std::span<const Vec2> x);

/// Connected components of the graph joining pairs closer than link_radius
/// (minimum-image distance on the torus).
int cluster_count(std::span<const Vec2> x, double link_radius,
                  const DomainSpec& domain = DomainSpec::torus());

/// Distance from (u, v) to the axis-aligned ellipse with semi-axes a >= b >= 0
/// centred at the origin. b = 0 is the segment [-a, a].
double distance_to_ellipse(double u, double v, double a, double b);

enum class PatternClass { Ring, Ellipse, VerticalLine, Clusters, Dispersed };
std::string_view to_string(PatternClass c);

struct ClassifyOptions {
  double link_radius = 0.02;
  double line_min_extent = 0.9;
  double line_max_horizontal_std = 0.01;
  double ring_max_eccentricity = 0.1;
  double ring_max_radial_spread = 0.1;   // std / mean of the radii
  double ellipse_max_boundary_rms = 0.15;  // RMS distance / major semi-axis

  void validate() const;
};

struct PatternSummary {
  PatternClass cls = PatternClass::Dispersed;
  Vec2 center{};
  double fitted_R = 0.0;
  double fitted_r = 0.0;
  double eccentricity = 0.0;
  double orientation = 0.0;
  double vertical_extent = 0.0;
  double horizontal_std = 0.0;
  double radial_spread = 0.0;
  double boundary_rms = 0.0;
  int cluster_count = 0;
};

/// Centroid by circular mean per coordinate on the torus, plain mean on the plane.
Vec2 centroid(std::span<const Vec2> x, const DomainSpec& domain);

/// Labels a state. Rules, first match wins: VerticalLine, then Clusters for
/// two or more clusters, then Ring, then Ellipse, otherwise Dispersed.
PatternSummary classify(std::span<const Vec2> x, const DomainSpec& domain,
                        const ClassifyOptions& opt = {});

std::string pattern_summary_json(const PatternSummary& s);

}  // namespace anisoswarm
