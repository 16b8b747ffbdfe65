#include "anisoswarm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "anisoswarm/equilibria.hpp"

namespace anisoswarm {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

double circular_mean(std::span<const Vec2> x, double Vec2::*c) {
  double s = 0.0, co = 0.0;
  for (const auto& p : x) {
    s += std::sin(kTwoPi * (p.*c));
    co += std::cos(kTwoPi * (p.*c));
  }
  double m = std::atan2(s, co) / kTwoPi;
  if (m < 0.0) m += 1.0;
  return m;
}

/// Root of the Eberly distance equation by bisection.
double eberly_root(double r0, double z0, double z1, double g) {
  const double n0 = r0 * z0;
  double s0 = z1 - 1.0;
  double s1 = g < 0.0 ? 0.0 : std::hypot(n0, z1) - 1.0;
  double s = 0.0;
  for (int i = 0; i < 200; ++i) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double ratio0 = n0 / (s + r0);
    const double ratio1 = z1 / (s + 1.0);
    const double gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
    if (gs > 0.0) {
      s0 = s;
    } else if (gs < 0.0) {
      s1 = s;
    } else {
      break;
    }
  }
  return s;
}

}  // namespace

EllipseFit fit_ellipse(std::span<const Vec2> x) {
  if (x.size() < 5) throw Error(ErrorCode::InvalidArgument, "ellipse fit needs at least 5 points");
  const double n = static_cast<double>(x.size());
  Vec2 c{};
  for (const auto& p : x) c += p;
  c *= 1.0 / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : x) {
    const Vec2 d = p - c;
    sxx += d.x * d.x;
    sxy += d.x * d.y;
    syy += d.y * d.y;
  }
  sxx /= n;
  sxy /= n;
  syy /= n;
  const double mean = 0.5 * (sxx + syy);
  const double rad = std::hypot(0.5 * (sxx - syy), sxy);
  const double l_max = mean + rad;
  const double l_min = std::max(0.0, mean - rad);
  // Spread at the level of rounding noise in the mean counts as coincident.
  const double scale = 1e-13 * std::max(1.0, norm(c));
  if (!(l_max > scale * scale)) throw Error(ErrorCode::Degenerate, "all points coincide");

  EllipseFit f;
  f.center = c;
  const double major = std::sqrt(2.0 * l_max);
  const double minor = std::sqrt(2.0 * l_min);
  f.fitted_R = minor;
  f.fitted_r = major - minor;
  double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  if (theta < 0.0) theta += kPi;
  if (theta >= kPi) theta -= kPi;
  f.orientation = theta;
  return f;
}

int cluster_count(std::span<const Vec2> x, double link_radius, const DomainSpec& domain) {
  if (!(link_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "link_radius must be > 0");
  const int n = static_cast<int>(x.size());
  UnionFind uf(n);
  const double r2 = link_radius * link_radius;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec2 d = min_image(x[i] - x[j], domain);
      if (d.x * d.x + d.y * d.y < r2) uf.unite(i, j);
    }
  }
  int k = 0;
  for (int i = 0; i < n; ++i) k += uf.find(i) == i;
  return k;
}

double distance_to_ellipse(double u, double v, double a, double b) {
  const double y0 = std::abs(u), y1 = std::abs(v);
  if (b <= 1e-12 * a) return std::hypot(std::max(0.0, y0 - a), y1);
  if (y1 > 0.0) {
    if (y0 > 0.0) {
      const double z0 = y0 / a, z1 = y1 / b;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g == 0.0) return 0.0;
      const double r0 = (a / b) * (a / b);
      const double s = eberly_root(r0, z0, z1, g);
      const double x0 = r0 * y0 / (s + r0);
      const double x1 = y1 / (s + 1.0);
      return std::hypot(x0 - y0, x1 - y1);
    }
    return std::abs(y1 - b);
  }
  const double numer = a * y0, denom = a * a - b * b;
  if (numer < denom) {
    const double xde = numer / denom;
    const double x0 = a * xde;
    const double x1 = b * std::sqrt(1.0 - xde * xde);
    return std::hypot(x0 - y0, x1);
  }
  return std::abs(y0 - a);
}

std::string_view to_string(PatternClass c) {
  switch (c) {
    case PatternClass::Ring: return "Ring";
    case PatternClass::Ellipse: return "Ellipse";
    case PatternClass::VerticalLine: return "VerticalLine";
    case PatternClass::Clusters: return "Clusters";
    case PatternClass::Dispersed: return "Dispersed";
  }
  return "Unknown";
}

void ClassifyOptions::validate() const {
  const double v[] = {link_radius, line_min_extent, line_max_horizontal_std, ring_max_eccentricity,
                      ring_max_radial_spread, ellipse_max_boundary_rms};
  for (double t : v) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw Error(ErrorCode::InvalidConfig, "classifier thresholds must be finite and > 0");
    }
  }
}

Vec2 centroid(std::span<const Vec2> x, const DomainSpec& domain) {
  if (x.empty()) return {};
  if (domain.is_torus()) return {circular_mean(x, &Vec2::x), circular_mean(x, &Vec2::y)};
  Vec2 c{};
  for (const auto& p : x) c += p;
  return (1.0 / static_cast<double>(x.size())) * c;
}

PatternSummary classify(std::span<const Vec2> x, const DomainSpec& domain,
                        const ClassifyOptions& opt) {
  opt.validate();
  if (x.size() < 5) throw Error(ErrorCode::InvalidArgument, "classification needs at least 5 points");
  const std::size_t n = x.size();
  PatternSummary s;
  const Vec2 c0 = centroid(x, domain);

  // Unwrap around the centroid so the fit sees one contiguous copy.
  std::vector<Vec2> local(n);
  for (std::size_t i = 0; i < n; ++i) local[i] = c0 + min_image(x[i] - c0, domain);

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = domain.is_torus() ? x[i].y : local[i].y;
  std::sort(ys.begin(), ys.end());
  if (domain.is_torus()) {
    double gap = ys.front() + 1.0 - ys.back();
    for (std::size_t i = 1; i < n; ++i) gap = std::max(gap, ys[i] - ys[i - 1]);
    s.vertical_extent = 1.0 - gap;
  } else {
    s.vertical_extent = ys.back() - ys.front();
  }

  double mx = 0.0;
  for (const auto& p : local) mx += p.x;
  mx /= static_cast<double>(n);
  double vx = 0.0;
  for (const auto& p : local) vx += (p.x - mx) * (p.x - mx);
  s.horizontal_std = std::sqrt(vx / static_cast<double>(n));

  s.cluster_count = cluster_count(x, opt.link_radius, domain);

  bool degenerate = false;
  try {
    const EllipseFit f = fit_ellipse(local);
    s.center = wrap_position(f.center, domain);
    s.fitted_R = f.fitted_R;
    s.fitted_r = f.fitted_r;
    s.orientation = f.orientation;
    s.eccentricity = eccentricity(f.fitted_R, f.fitted_r);

    const double a = f.fitted_R + f.fitted_r, b = f.fitted_R;
    const double ca = std::cos(f.orientation), sa = std::sin(f.orientation);
    double rsum = 0.0, rsq = 0.0, dsq = 0.0;
    for (const auto& p : local) {
      const Vec2 d = p - f.center;
      const double rho = norm(d);
      rsum += rho;
      rsq += rho * rho;
      const double u = ca * d.x + sa * d.y, v = -sa * d.x + ca * d.y;
      const double e = distance_to_ellipse(u, v, a, b);
      dsq += e * e;
    }
    const double rmean = rsum / static_cast<double>(n);
    const double rvar = std::max(0.0, rsq / static_cast<double>(n) - rmean * rmean);
    s.radial_spread = rmean > 0.0 ? std::sqrt(rvar) / rmean : 0.0;
    s.boundary_rms = a > 0.0 ? std::sqrt(dsq / static_cast<double>(n)) / a : 0.0;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Degenerate) throw;
    degenerate = true;
    s.center = wrap_position(c0, domain);
  }

  if (s.vertical_extent >= opt.line_min_extent && s.horizontal_std < opt.line_max_horizontal_std) {
    s.cls = PatternClass::VerticalLine;
  } else if (s.cluster_count >= 2) {
    s.cls = PatternClass::Clusters;
  } else if (!degenerate && s.eccentricity < opt.ring_max_eccentricity &&
             s.radial_spread < opt.ring_max_radial_spread) {
    s.cls = PatternClass::Ring;
  } else if (!degenerate && s.eccentricity >= opt.ring_max_eccentricity &&
             s.boundary_rms <= opt.ellipse_max_boundary_rms) {
    s.cls = PatternClass::Ellipse;
  } else {
    s.cls = PatternClass::Dispersed;
  }
  return s;
}

std::string pattern_summary_json(const PatternSummary& s) {
  nlohmann::ordered_json j;
  j["class"] = std::string(to_string(s.cls));
  j["center"] = {s.center.x, s.center.y};
  j["fitted_R"] = s.fitted_R;
  j["fitted_r"] = s.fitted_r;
  j["eccentricity"] = s.eccentricity;
  j["orientation"] = s.orientation;
  j["vertical_extent"] = s.vertical_extent;
  j["horizontal_std"] = s.horizontal_std;
  j["radial_spread"] = s.radial_spread;
  j["boundary_rms"] = s.boundary_rms;
  j["cluster_count"] = s.cluster_count;
  return j.dump(2) + "\n";
}

}  // namespace anisoswarm
