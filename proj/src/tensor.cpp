#include "anisoswarm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace anisoswarm {

RotationAngle RotationAngle::wrapped(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return {t};
}

Mat2 RotationAngle::matrix() const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c, -s, s, c};
}

namespace {

Vec2 s_from_angle(double theta) { return {-std::sin(theta), std::cos(theta)}; }

Vec2 grid_node(const direction::PiecewiseGrid& g, int ix, int iy) {
  return g.s[static_cast<std::size_t>(iy) * g.nx + ix];
}

Vec2 sample_grid(const direction::PiecewiseGrid& g, const Vec2& x) {
  auto locate = [](double coord, double origin, double h, int n, int& i0, double& frac) {
    double u = (coord - origin) / h;
    u = std::clamp(u, 0.0, static_cast<double>(n - 1));
    i0 = std::min(static_cast<int>(std::floor(u)), std::max(n - 2, 0));
    frac = n > 1 ? u - i0 : 0.0;
  };
  int ix = 0, iy = 0;
  double fx = 0.0, fy = 0.0;
  locate(x.x, g.origin.x, g.spacing.x, g.nx, ix, fx);
  locate(x.y, g.origin.y, g.spacing.y, g.ny, iy, fy);
  const int ix1 = std::min(ix + 1, g.nx - 1);
  const int iy1 = std::min(iy + 1, g.ny - 1);
  const Vec2 v = (1 - fx) * (1 - fy) * grid_node(g, ix, iy) + fx * (1 - fy) * grid_node(g, ix1, iy) +
                 (1 - fx) * fy * grid_node(g, ix, iy1) + fx * fy * grid_node(g, ix1, iy1);
  const double n = norm(v);
  if (n < 1e-12) {
    // Opposite neighbours cancel; fall back to the nearest node.
    return grid_node(g, fx < 0.5 ? ix : ix1, fy < 0.5 ? iy : iy1);
  }
  return (1.0 / n) * v;
}

double theta_of_s(const Vec2& s) {
  // s = (-sin t, cos t)
  return std::atan2(-s.x, s.y);
}

struct SVisitor {
  const Vec2& x;
  Vec2 operator()(const direction::Homogeneous& h) const { return s_from_angle(h.theta); }
  Vec2 operator()(const direction::Circular& c) const {
    const Vec2 r = x - c.center;
    const double n = norm(r);
    if (n == 0.0) return {0.0, 1.0};
    return {-r.y / n, r.x / n};
  }
  Vec2 operator()(const direction::SinusoidalAngle& a) const {
    return s_from_angle(a.amplitude * std::sin(dot(a.wavevector, x)));
  }
  Vec2 operator()(const direction::PiecewiseGrid& g) const { return sample_grid(g, x); }
};

/// Gradient of the direction angle theta(x).
struct GradVisitor {
  const TensorFieldSpec& spec;
  const Vec2& x;
  Vec2 operator()(const direction::Homogeneous&) const { return {}; }
  Vec2 operator()(const direction::Circular& c) const {
    // s = (-sin t, cos t) = (-ry, rx)/|r|  =>  t = atan2(ry, rx)
    const Vec2 r = x - c.center;
    const double n2 = dot(r, r);
    if (n2 == 0.0) return {};
    return {-r.y / n2, r.x / n2};
  }
  Vec2 operator()(const direction::SinusoidalAngle& a) const {
    return a.amplitude * std::cos(dot(a.wavevector, x)) * a.wavevector;
  }
  Vec2 operator()(const direction::PiecewiseGrid& g) const {
    // Piecewise-bilinear field: one-cell-scale central difference of the angle.
    const double hx = 1e-6 * g.spacing.x;
    const double hy = 1e-6 * g.spacing.y;
    auto angle_diff = [&](const Vec2& a, const Vec2& b) {
      double d = theta_of_s(s_at(spec, a)) - theta_of_s(s_at(spec, b));
      // s and -s describe the same tensor; keep the difference in (-pi/2, pi/2].
      while (d > kPi / 2) d -= kPi;
      while (d <= -kPi / 2) d += kPi;
      return d;
    };
    return {angle_diff(x + Vec2{hx, 0}, x - Vec2{hx, 0}) / (2 * hx),
            angle_diff(x + Vec2{0, hy}, x - Vec2{0, hy}) / (2 * hy)};
  }
};

}  // namespace

void TensorFieldSpec::validate() const {
  if (!std::isfinite(chi) || chi < 0.0 || chi > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "chi must lie in [0,1]");
  }
  if (const auto* g = std::get_if<direction::PiecewiseGrid>(&direction)) {
    if (g->nx < 1 || g->ny < 1 || g->s.size() != static_cast<std::size_t>(g->nx) * g->ny) {
      throw Error(ErrorCode::InvalidArgument, "direction grid has inconsistent dimensions");
    }
  }
}

Vec2 s_at(const TensorFieldSpec& spec, const Vec2& x) {
  return std::visit(SVisitor{x}, spec.direction);
}

Mat2 tensor_at(const TensorFieldSpec& spec, const Vec2& x) {
  const Vec2 s = s_at(spec, x);
  const Vec2 l = l_from_s(s);
  return spec.chi * Mat2::outer(s, s) + Mat2::outer(l, l);
}

Mat2 tensor_from_angle(double chi, double theta) {
  const Vec2 s = s_from_angle(theta);
  const Vec2 l = l_from_s(s);
  return chi * Mat2::outer(s, s) + Mat2::outer(l, l);
}

TensorGradient tensor_gradient_at(const TensorFieldSpec& spec, const Vec2& x) {
  const Vec2 grad_theta = std::visit(GradVisitor{spec, x}, spec.direction);
  if (grad_theta.x == 0.0 && grad_theta.y == 0.0) return {};
  // T = I + (chi-1) s s^T, ds/dtheta = -l.
  const Vec2 s = s_at(spec, x);
  const Vec2 l = l_from_s(s);
  Mat2 dT_dtheta = Mat2::outer(l, s) + Mat2::outer(s, l);
  dT_dtheta *= -(spec.chi - 1.0);
  return {grad_theta.x * dT_dtheta, grad_theta.y * dT_dtheta};
}

TensorFieldSpec rotate_homogeneous(const TensorFieldSpec& spec, RotationAngle theta) {
  const auto* h = std::get_if<direction::Homogeneous>(&spec.direction);
  if (h == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "rotate_homogeneous requires a homogeneous field");
  }
  TensorFieldSpec out = spec;
  out.direction = direction::Homogeneous{RotationAngle::wrapped(h->theta + theta.theta).theta};
  return out;
}

RotationAngle angle_from_s(const Vec2& s) {
  if (std::abs(norm(s) - 1.0) > 1e-9) {
    throw Error(ErrorCode::NotUnit, "direction vector is not of unit length");
  }
  const double c = std::acos(std::clamp(s.y, -1.0, 1.0));
  return RotationAngle::wrapped(s.x < 0.0 ? c : kTwoPi - c);
}

direction::PiecewiseGrid direction::PiecewiseGrid::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileError, "cannot open direction grid '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::FileError, "empty direction grid file");
  line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
  if (line != "x,y,sx,sy") {
    throw Error(ErrorCode::InvalidConfig, "direction grid header must be 'x,y,sx,sy'");
  }
  struct Row {
    double x, y, sx, sy;
  };
  std::vector<Row> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    Row r{};
    if (!(ss >> r.x >> r.y >> r.sx >> r.sy)) {
      throw Error(ErrorCode::InvalidConfig, "malformed row at line " + std::to_string(lineno));
    }
    if (std::abs(std::hypot(r.sx, r.sy) - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidConfig,
                  "direction at line " + std::to_string(lineno) + " is not a unit vector");
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw Error(ErrorCode::InvalidConfig, "direction grid has no rows");

  std::vector<double> xs, ys;
  for (const Row& r : rows) {
    xs.push_back(r.x);
    ys.push_back(r.y);
  }
  auto unique_sorted = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(),
                        [](double a, double b) { return std::abs(a - b) <= 1e-12 * (1 + std::abs(a)); }),
            v.end());
  };
  unique_sorted(xs);
  unique_sorted(ys);
  auto spacing_of = [](const std::vector<double>& v, const char* axis) {
    if (v.size() < 2) return 1.0;
    const double h = v[1] - v[0];
    for (std::size_t i = 2; i < v.size(); ++i) {
      if (std::abs((v[i] - v[i - 1]) - h) > 1e-9 * (1 + std::abs(h))) {
        throw Error(ErrorCode::InvalidConfig,
                    std::string("direction grid is not regular along ") + axis);
      }
    }
    return h;
  };
  PiecewiseGrid g;
  g.nx = static_cast<int>(xs.size());
  g.ny = static_cast<int>(ys.size());
  g.origin = {xs.front(), ys.front()};
  g.spacing = {spacing_of(xs, "x"), spacing_of(ys, "y")};
  if (rows.size() != static_cast<std::size_t>(g.nx) * g.ny) {
    throw Error(ErrorCode::InvalidConfig, "direction grid does not cover a full lattice");
  }
  g.s.assign(rows.size(), Vec2{});
  std::vector<bool> seen(rows.size(), false);
  for (const Row& r : rows) {
    const auto ix = static_cast<int>(std::lround((r.x - g.origin.x) / g.spacing.x));
    const auto iy = static_cast<int>(std::lround((r.y - g.origin.y) / g.spacing.y));
    const std::size_t idx = static_cast<std::size_t>(iy) * g.nx + ix;
    if (ix < 0 || ix >= g.nx || iy < 0 || iy >= g.ny || seen[idx]) {
      throw Error(ErrorCode::InvalidConfig, "duplicate or off-lattice node in direction grid");
    }
    seen[idx] = true;
    g.s[idx] = {r.sx, r.sy};
  }
  return g;
}

}  // namespace anisoswarm
