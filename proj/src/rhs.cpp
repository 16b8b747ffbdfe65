#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "anisoswarm/sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace anisoswarm {

namespace {

// Both kernels funnel every pair through this function so that the sum for
// particle j is formed from identical terms in identical order.
template <typename Indices>
Vec2 velocity_of(std::size_t j, std::span<const Vec2> x, const Indices& candidates, const Mat2& T,
                 const ForceParams& p, const DomainSpec& domain) {
  Vec2 acc{};
  for (const auto k : candidates) {
    if (static_cast<std::size_t>(k) == j) continue;
    const Vec2 d = min_image(x[j] - x[k], domain);
    if (norm(d) >= p.cutoff) continue;
    acc += total_force(d, T, p);
  }
  const double n = static_cast<double>(x.size());
  return {acc.x / n, acc.y / n};
}

struct IotaRange {
  std::size_t n;
  struct It {
    std::size_t i;
    std::size_t operator*() const { return i; }
    It& operator++() {
      ++i;
      return *this;
    }
    bool operator!=(const It& o) const { return i != o.i; }
  };
  It begin() const { return {0}; }
  It end() const { return {n}; }
};

/// Uniform bins with edge >= cutoff. Particle indices inside a bin are
/// ascending because they are inserted by a stable counting sort.
struct CellGrid {
  int mx = 0, my = 0;
  bool periodic = false;
  Vec2 lo{};
  Vec2 edge{};
  std::vector<int> cell_of;
  std::vector<int> start;  // size mx*my + 1
  std::vector<int> members;

  int bin(double v, double lo_v, double e, int m) const {
    const int c = static_cast<int>((v - lo_v) / e);
    return std::clamp(c, 0, m - 1);
  }
};

constexpr int kMaxCellsPerAxis = 1024;

bool build_grid(std::span<const Vec2> x, double cutoff, const DomainSpec& domain, CellGrid& g) {
  const std::size_t n = x.size();
  if (domain.is_torus()) {
    const int m = std::min(static_cast<int>(std::floor(1.0 / cutoff)), kMaxCellsPerAxis);
    if (m < 3) return false;
    g.mx = g.my = m;
    g.periodic = true;
    g.lo = {0.0, 0.0};
    g.edge = {1.0 / m, 1.0 / m};
  } else {
    Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi = -lo;
    for (const Vec2& p : x) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    if (!std::isfinite(lo.x) || !std::isfinite(lo.y) || !std::isfinite(hi.x) ||
        !std::isfinite(hi.y)) {
      return false;
    }
    auto axis = [&](double span, int& m, double& e) {
      m = std::clamp(static_cast<int>(span / cutoff) + 1, 1, kMaxCellsPerAxis);
      e = std::max(cutoff, span / m * (1.0 + 1e-12));
    };
    axis(hi.x - lo.x, g.mx, g.edge.x);
    axis(hi.y - lo.y, g.my, g.edge.y);
    g.periodic = false;
    g.lo = lo;
  }
  const int ncell = g.mx * g.my;
  g.cell_of.resize(n);
  g.start.assign(static_cast<std::size_t>(ncell) + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = wrap_position(x[i], domain);
    const int c = g.bin(p.y, g.lo.y, g.edge.y, g.my) * g.mx + g.bin(p.x, g.lo.x, g.edge.x, g.mx);
    g.cell_of[i] = c;
    ++g.start[c + 1];
  }
  for (int c = 0; c < ncell; ++c) g.start[c + 1] += g.start[c];
  g.members.resize(n);
  std::vector<int> fill(g.start.begin(), g.start.end() - 1);
  for (std::size_t i = 0; i < n; ++i) g.members[fill[g.cell_of[i]]++] = static_cast<int>(i);
  return true;
}

void gather_neighbours(const CellGrid& g, int cell, std::vector<int>& out) {
  out.clear();
  const int cx = cell % g.mx;
  const int cy = cell / g.mx;
  for (int dy = -1; dy <= 1; ++dy) {
    int y = cy + dy;
    if (g.periodic) {
      y = (y + g.my) % g.my;
    } else if (y < 0 || y >= g.my) {
      continue;
    }
    for (int dx = -1; dx <= 1; ++dx) {
      int xx = cx + dx;
      if (g.periodic) {
        xx = (xx + g.mx) % g.mx;
      } else if (xx < 0 || xx >= g.mx) {
        continue;
      }
      const int c = y * g.mx + xx;
      out.insert(out.end(), g.members.begin() + g.start[c], g.members.begin() + g.start[c + 1]);
    }
  }
  std::sort(out.begin(), out.end());
}

Mat2 tensor_for(const TensorFieldSpec& field, const Vec2& xj, const DomainSpec& domain) {
  return tensor_at(field, wrap_position(xj, domain));
}

}  // namespace

void rhs_reference(std::span<const Vec2> x, const TensorFieldSpec& field,
                   const ForceParams& params, const DomainSpec& domain, std::span<Vec2> out) {
  const IotaRange all{x.size()};
  for (std::size_t j = 0; j < x.size(); ++j) {
    out[j] = velocity_of(j, x, all, tensor_for(field, x[j], domain), params, domain);
  }
}

void rhs(std::span<const Vec2> x, const TensorFieldSpec& field, const ForceParams& params,
         const DomainSpec& domain, std::span<Vec2> out) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  CellGrid grid;
  if (!build_grid(x, params.cutoff, domain, grid)) {
    const IotaRange all{x.size()};
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      out[j] = velocity_of(static_cast<std::size_t>(j), x, all, tensor_for(field, x[j], domain),
                           params, domain);
    }
    return;
  }
#pragma omp parallel
  {
    std::vector<int> candidates;
    int last_cell = -1;
#pragma omp for schedule(static)
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      const int cell = grid.cell_of[j];
      if (cell != last_cell) {
        gather_neighbours(grid, cell, candidates);
        last_cell = cell;
      }
      out[j] = velocity_of(static_cast<std::size_t>(j), x, candidates,
                           tensor_for(field, x[j], domain), params, domain);
    }
  }
}

std::vector<Vec2> rhs(const ParticleState& state, const TensorFieldSpec& field,
                      const ForceParams& params, const DomainSpec& domain) {
  std::vector<Vec2> out(state.positions.size());
  rhs(state.positions, field, params, domain, out);
  return out;
}

double max_speed(std::span<const Vec2> v) {
  double m = 0.0;
  for (const Vec2& u : v) m = std::max(m, norm(u));
  return m;
}

void set_num_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

double pair_potential(double rho, const ForceParams& p) {
  rho = std::min(rho, p.cutoff);
  if (rho <= 0.0) return 0.0;
  // int_0^rho s^k e^{-a s} ds = gamma_lower(k+1, a rho) / a^{k+1}
  auto moment = [rho](int k, double a) {
    if (a == 0.0) return std::pow(rho, k + 1) / (k + 1);
    return boost::math::tgamma_lower(k + 1.0, a * rho) / std::pow(a, k + 1);
  };
  const double repulsion = p.alpha * moment(3, p.e_R) + p.beta * moment(1, p.e_R);
  const double attraction = -p.gamma * moment(2, p.e_A);
  return -(p.delta_R * repulsion + p.delta_A * attraction);
}

double interaction_energy(std::span<const Vec2> x, const ForceParams& params,
                          const DomainSpec& domain) {
  long double sum = 0.0L;
  for (std::size_t j = 0; j < x.size(); ++j) {
    for (std::size_t k = j + 1; k < x.size(); ++k) {
      sum += pair_potential(norm(min_image(x[j] - x[k], domain)), params);
    }
  }
  const double n = static_cast<double>(x.size());
  return static_cast<double>(sum) / (n * n);
}

}  // namespace anisoswarm
