// Serial reference kernel against the cell-list/OpenMP kernel.
#include <benchmark/benchmark.h>

#include <vector>

#include "anisoswarm/sim.hpp"

using namespace anisoswarm;

namespace {

ParticleState gaussian_state(int n, double sigma) {
  SimConfig c;
  c.n_particles = n;
  c.initial = initial::Gaussian{{0.5, 0.5}, {sigma, sigma}};
  return init_state(c, DomainSpec::torus());
}

ParticleState uniform_state(int n) {
  SimConfig c;
  c.n_particles = n;
  c.initial = initial::UniformRandom{};
  return init_state(c, DomainSpec::torus());
}

const TensorFieldSpec kField{0.4, direction::Homogeneous{0.0}};

void run(benchmark::State& st, const ParticleState& s, const ForceParams& p, bool reference) {
  std::vector<Vec2> out(s.positions.size());
  for (auto _ : st) {
    if (reference) {
      rhs_reference(s.positions, kField, p, DomainSpec::torus(), out);
    } else {
      rhs(s.positions, kField, p, DomainSpec::torus(), out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(s.positions.size()));
}

void BM_ReferenceClustered(benchmark::State& st) {
  run(st, gaussian_state(static_cast<int>(st.range(0)), 0.005), ForceParams{}, true);
}
void BM_ParallelClustered(benchmark::State& st) {
  run(st, gaussian_state(static_cast<int>(st.range(0)), 0.005), ForceParams{}, false);
}

// A short cutoff on a spread-out state is where the cell list pays off.
ForceParams short_cutoff() {
  ForceParams p;
  p.cutoff = 0.05;
  return p;
}
void BM_ReferenceSpreadShortCutoff(benchmark::State& st) {
  run(st, uniform_state(static_cast<int>(st.range(0))), short_cutoff(), true);
}
void BM_ParallelSpreadShortCutoff(benchmark::State& st) {
  run(st, uniform_state(static_cast<int>(st.range(0))), short_cutoff(), false);
}

}  // namespace

BENCHMARK(BM_ReferenceClustered)->Arg(200)->Arg(600)->Arg(1200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ParallelClustered)->Arg(200)->Arg(600)->Arg(1200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReferenceSpreadShortCutoff)->Arg(600)->Arg(4800)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ParallelSpreadShortCutoff)->Arg(600)->Arg(4800)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
