#include <benchmark/benchmark.h>

#include <cmath>

#include "spinclock/cluster.hpp"
#include "spinclock/fitting.hpp"
#include "spinclock/lattice_mc.hpp"
#include "spinclock/orientation.hpp"
#include "spinclock/presets.hpp"
#include "spinclock/relaxation.hpp"
#include "spinclock/thermo.hpp"

using namespace spinclock;

static void BM_SolveSpinSystem(benchmark::State& state) {
  SpinSystem s = load_preset("complex2").system;
  if (state.range(0) == 0) s.hyperfine.reset();
  const FieldVector h(0.3, 0.1, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(solve(s, h, true));
  state.SetLabel(state.range(0) ? "S=3/2, I=7/2 (dim 32)" : "S=3/2 (dim 4)");
}
BENCHMARK(BM_SolveSpinSystem)->Arg(0)->Arg(1);

static void BM_SpecificHeatPeak(benchmark::State& state) {
  const LevelSet l = solve(load_preset("complex1").system, FieldVector(), false);
  for (auto _ : state) benchmark::DoNotOptimize(specific_heat_peak(l, 0.35, 20.0));
}
BENCHMARK(BM_SpecificHeatPeak);

static void BM_PowderHeatCurve(benchmark::State& state) {
  const SpinSystem s = load_preset("complex1").system;
  const TemperatureGrid grid = TemperatureGrid::logarithmic(0.35, 20.0, 200);
  const OrientationScheme scheme = RandomPowder{static_cast<int>(state.range(0))};
  for (auto _ : state) {
    benchmark::DoNotOptimize(averaged_observable(s, scheme, ObservableKind::kSpecificHeat, grid, Vec3(0, 0, 1.0)));
  }
}
BENCHMARK(BM_PowderHeatCurve)->Arg(100)->Arg(350)->Unit(benchmark::kMillisecond);

static void BM_MetropolisSweep(benchmark::State& state) {
  const int l = static_cast<int>(state.range(0));
  MetropolisChain chain(IsingLattice({l, l, l}, IsingLattice::bipartite12(), -0.0504, 1.5), 7);
  chain.set_temperature(1.0);
  for (auto _ : state) chain.sweep();
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(l) * l * l);
}
BENCHMARK(BM_MetropolisSweep)->Arg(6)->Arg(10);

static void BM_ClusterLevels(benchmark::State& state) {
  const SpinSystem s = load_preset("complex1").system;
  const ClusterModel m = star_cluster(s, -0.0504, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cluster_levels(m));
  state.SetLabel("dim " + std::to_string(m.dimension()));
}
BENCHMARK(BM_ClusterLevels)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_ColeColeFit(benchmark::State& state) {
  const ColeColeParams truth{1.0, 0.2, 1e-4, 0.97};
  std::vector<AcPoint> data;
  for (int i = 0; i < 20; ++i) {
    const double w = 10.0 * std::pow(1e6, i / 19.0);
    const ComplexSusceptibility c = cole_cole_eval(truth, w);
    data.push_back({w, c.re, c.im, std::nullopt});
  }
  for (auto _ : state) benchmark::DoNotOptimize(cole_cole_fit(data));
}
BENCHMARK(BM_ColeColeFit)->Unit(benchmark::kMillisecond);

static void BM_ZfsPowderFit(benchmark::State& state) {
  SpinSystem s = load_preset("complex4").system;
  Dataset d;
  d.kind = ResponseKind::kMagnetization;
  for (double t : {2.0, 4.0, 6.0}) {
    for (double h = 0.5; h <= 5.0001; h += 0.5) d.points.push_back({t, h, 0.0, 0.0, std::nullopt});
  }
  const auto m = powder_magnetization(s, 1e-4, d.points);
  for (std::size_t i = 0; i < m.size(); ++i) d.points[i].value = m[i];
  ZfsFitOptions opt;
  opt.starts_per_sign = 2;
  for (auto _ : state) benchmark::DoNotOptimize(fit_zfs_powder_magnetization(d, opt));
}
BENCHMARK(BM_ZfsPowderFit)->Unit(benchmark::kMillisecond)->Iterations(2);
BENCHMARK_MAIN();
