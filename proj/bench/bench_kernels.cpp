// Parallel kernels against their serial references on a cluttered map.

#include <benchmark/benchmark.h>

#include <random>

#include "apfpred/harness.hpp"
#include "apfpred/sensor.hpp"

namespace {

using namespace apfpred;

const OccupancyGrid& clutter() {
  static const OccupancyGrid grid = [] {
    std::mt19937 rng(42);
    std::bernoulli_distribution occ(0.03);
    GridBuilder b(400, 400, 0.05);
    for (int iy = 0; iy < 400; ++iy) {
      for (int ix = 0; ix < 400; ++ix) {
        if (occ(rng)) b.set({ix, iy});
      }
    }
    return b.build();
  }();
  return grid;
}

// A free pose near the middle of the clutter map.
Vec2 free_pose() {
  Vec2 p{10.01, 10.02};
  while (clutter().occupied_at(p)) p.x += 0.05;
  return p;
}

void BM_scan(benchmark::State& state) {
  const auto n_rays = static_cast<int>(state.range(0));
  const Vec2 p = free_pose();
  for (auto _ : state) benchmark::DoNotOptimize(scan(clutter(), p, 0.3, 4.0, n_rays));
}

void BM_scan_serial(benchmark::State& state) {
  const auto n_rays = static_cast<int>(state.range(0));
  const Vec2 p = free_pose();
  for (auto _ : state) benchmark::DoNotOptimize(scan_serial(clutter(), p, 0.3, 4.0, n_rays));
}

void BM_footprint(benchmark::State& state) {
  const double rho0 = static_cast<double>(state.range(0));
  const Vec2 p = free_pose();
  for (auto _ : state) benchmark::DoNotOptimize(sensing_footprint(clutter(), p, 0.3, rho0));
}

void BM_footprint_serial(benchmark::State& state) {
  const double rho0 = static_cast<double>(state.range(0));
  const Vec2 p = free_pose();
  for (auto _ : state) benchmark::DoNotOptimize(sensing_footprint_serial(clutter(), p, 0.3, rho0));
}

void BM_compare_builtin(benchmark::State& state) {
  const auto configs = builtin_scenarios();
  for (auto _ : state) benchmark::DoNotOptimize(compare(configs));
}

}  // namespace

BENCHMARK(BM_scan)->Arg(181)->Arg(1441);
BENCHMARK(BM_scan_serial)->Arg(181)->Arg(1441);
BENCHMARK(BM_footprint)->Arg(2)->Arg(6);
BENCHMARK(BM_footprint_serial)->Arg(2)->Arg(6);
BENCHMARK(BM_compare_builtin)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
