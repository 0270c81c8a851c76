// Serial vs OpenMP raster kernels on the default intersection scenario.

#include <benchmark/benchmark.h>

#include "traj_atlas/pipeline.hpp"
#include "traj_atlas/raster.hpp"
#include "traj_atlas/scenario.hpp"

using namespace traj_atlas;

namespace {

struct Inputs {
  std::vector<Trajectory> trajs;
  GridGeometry geom;
  RasterGrid density;
  RasterGrid denoised;
  BinaryImage mask;
  std::vector<MorphPass> passes;
};

const Inputs& inputs() {
  static const Inputs in = [] {
    Inputs r;
    ScenarioConfig sc;
    sc.count = 1000;
    r.trajs = scenario_trajectories(sc);
    const MapBuildParams bp;
    r.passes = bp.morphology;
    r.geom = fit_grid(r.trajs, bp.resolution_m, bp.margin_m);
    r.density = rasterize(r.trajs, r.geom).grid;
    r.denoised = morphological_denoise(r.density, r.passes);
    r.mask = binarize(r.denoised, bp.threshold);
    return r;
  }();
  return in;
}

void BM_RasterizeOmp(benchmark::State& s) {
  const auto& in = inputs();
  for (auto _ : s) benchmark::DoNotOptimize(rasterize(in.trajs, in.geom));
}
void BM_RasterizeSerial(benchmark::State& s) {
  const auto& in = inputs();
  for (auto _ : s) benchmark::DoNotOptimize(serial::rasterize(in.trajs, in.geom));
}
void BM_MorphologyOmp(benchmark::State& s) {
  const auto& in = inputs();
  for (auto _ : s) benchmark::DoNotOptimize(morphological_denoise(in.density, in.passes));
}
void BM_MorphologySerial(benchmark::State& s) {
  const auto& in = inputs();
  for (auto _ : s) benchmark::DoNotOptimize(serial::morphological_denoise(in.density, in.passes));
}
void BM_BinarizeOmp(benchmark::State& s) {
  const auto& in = inputs();
  for (auto _ : s) benchmark::DoNotOptimize(binarize(in.denoised, 2));
}
void BM_BinarizeSerial(benchmark::State& s) {
  const auto& in = inputs();
  for (auto _ : s) benchmark::DoNotOptimize(serial::binarize(in.denoised, 2));
}
void BM_ThinOmp(benchmark::State& s) {
  const auto& in = inputs();
  for (auto _ : s) benchmark::DoNotOptimize(thin(in.mask));
}
void BM_ThinSerial(benchmark::State& s) {
  const auto& in = inputs();
  for (auto _ : s) benchmark::DoNotOptimize(serial::thin(in.mask));
}

}  // namespace

BENCHMARK(BM_RasterizeOmp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RasterizeSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MorphologyOmp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MorphologySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BinarizeOmp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BinarizeSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ThinOmp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ThinSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
