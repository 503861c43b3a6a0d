#include <numeric>

#include <benchmark/benchmark.h>

#include "quadtomo/analysis.hpp"
#include "quadtomo/scenario.hpp"
#include "quadtomo/synthesis.hpp"
#include "quadtomo/tomography.hpp"

using namespace quadtomo;

namespace {

const ScenarioModel& model() {
  static const ScenarioModel m = buildScenarioModel(Scenario::defaults());
  return m;
}

MeasurementSet exactData(const Scenario& s) {
  const QuenchTruth truth(model().preparationBasis, model().quenchBasis, s.thermal);
  std::vector<Eigen::MatrixXd> phis;
  for (double t : s.times) phis.push_back(truth.referencedPixelCorrelations(t, s.imaging, true));
  return exactMeasurements(s.imaging, s.times, phis, 2000);
}

}  // namespace

static void BM_GpGroundState(benchmark::State& state) {
  Scenario s = Scenario::defaults();
  s.gridSize = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solveGpGroundState(s.params, s.trapShape(), s.gridSize));
}
BENCHMARK(BM_GpGroundState)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_SymplecticDiagonalize(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(symplecticDiagonalize(model().quench, 10));
}
BENCHMARK(BM_SymplecticDiagonalize)->Unit(benchmark::kMillisecond);

static void BM_ConeProjection(benchmark::State& state) {
  const int modes = static_cast<int>(state.range(0));
  Eigen::MatrixXd v = Eigen::MatrixXd::Random(2 * modes, 2 * modes);
  v = (v + v.transpose()).eval();
  for (auto _ : state) benchmark::DoNotOptimize(projectHeisenbergCone(v));
}
BENCHMARK(BM_ConeProjection)->Arg(5)->Arg(10)->Unit(benchmark::kMicrosecond);

static void BM_ReconstructWindow(benchmark::State& state) {
  const Scenario s = Scenario::defaults();
  const MeasurementSet data = exactData(s);
  const ReconstructionSetup setup{model().quenchBasis, s.imaging, s.solver, false};
  std::vector<int> all(s.times.size());
  std::iota(all.begin(), all.end(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(reconstructWindow(data, all, setup));
}
BENCHMARK(BM_ReconstructWindow)->Unit(benchmark::kMillisecond);

static void BM_SampleProfiles(benchmark::State& state) {
  const Scenario s = Scenario::defaults();
  const QuenchTruth truth(model().preparationBasis, model().quenchBasis, s.thermal);
  const PhaseProfileSampler sampler(truth.realSpacePhase(1.0), model().quenchBasis.gridPoints, s.imaging);
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(2000, 1, 0));
}
BENCHMARK(BM_SampleProfiles)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
