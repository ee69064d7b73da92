#include <benchmark/benchmark.h>

#include "balarm/balarm.hpp"

using namespace balarm;

namespace {

const ModelSpec kSpec{2, 1, 0, 288};

BalarmModel model_ab() {
  return {kSpec, {0.5, 0.5}, {{{}, {2.89}, -1.0}, {{}, {4.48}, -4.0}}};
}

const SimulatedPanel& panel_ab() {
  static const auto s = simulate_balarm(model_ab(), 600, 1200, 1);
  return s;
}

BalarmModel model_h3() {
  const ModelSpec spec{6, 1, 3, 288};
  BalarmModel m{spec, std::vector<double>(6, 1.0 / 6.0), {}};
  for (int g = 0; g < 6; ++g)
    m.clusters.push_back({{-1.0, -0.5, 0.3, 0.2, 0.1, 0.0}, {3.0}, -4.0 - g});
  return m;
}

}  // namespace

static void BM_Simulate(benchmark::State& state) {
  const auto m = model_ab();
  for (auto _ : state) benchmark::DoNotOptimize(simulate_balarm(m, 600, 1200, 2));
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

static void BM_PanelStats(benchmark::State& state) {
  const auto& s = panel_ab();
  for (auto _ : state) benchmark::DoNotOptimize(PanelStats(s.panel, kSpec));
}
BENCHMARK(BM_PanelStats)->Unit(benchmark::kMillisecond);

static void BM_EStep(benchmark::State& state) {
  const PanelStats stats(panel_ab().panel, kSpec);
  const auto m = model_ab();
  for (auto _ : state) benchmark::DoNotOptimize(e_step(stats, m));
}
BENCHMARK(BM_EStep)->Unit(benchmark::kMicrosecond);

static void BM_MStep(benchmark::State& state) {
  const PanelStats stats(panel_ab().panel, kSpec);
  const auto m = model_ab();
  const auto tau = e_step(stats, m);
  for (auto _ : state) benchmark::DoNotOptimize(m_step(stats, tau, m));
}
BENCHMARK(BM_MStep)->Unit(benchmark::kMicrosecond);

static void BM_FitEm(benchmark::State& state) {
  const auto& s = panel_ab();
  EmOptions em;
  em.n_restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fit_em(s.panel, kSpec, em));
}
BENCHMARK(BM_FitEm)->Unit(benchmark::kMillisecond);

static void BM_EStepHospitalShape(benchmark::State& state) {
  const auto m = model_h3();
  static const auto s = simulate_balarm(m, 2775, 1159, 3);
  const PanelStats stats(s.panel, m.spec);
  for (auto _ : state) benchmark::DoNotOptimize(e_step(stats, m));
}
BENCHMARK(BM_EStepHospitalShape)->Unit(benchmark::kMillisecond);

static void BM_CycloCurves(benchmark::State& state) {
  const auto m = model_h3();
  for (auto _ : state) benchmark::DoNotOptimize(cyclo_curves(m.clusters[0], m.spec));
}
BENCHMARK(BM_CycloCurves)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
