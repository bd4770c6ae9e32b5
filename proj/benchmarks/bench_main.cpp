#include <benchmark/benchmark.h>

#include <random>

#include "regbid/regbid.hpp"

using namespace regbid;

namespace {

std::vector<double> random_soc(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(n);
  for (auto& x : s) x = u(rng);
  return s;
}

void BM_Rainflow(benchmark::State& state) {
  const auto soc = random_soc(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(rainflow(soc));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Rainflow)->Arg(100)->Arg(1800)->Arg(100000);

void BM_AgingCost(benchmark::State& state) {
  const auto soc = random_soc(1800, 2);
  const auto spec = reference_battery();
  for (auto _ : state) benchmark::DoNotOptimize(aging_cost(soc, spec));
}
BENCHMARK(BM_AgingCost);

// One settlement hour of 2-second dispatch.
void BM_PolicyHour(benchmark::State& state) {
  const auto spec = reference_battery();
  const auto signal = synthesize(SignalKind::kOuProcess, 3, 1800, SynthParams{});
  const PenaltyModel penalty{2.0 / 3.0, 25.0, 600.0, kDefaultIntervalHours};
  RunOptions options;
  options.policy = state.range(0) ? PolicyKind::kSimple : PolicyKind::kProposed;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        run_policy(signal, 10.0, spec, penalty, spec.midpoint_mwh(), options));
  }
}
BENCHMARK(BM_PolicyHour)->Arg(0)->Arg(1);

void BM_Oracle(benchmark::State& state) {
  auto spec = reference_battery();
  spec.energy_mwh = 1.0;
  spec.e_max_mwh = 0.95;
  spec.e_min_mwh = 0.1;
  spec.efficiency = 0.92;
  const double M = 1.0 / 360.0;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RegulationSignal signal;
  signal.interval_h = M;
  for (int i = 0; i < state.range(0); ++i) signal.samples.push_back(u(rng));
  const auto penalty = PenaltyModel::with_price(50.0, M);
  for (auto _ : state) {
    benchmark::DoNotOptimize(offline_oracle(signal, 10.0, spec, penalty, 0.5));
  }
}
BENCHMARK(BM_Oracle)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

void BM_Calibrate(benchmark::State& state) {
  const auto corpus = synthesize_corpus(SignalKind::kOuProcess, 5, 50, 1800, SynthParams{},
                                        true, 0.95);
  std::vector<double> grid;
  for (int i = 0; i <= 30; ++i) grid.push_back(0.01 * i);
  for (auto _ : state) {
    benchmark::DoNotOptimize(calibrate_gamma_curve(corpus, 0.9, 2.0 / 3.0, grid, 0.95));
  }
}
BENCHMARK(BM_Calibrate)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
