// Serial reference vs OpenMP for the parallel kernels.
#include <benchmark/benchmark.h>

#include <map>

#include "tinymadrl/harness.hpp"

namespace {

using tinymadrl::Execution;
namespace game = tinymadrl::game;
namespace harness = tinymadrl::harness;

harness::SamplingRanges BenchRanges() {
  harness::SamplingRanges r;
  r.similarity = {0.8, 1.0};
  return r;
}

const game::GameInstance& Instance(int uavs) {
  static std::map<int, game::GameInstance> cache;
  auto it = cache.find(uavs);
  if (it == cache.end()) {
    it = cache.emplace(uavs, harness::SampleInstance(BenchRanges(), uavs, 8, 7)).first;
  }
  return it->second;
}

Execution Mode(const benchmark::State& state) {
  return state.range(1) ? Execution::kParallel : Execution::kSerial;
}

void BM_FollowerResponses(benchmark::State& state) {
  const auto& inst = Instance(static_cast<int>(state.range(0)));
  game::Matrix raw(inst.num_rsus(), inst.num_uavs());
  for (std::size_t j = 0; j < raw.rows(); ++j) {
    for (auto& p : raw.row(j)) p = 0.5 * (inst.cost(j) + inst.cap(j));
  }
  const game::PriceMatrix prices(inst, raw);
  for (auto _ : state) {
    benchmark::DoNotOptimize(game::AllFollowersRespond(inst, prices, Mode(state)));
  }
}

void BM_SolveEquilibrium(benchmark::State& state) {
  const auto& inst = Instance(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(game::SolveEquilibrium(inst, {}, Mode(state)));
  }
}

void BM_VerifyEquilibrium(benchmark::State& state) {
  const auto& inst = Instance(static_cast<int>(state.range(0)));
  const auto sol = game::SolveEquilibrium(inst, {}, Execution::kParallel);
  for (auto _ : state) {
    benchmark::DoNotOptimize(game::VerifyEquilibrium(inst, sol, 200, 3, 1e-6, Mode(state)));
  }
}

void BM_CostSweep(benchmark::State& state) {
  harness::ExperimentConfig cfg;
  cfg.instance.num_uavs = static_cast<int>(state.range(0));
  cfg.instance.num_rsus = 3;
  cfg.instance.ranges = BenchRanges();
  cfg.verify_probes = 100;
  for (std::uint64_t s = 1; s <= 8; ++s) cfg.seeds.push_back(s);
  harness::SweepSpec spec;
  for (auto _ : state) {
    benchmark::DoNotOptimize(harness::RunSweep(cfg, spec, Mode(state)));
  }
}

}  // namespace

BENCHMARK(BM_FollowerResponses)->ArgsProduct({{256, 4096}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SolveEquilibrium)->ArgsProduct({{256, 4096}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VerifyEquilibrium)->ArgsProduct({{64, 512}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CostSweep)->ArgsProduct({{15}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
