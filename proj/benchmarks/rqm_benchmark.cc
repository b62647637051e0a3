// Copyright 2026 The RQM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <vector>

#include "benchmark/benchmark.h"
#include "rqm/accountant.h"
#include "rqm/exact_distribution.h"
#include "rqm/mechanism.h"
#include "rqm/pbm.h"
#include "rqm/simulator.h"

namespace rqm {
namespace {

void BM_RqmPmf(benchmark::State& state) {
  const RqmParams params(1.0, 1.0, static_cast<int>(state.range(0)), 0.42);
  double x = -1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(RqmPmf(x, params));
    x = x > 0.99 ? -1.0 : x + 0.01;
  }
}
BENCHMARK(BM_RqmPmf)->RangeMultiplier(2)->Range(4, 256);

void BM_RqmPmfBruteForce(benchmark::State& state) {
  const RqmParams params(1.0, 1.0, static_cast<int>(state.range(0)), 0.42);
  for (auto _ : state) benchmark::DoNotOptimize(RqmPmfBruteForce(0.3, params));
}
BENCHMARK(BM_RqmPmfBruteForce)->DenseRange(4, 16, 4);

void BM_RqmSample(benchmark::State& state) {
  const RqmParams params(1.0, 1.0, static_cast<int>(state.range(0)), 0.42);
  const QuantizationGrid grid(params);
  RngStream rng = RngStream::Derive(1, StreamPurpose::kMonteCarlo, {0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(RqmSample(0.3, params, grid, rng));
  }
}
BENCHMARK(BM_RqmSample)->Arg(4)->Arg(16)->Arg(64);

void BM_PbmSample(benchmark::State& state) {
  const PbmParams params(1.0, 0.25, static_cast<int>(state.range(0)));
  RngStream rng = RngStream::Derive(1, StreamPurpose::kMonteCarlo, {1});
  for (auto _ : state) benchmark::DoNotOptimize(PbmSample(0.3, params, rng));
}
BENCHMARK(BM_PbmSample)->Arg(4)->Arg(16)->Arg(64);

void BM_ConvolveSum(benchmark::State& state) {
  const RqmParams params(1.0, 1.0, 16, 0.42);
  const std::vector<Pmf> pmfs(static_cast<std::size_t>(state.range(0)),
                              RqmPmf(0.2, params));
  for (auto _ : state) benchmark::DoNotOptimize(ConvolveSum(pmfs));
}
BENCHMARK(BM_ConvolveSum)->RangeMultiplier(2)->Range(2, 128);

void BM_AggregateDivergence(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const NeighborPair pair = WorstCaseNeighbors(n, 1.0, DefaultSplit(n));
  const DivergenceQuery query{2.0, RqmParams(1.0, 1.0, 16, 0.42), pair.x,
                              pair.x_prime};
  for (auto _ : state) benchmark::DoNotOptimize(AggregateDivergence(query));
}
BENCHMARK(BM_AggregateDivergence)->Arg(1)->Arg(10)->Arg(40);

void BM_OrderSweep(benchmark::State& state) {
  const MechanismPair pair = PresetPair(ComparisonPreset::kStandard);
  const SweepSpec spec{.axis = SweepAxis::kOrder,
                       .values = AxisRange(2, 1000, 1),
                       .alpha = 2.0,
                       .devices = 40,
                       .rqm = pair.rqm,
                       .pbm = pair.pbm};
  for (auto _ : state) benchmark::DoNotOptimize(DivergenceSweep(spec));
}
BENCHMARK(BM_OrderSweep)->Unit(benchmark::kMillisecond);

void BM_TrainingRound(benchmark::State& state) {
  SimConfig config = SyntheticPreset();
  config.rounds = 1;
  config.mechanism = StandardMechanism("rqm", config.clip);
  for (auto _ : state) benchmark::DoNotOptimize(RunTraining(config));
}
BENCHMARK(BM_TrainingRound)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace rqm

BENCHMARK_MAIN();
