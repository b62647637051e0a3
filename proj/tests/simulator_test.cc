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

#include "rqm/simulator.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "frozen_model.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "rqm/errors.h"

namespace rqm {
namespace {

using ::testing::ElementsAre;

SimConfig SmallConfig() {
  SimConfig config;
  config.total_devices = 10;
  config.devices_per_round = 4;
  config.rounds = 20;
  config.clip = 0.5;
  config.master_seed = 7;
  return config;
}

SimConfig WithMechanism(SimConfig config, std::string_view name) {
  config.mechanism = StandardMechanism(name, config.clip);
  return config;
}

TEST(SimConfigTest, Validation) {
  SimConfig ok = SmallConfig();
  EXPECT_NO_THROW(ok.Validate());
  auto broken = [&](auto mutate) {
    SimConfig c = ok;
    mutate(c);
    return c;
  };
  EXPECT_THROW(broken([](SimConfig& c) { c.rounds = 0; }).Validate(),
               ValidationError);
  EXPECT_THROW(broken([](SimConfig& c) { c.devices_per_round = 11; }).Validate(),
               ValidationError);
  EXPECT_THROW(broken([](SimConfig& c) { c.devices_per_round = 0; }).Validate(),
               ValidationError);
  EXPECT_THROW(broken([](SimConfig& c) { c.learning_rate = 0.0; }).Validate(),
               ValidationError);
  EXPECT_THROW(broken([](SimConfig& c) { c.clip = -1.0; }).Validate(),
               ValidationError);
  EXPECT_THROW(broken([](SimConfig& c) { c.model.features = 1; }).Validate(),
               ValidationError);
  EXPECT_THROW(broken([](SimConfig& c) {
                 c.mechanism = RqmParams(0.7, 0.7, 16, 0.42);
               }).Validate(),
               ValidationError);
}

TEST(StandardMechanismTest, Names) {
  EXPECT_EQ(MechanismName(StandardMechanism("noisefree", 1.0)), "noisefree");
  EXPECT_EQ(std::get<RqmParams>(StandardMechanism("rqm", 0.3)),
            RqmParams(0.3, 0.3, 16, 0.42));
  EXPECT_EQ(std::get<PbmParams>(StandardMechanism("pbm", 0.3)).trials(), 16);
  EXPECT_EQ(std::get<PbmParams>(
                StandardMechanism("pbm", 0.3, PbmSupport::kMatched))
                .trials(),
            15);
  EXPECT_THROW(StandardMechanism("gaussian", 1.0), ValidationError);
}

TEST(SyntheticFederationTest, CountsAsSpecified) {
  SimConfig config = SmallConfig();
  config.total_devices = 10;
  config.data.samples_per_device = 50;
  const Federation fed = GenerateSyntheticFederation(config);
  ASSERT_EQ(fed.devices.size(), 10u);
  for (const DeviceDataset& ds : fed.devices) {
    EXPECT_EQ(ds.size(), 50);
    EXPECT_EQ(ds.features.size(), 100u);
    for (int label : ds.labels) EXPECT_TRUE(label == 0 || label == 1);
  }
}

TEST(SyntheticFederationTest, SameSeedIsByteIdentical) {
  const SimConfig config = SmallConfig();
  const Federation a = GenerateSyntheticFederation(config);
  const Federation b = GenerateSyntheticFederation(config);
  for (std::size_t d = 0; d < a.devices.size(); ++d) {
    EXPECT_EQ(a.devices[d].labels, b.devices[d].labels);
    ASSERT_EQ(a.devices[d].features.size(), b.devices[d].features.size());
    EXPECT_EQ(std::memcmp(a.devices[d].features.data(),
                          b.devices[d].features.data(),
                          a.devices[d].features.size() * sizeof(double)),
              0);
  }
  SimConfig other = config;
  other.master_seed = 8;
  EXPECT_NE(GenerateSyntheticFederation(other).devices[0].features,
            a.devices[0].features);
}

TEST(SyntheticFederationTest, FullHeterogeneitySplitsClasses) {
  SimConfig config = SmallConfig();
  config.data.heterogeneity = 1.0;
  const Federation fed = GenerateSyntheticFederation(config);
  for (std::size_t d = 0; d < fed.devices.size(); ++d) {
    for (int label : fed.devices[d].labels) {
      EXPECT_EQ(label, static_cast<int>(d % 2));
    }
  }
}

TEST(SyntheticFederationTest, LargeSeparationIsLinearlySeparable) {
  SimConfig config = SmallConfig();
  config.data.separation = 50.0;
  config.rounds = 100;
  config.clip = 1.0;
  const TrainingRun run = RunTraining(config);
  EXPECT_EQ(run.metrics.back().accuracy, 1.0);
}

TEST(LocalGradientTest, MatchesFiniteDifferences) {
  SimConfig config = SmallConfig();
  config.model = ModelSpec{3, 3};
  const Federation fed = GenerateSyntheticFederation(config);
  ModelState state = InitialModel(config.model);
  for (std::size_t j = 0; j < state.w.size(); ++j) {
    state.w[j] = 0.1 * static_cast<double>(j % 5) - 0.2;
  }
  const DeviceDataset& data = fed.devices[3];
  Federation single{config.model, {data}};
  const std::vector<double> grad = LocalGradient(state, data, config.model);
  const double h = 1e-6;
  for (std::size_t j = 0; j < state.w.size(); ++j) {
    ModelState up = state;
    ModelState down = state;
    up.w[j] += h;
    down.w[j] -= h;
    const double numeric =
        (Evaluate(up, single).loss - Evaluate(down, single).loss) / (2 * h);
    EXPECT_NEAR(grad[j], numeric, 1e-7) << "j=" << j;
  }
}

TEST(LocalUpdateTest, NoiseFreeMessageIsClippedGradient) {
  const SimConfig config = SmallConfig();
  const Federation fed = GenerateSyntheticFederation(config);
  ModelState state = InitialModel(config.model);
  state.w = {1.0, -2.0, 0.5, -1.0, 2.0, -0.5};
  const GradientMessage msg = LocalUpdate(state, fed.devices[0], config.model,
                                          NoiseFree{}, 0.2, {7, 0, 0});
  ASSERT_FALSE(msg.quantized());
  EXPECT_EQ(std::get<std::vector<double>>(msg.payload),
            ClipCoordinatewise(
                LocalGradient(state, fed.devices[0], config.model), 0.2));
}

TEST(LocalUpdateTest, QuantizedMessagesStayInSupport) {
  const SimConfig config = SmallConfig();
  const Federation fed = GenerateSyntheticFederation(config);
  const ModelState state = InitialModel(config.model);
  for (const char* name : {"rqm", "pbm"}) {
    const SimMechanism mech = StandardMechanism(name, config.clip);
    const int top = name == std::string("rqm") ? 15 : 16;
    for (int t = 0; t < 50; ++t) {
      const GradientMessage msg =
          LocalUpdate(state, fed.devices[static_cast<std::size_t>(t % 10)],
                      config.model, mech, config.clip, {7, t % 10, t});
      ASSERT_TRUE(msg.quantized());
      ASSERT_EQ(msg.size(), 6u);
      for (int z : std::get<std::vector<int>>(msg.payload)) {
        EXPECT_GE(z, 0);
        EXPECT_LE(z, top);
      }
    }
  }
}

TEST(LocalUpdateTest, ZeroGradientDecodesToZeroOnAverage) {
  const RqmParams params(0.5, 0.5, 16, 0.42);
  const QuantizationGrid grid(params);
  RngStream rng = RngStream::Derive(3, StreamPurpose::kMonteCarlo, {0});
  const int draws = 200000;
  double sum = 0.0;
  double sq = 0.0;
  for (int t = 0; t < draws; ++t) {
    const double v = DecodeLevel(RqmSample(0.0, params, grid, rng), params);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sq / draws - mean * mean) / draws);
  EXPECT_LT(std::abs(mean), 3.0 * se);
}

TEST(LocalUpdateTest, NonFiniteGradientAbortsWithIds) {
  SimConfig config = SmallConfig();
  Federation fed = GenerateSyntheticFederation(config);
  fed.devices[2].features[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    LocalUpdate(InitialModel(config.model), fed.devices[2], config.model,
                NoiseFree{}, 1.0, {7, 2, 9});
    FAIL() << "expected SimulationError";
  } catch (const SimulationError& e) {
    EXPECT_EQ(e.round(), 9);
    EXPECT_EQ(e.device(), 2);
  }
}

GradientMessage Ints(std::vector<int> v) { return GradientMessage{std::move(v)}; }

TEST(SecureAggregateTest, Sums) {
  const std::vector<GradientMessage> one = {Ints({3, 0, 15})};
  const AggregateSum single = SecureAggregate(one);
  EXPECT_EQ(single.count, 1);
  EXPECT_THAT(std::get<std::vector<std::int64_t>>(single.sum),
              ElementsAre(3, 0, 15));

  const std::vector<GradientMessage> zeros(4, Ints({0, 0}));
  EXPECT_THAT(std::get<std::vector<std::int64_t>>(SecureAggregate(zeros).sum),
              ElementsAre(0, 0));

  const std::vector<GradientMessage> tops(5, Ints({15, 15}));
  EXPECT_THAT(std::get<std::vector<std::int64_t>>(SecureAggregate(tops).sum),
              ElementsAre(75, 75));
}

TEST(SecureAggregateTest, Errors) {
  EXPECT_THROW(SecureAggregate(std::vector<GradientMessage>{}),
               ValidationError);
  const std::vector<GradientMessage> mismatch = {Ints({1, 2}), Ints({1})};
  EXPECT_THROW(SecureAggregate(mismatch), ValidationError);
  const std::vector<GradientMessage> mixed = {
      Ints({1, 2}), GradientMessage{std::vector<double>{0.1, 0.2}}};
  EXPECT_THROW(SecureAggregate(mixed), ValidationError);
  EXPECT_THROW(SecureAggregator(2).Release(), ValidationError);
}

TEST(ServerStepTest, MidpointLeavesModelUnchanged) {
  const RqmParams rqm(1.0, 1.0, 16, 0.42);
  const ModelState state{{0.3, -0.2, 1.0}, 4};
  // Level 7.5 is the symmetric midpoint; 2 devices at 7 and 8 sum to 15.
  const AggregateSum sum{std::vector<std::int64_t>{15, 15, 15}, 2};
  const ModelState next = ServerStep(state, sum, rqm, 0.5);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(next.w[j], state.w[j], 1e-15);
  EXPECT_EQ(next.round, 5);

  const PbmParams pbm(1.0, 0.25, 16);
  const AggregateSum pbm_sum{std::vector<std::int64_t>{24, 24, 24}, 3};
  EXPECT_EQ(ServerStep(state, pbm_sum, pbm, 0.5).w, state.w);
}

TEST(ServerStepTest, ZeroLearningRateAndNoiseFree) {
  const ModelState state{{0.3, -0.2}, 0};
  const AggregateSum sum{std::vector<std::int64_t>{0, 30}, 2};
  EXPECT_EQ(ServerStep(state, sum, RqmParams(1.0, 1.0, 16, 0.42), 0.0).w,
            state.w);

  const AggregateSum real{std::vector<double>{0.4, -1.0}, 2};
  const ModelState next = ServerStep(state, real, NoiseFree{}, 0.5);
  EXPECT_THAT(next.w, ElementsAre(0.3 - 0.5 * 0.2, -0.2 + 0.5 * 0.5));
}

TEST(ServerStepTest, EncodingMismatchRejected) {
  const ModelState state{{0.0, 0.0}, 0};
  const AggregateSum ints{std::vector<std::int64_t>{1, 1}, 1};
  const AggregateSum reals{std::vector<double>{1.0, 1.0}, 1};
  EXPECT_THROW(ServerStep(state, ints, NoiseFree{}, 0.1), ValidationError);
  EXPECT_THROW(ServerStep(state, reals, RqmParams(1.0, 1.0, 4, 0.5), 0.1),
               ValidationError);
  const AggregateSum short_sum{std::vector<double>{1.0}, 1};
  EXPECT_THROW(ServerStep(state, short_sum, NoiseFree{}, 0.1), ValidationError);
}

TEST(BitsPerDeviceTest, Formula) {
  const auto ceil_log2 = [](int m) {
    return static_cast<std::int64_t>(std::ceil(std::log2(m)));
  };
  for (int m : {2, 3, 4, 5, 16, 17, 100, 1024}) {
    EXPECT_EQ(BitsPerDevice(RqmParams(1.0, 1.0, m, 0.5), 6), 6 * ceil_log2(m))
        << "m=" << m;
  }
  EXPECT_EQ(BitsPerDevice(PbmParams(1.0, 0.25, 16), 6), 6 * 5);
  EXPECT_EQ(BitsPerDevice(PbmParams(1.0, 0.25, 15), 6), 6 * 4);
  EXPECT_EQ(BitsPerDevice(NoiseFree{}, 6), 6 * 64);
}

TEST(SampleDevicesTest, SortedDistinctAndDeterministic) {
  for (int t = 0; t < 50; ++t) {
    const std::vector<int> s = SampleDevices(100, 10, 5, t);
    ASSERT_EQ(s.size(), 10u);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
    EXPECT_GE(s.front(), 0);
    EXPECT_LT(s.back(), 100);
    EXPECT_EQ(s, SampleDevices(100, 10, 5, t));
  }
  std::vector<int> all(7);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(SampleDevices(7, 7, 1, 3), all);
  EXPECT_THROW(SampleDevices(5, 6, 1, 0), ValidationError);
}

TEST(SampleDevicesTest, UniformInclusion) {
  std::vector<int> hits(20, 0);
  const int rounds = 20000;
  for (int t = 0; t < rounds; ++t) {
    for (int d : SampleDevices(20, 5, 9, t)) ++hits[static_cast<std::size_t>(d)];
  }
  const double p = 0.25;
  for (int h : hits) {
    EXPECT_NEAR(static_cast<double>(h) / rounds, p,
                4.0 * std::sqrt(p * (1 - p) / rounds));
  }
}

TEST(CalibrateClippingTest, RoughlyHalfTheCoordinatesClip) {
  SimConfig config = SmallConfig();
  const double c = CalibrateClipping(config);
  const Federation fed = GenerateSyntheticFederation(config);
  const ModelState w0 = InitialModel(config.model);
  int above = 0;
  int total = 0;
  for (const DeviceDataset& ds : fed.devices) {
    for (double g : LocalGradient(w0, ds, config.model)) {
      above += std::abs(g) > c;
      ++total;
    }
  }
  EXPECT_NEAR(static_cast<double>(above) / total, 0.5, 0.05);
}

TEST(RunTrainingTest, DeterministicReruns) {
  for (const char* name : {"noisefree", "rqm", "pbm"}) {
    const SimConfig config = WithMechanism(SmallConfig(), name);
    const TrainingRun a = RunTraining(config);
    const TrainingRun b = RunTraining(config);
    ASSERT_EQ(a.metrics.size(), 20u);
    EXPECT_EQ(a.final_model.w, b.final_model.w) << name;
    for (std::size_t t = 0; t < a.metrics.size(); ++t) {
      EXPECT_EQ(a.metrics[t].loss, b.metrics[t].loss);
      EXPECT_EQ(a.metrics[t].accuracy, b.metrics[t].accuracy);
    }
  }
}

TEST(RunTrainingTest, ExecutionOrderAndThreadsDoNotMatter) {
  for (const char* name : {"noisefree", "rqm", "pbm"}) {
    const SimConfig config = WithMechanism(SmallConfig(), name);
    const TrainingRun base = RunTraining(config);
    const TrainingRun shuffled =
        RunTraining(config, {.threads = 1, .shuffle_execution = true});
    const TrainingRun threaded =
        RunTraining(config, {.threads = 3, .shuffle_execution = true});
    EXPECT_EQ(shuffled.final_model.w, base.final_model.w) << name;
    EXPECT_EQ(threaded.final_model.w, base.final_model.w) << name;
  }
}

TEST(RunTrainingTest, MetricsShape) {
  const SimConfig config = WithMechanism(SmallConfig(), "rqm");
  const TrainingRun run = RunTraining(config, {.diagnostics = true});
  ASSERT_EQ(run.metrics.size(), 20u);
  EXPECT_EQ(run.final_model.round, 20);
  for (std::size_t t = 0; t < run.metrics.size(); ++t) {
    const RoundMetrics& m = run.metrics[t];
    EXPECT_EQ(m.round, static_cast<int>(t));
    EXPECT_TRUE(std::isfinite(m.loss));
    EXPECT_GE(m.accuracy, 0.0);
    EXPECT_LE(m.accuracy, 1.0);
    EXPECT_EQ(m.bits_per_device, 6 * 4);
    ASSERT_TRUE(m.decode_bias.has_value());
    EXPECT_GE(*m.decode_bias, 0.0);
  }
  EXPECT_FALSE(RunTraining(config).metrics[0].decode_bias.has_value());
}

TEST(RunTrainingTest, NoiseFreeDiagnosticBiasIsZero) {
  const SimConfig config = SmallConfig();
  for (const RoundMetrics& m :
       RunTraining(config, {.diagnostics = true}).metrics) {
    EXPECT_NEAR(*m.decode_bias, 0.0, 1e-15);
  }
}

TEST(RunTrainingTest, NoiseFreeSeparableReachesLowLoss) {
  SimConfig config = SyntheticPreset();
  config.rounds = 200;
  config.data.separation = 4.0;
  config.clip = CalibrateClipping(config);
  const TrainingRun run = RunTraining(config);
  EXPECT_LT(run.metrics.back().loss, 0.1);
  // Trend: each 40-round window averages below the previous one.
  double prev = std::numeric_limits<double>::infinity();
  for (int w = 0; w < 5; ++w) {
    double avg = 0.0;
    for (int t = 40 * w; t < 40 * (w + 1); ++t) {
      avg += run.metrics[static_cast<std::size_t>(t)].loss / 40;
    }
    EXPECT_LT(avg, prev);
    prev = avg;
  }
}

TEST(RunTrainingTest, PresetPrivacyCostsLoss) {
  const SimConfig preset = SyntheticPreset();
  const double noise_free = RunTraining(preset).metrics.back().loss;
  const double rqm =
      RunTraining(WithMechanism(preset, "rqm")).metrics.back().loss;
  EXPECT_LE(noise_free, rqm);
}

class FrozenModelTest : public ::testing::TestWithParam<const char*> {};

TEST_P(FrozenModelTest, DecodedGradientIsUnbiased) {
  SimConfig config = WithMechanism(SyntheticPreset(), GetParam());
  // Freeze part-way through training so some coordinates clip and some do
  // not.
  SimConfig warmup = SyntheticPreset();
  warmup.rounds = 5;
  const ModelState state = RunTraining(warmup).final_model;
  const testing::DecodeErrorStats stats =
      testing::FrozenModelDecodeError(config, state, 10000);
  for (std::size_t j = 0; j < stats.mean.size(); ++j) {
    EXPECT_GT(stats.standard_error[j], 0.0);
    EXPECT_LT(std::abs(stats.mean[j]), 3.0 * stats.standard_error[j])
        << "coordinate " << j;
  }
}

INSTANTIATE_TEST_SUITE_P(Mechanisms, FrozenModelTest,
                         ::testing::Values("rqm", "pbm"));

}  // namespace
}  // namespace rqm
