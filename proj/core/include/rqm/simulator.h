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

// Desk-scale federated DP-SGD.
//
// Each round the server samples n of N devices uniformly without
// replacement. Every sampled device computes the full-batch gradient of a
// multinomial logistic model on its own data, clamps each coordinate to
// [-c, c], and encodes each coordinate independently with the configured
// mechanism. A trusted summing node releases only the coordinate-wise sum
// of the encoded messages; the server decodes the sum to a mean gradient
// estimate and takes one gradient step.
//
// All randomness is keyed by (master_seed, purpose, ids) through
// RngStream::Derive, so results do not depend on execution order or on the
// number of worker threads.

#ifndef RQM_SIMULATOR_H_
#define RQM_SIMULATOR_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rqm/mechanism.h"
#include "rqm/pbm.h"

namespace rqm {

struct NoiseFree {
  friend bool operator==(const NoiseFree&, const NoiseFree&) = default;
};

using SimMechanism = std::variant<NoiseFree, RqmParams, PbmParams>;

std::string MechanismName(const SimMechanism& mechanism);

struct ModelSpec {
  int features = 2;
  int classes = 2;

  // Weights plus one bias per class.
  int Dimension() const { return classes * (features + 1); }
};

struct DatasetSpec {
  int samples_per_device = 50;
  // Distance of each class mean from the origin along its own axis.
  double separation = 2.0;
  // 0: every device draws labels uniformly; 1: device d holds only class
  // d mod classes.
  double heterogeneity = 0.0;
};

struct SimConfig {
  int total_devices = 100;
  int devices_per_round = 10;
  int rounds = 500;
  double learning_rate = 0.5;
  double clip = 1.0;
  SimMechanism mechanism = NoiseFree{};
  ModelSpec model;
  DatasetSpec data;
  std::uint64_t master_seed = 0;

  // Throws ValidationError on any violated invariant, including a mechanism
  // whose c differs from `clip`.
  void Validate() const;
};

struct DeviceDataset {
  // Row-major, samples x features.
  std::vector<double> features;
  std::vector<int> labels;

  int size() const { return static_cast<int>(labels.size()); }
};

struct Federation {
  ModelSpec model;
  std::vector<DeviceDataset> devices;
};

struct ModelState {
  // Row c holds the weights of class c followed by its bias.
  std::vector<double> w;
  int round = 0;
};

// One device's upload: indices for RQM/PBM, raw clipped values for the
// noise-free baseline.
struct GradientMessage {
  std::variant<std::vector<int>, std::vector<double>> payload;

  bool quantized() const { return payload.index() == 0; }
  std::size_t size() const;
};

// The only thing the server ever sees of a round's uploads.
struct AggregateSum {
  std::variant<std::vector<std::int64_t>, std::vector<double>> sum;
  int count = 0;
};

struct RoundMetrics {
  int round = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  std::int64_t bits_per_device = 0;
  // ||decoded estimate - mean clipped gradient||_2, diagnostics mode only.
  std::optional<double> decode_bias;
};

struct RunOptions {
  int threads = 1;
  // Runs sampled devices in a seeded random order each round (tests that
  // results do not depend on execution order).
  bool shuffle_execution = false;
  bool diagnostics = false;
};

struct TrainingRun {
  std::vector<RoundMetrics> metrics;
  ModelState final_model;
};

// Per-(device, round) access to the coordinate streams of the mechanism.
struct CoordinateStreams {
  std::uint64_t master_seed = 0;
  int device = 0;
  int round = 0;

  RngStream ForCoordinate(int coordinate) const;
};

Federation GenerateSyntheticFederation(const SimConfig& config);

ModelState InitialModel(const ModelSpec& model);

// Full-batch gradient of the mean cross-entropy on one device.
std::vector<double> LocalGradient(const ModelState& state,
                                  const DeviceDataset& data,
                                  const ModelSpec& model);

// Average cross-entropy and accuracy over every device's data.
struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};
Evaluation Evaluate(const ModelState& state, const Federation& federation);

GradientMessage LocalUpdate(const ModelState& state, const DeviceDataset& data,
                            const ModelSpec& model,
                            const SimMechanism& mechanism, double clip,
                            const CoordinateStreams& streams);

// Accumulates uploads into a running sum without retaining them.
class SecureAggregator {
 public:
  explicit SecureAggregator(std::size_t dimension) : dimension_(dimension) {}

  void Submit(const GradientMessage& message);
  AggregateSum Release() &&;

 private:
  std::size_t dimension_;
  std::vector<std::int64_t> int_sum_;
  std::vector<double> real_sum_;
  int count_ = 0;
  bool quantized_ = false;
};

AggregateSum SecureAggregate(std::span<const GradientMessage> messages);

// Decoded mean gradient estimate for the aggregate of `sum.count` devices.
std::vector<double> DecodeMeanGradient(const AggregateSum& sum,
                                       const SimMechanism& mechanism);

ModelState ServerStep(const ModelState& state, const AggregateSum& sum,
                      const SimMechanism& mechanism, double learning_rate);

std::int64_t BitsPerDevice(const SimMechanism& mechanism, int dimension);

// Sorted sample of `n` of `total` devices for the given round.
std::vector<int> SampleDevices(int total, int n, std::uint64_t master_seed,
                               int round);

// Median |coordinate| of the per-device gradients at the initial model, so
// roughly half of the coordinates clip at initialization.
double CalibrateClipping(const SimConfig& config);

TrainingRun RunTraining(const SimConfig& config,
                        const RunOptions& options = {});

// Standard mechanism for `name` ("noisefree", "rqm", "pbm") at clip c:
// RQM with Delta = c, m = 16, q = 0.42; PBM with theta = 0.25 and the trial
// count given by `support` for m = 16.
SimMechanism StandardMechanism(std::string_view name, double clip,
                               PbmSupport support = PbmSupport::kLevels);

// Pinned synthetic task: N = 100, n = 10, T = 500, eta = 0.5, two classes in
// two features at separation 2, seed 2026, clip from CalibrateClipping.
// Mechanism is NoiseFree.
SimConfig SyntheticPreset();

}  // namespace rqm

#endif  // RQM_SIMULATOR_H_
