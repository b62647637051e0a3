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
#include <bit>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "rqm/errors.h"

namespace rqm {
namespace {

std::size_t Idx(int i) { return static_cast<std::size_t>(i); }

// Class scores for one sample; returns log-softmax in `out`.
void LogSoftmax(const ModelState& state, const ModelSpec& model,
                const double* x, std::vector<double>& out) {
  const int stride = model.features + 1;
  out.resize(Idx(model.classes));
  double top = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < model.classes; ++k) {
    const double* row = state.w.data() + Idx(k * stride);
    double s = row[model.features];
    for (int f = 0; f < model.features; ++f) s += row[f] * x[f];
    out[Idx(k)] = s;
    top = std::max(top, s);
  }
  double norm = 0.0;
  for (double s : out) norm += std::exp(s - top);
  const double log_norm = top + std::log(norm);
  for (double& s : out) s -= log_norm;
}

bool AllFinite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double e) { return std::isfinite(e); });
}

double MechanismClipOf(const SimMechanism& mechanism, double fallback) {
  if (const auto* r = std::get_if<RqmParams>(&mechanism)) return r->c();
  if (const auto* p = std::get_if<PbmParams>(&mechanism)) return p->c();
  return fallback;
}

}  // namespace

std::string MechanismName(const SimMechanism& mechanism) {
  switch (mechanism.index()) {
    case 0:
      return "noisefree";
    case 1:
      return "rqm";
    default:
      return "pbm";
  }
}

void SimConfig::Validate() const {
  if (total_devices < 1) throw ValidationError("simulate: N must be >= 1");
  if (devices_per_round < 1 || devices_per_round > total_devices) {
    throw ValidationError("simulate: requires 1 <= n <= N");
  }
  if (rounds < 1) throw ValidationError("simulate: rounds must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("simulate: learning rate must be > 0");
  }
  if (!(clip > 0.0) || !std::isfinite(clip)) {
    throw ValidationError("simulate: clipping bound c must be > 0");
  }
  if (model.classes < 2) throw ValidationError("simulate: need >= 2 classes");
  if (model.features < model.classes) {
    throw ValidationError(
        "simulate: class means sit on coordinate axes, so features >= "
        "classes is required");
  }
  if (data.samples_per_device < 1) {
    throw ValidationError("simulate: samples per device must be >= 1");
  }
  if (!(data.separation >= 0.0) || !std::isfinite(data.separation)) {
    throw ValidationError("simulate: separation must be finite and >= 0");
  }
  if (!(data.heterogeneity >= 0.0 && data.heterogeneity <= 1.0)) {
    throw ValidationError("simulate: heterogeneity must lie in [0, 1]");
  }
  if (MechanismClipOf(mechanism, clip) != clip) {
    throw ValidationError(
        "simulate: mechanism c must equal the clipping bound");
  }
}

std::size_t GradientMessage::size() const {
  return std::visit([](const auto& v) { return v.size(); }, payload);
}

RngStream CoordinateStreams::ForCoordinate(int coordinate) const {
  return RngStream::Derive(master_seed, StreamPurpose::kMechanism,
                           {static_cast<std::uint64_t>(device),
                            static_cast<std::uint64_t>(round),
                            static_cast<std::uint64_t>(coordinate)});
}

Federation GenerateSyntheticFederation(const SimConfig& config) {
  config.Validate();
  const ModelSpec& model = config.model;
  const DatasetSpec& data = config.data;
  Federation fed;
  fed.model = model;
  fed.devices.resize(Idx(config.total_devices));
  std::vector<double> proportions(Idx(model.classes));
  for (int d = 0; d < config.total_devices; ++d) {
    RngStream rng = RngStream::Derive(config.master_seed,
                                      StreamPurpose::kDataGeneration,
                                      {static_cast<std::uint64_t>(d)});
    const int favored = d % model.classes;
    for (int k = 0; k < model.classes; ++k) {
      proportions[Idx(k)] = (1.0 - data.heterogeneity) / model.classes +
                            (k == favored ? data.heterogeneity : 0.0);
    }
    DeviceDataset& ds = fed.devices[Idx(d)];
    ds.labels.resize(Idx(data.samples_per_device));
    ds.features.resize(Idx(data.samples_per_device * model.features));
    for (int s = 0; s < data.samples_per_device; ++s) {
      const double u = rng.Uniform();
      int label = model.classes - 1;
      double cumulative = 0.0;
      for (int k = 0; k < model.classes; ++k) {
        cumulative += proportions[Idx(k)];
        if (u < cumulative) {
          label = k;
          break;
        }
      }
      ds.labels[Idx(s)] = label;
      double* x = ds.features.data() + Idx(s * model.features);
      for (int f = 0; f < model.features; ++f) {
        x[f] = rng.Normal() + (f == label ? data.separation : 0.0);
      }
    }
  }
  return fed;
}

ModelState InitialModel(const ModelSpec& model) {
  return ModelState{std::vector<double>(Idx(model.Dimension()), 0.0), 0};
}

std::vector<double> LocalGradient(const ModelState& state,
                                  const DeviceDataset& data,
                                  const ModelSpec& model) {
  const int stride = model.features + 1;
  std::vector<double> grad(Idx(model.Dimension()), 0.0);
  std::vector<double> log_probs;
  for (int s = 0; s < data.size(); ++s) {
    const double* x = data.features.data() + Idx(s * model.features);
    LogSoftmax(state, model, x, log_probs);
    for (int k = 0; k < model.classes; ++k) {
      const double residual =
          std::exp(log_probs[Idx(k)]) - (data.labels[Idx(s)] == k ? 1.0 : 0.0);
      double* row = grad.data() + Idx(k * stride);
      for (int f = 0; f < model.features; ++f) row[f] += residual * x[f];
      row[model.features] += residual;
    }
  }
  if (data.size() > 0) {
    for (double& g : grad) g /= data.size();
  }
  return grad;
}

Evaluation Evaluate(const ModelState& state, const Federation& federation) {
  const ModelSpec& model = federation.model;
  std::vector<double> log_probs;
  double loss = 0.0;
  std::int64_t correct = 0;
  std::int64_t total = 0;
  for (const DeviceDataset& ds : federation.devices) {
    for (int s = 0; s < ds.size(); ++s) {
      LogSoftmax(state, model, ds.features.data() + Idx(s * model.features),
                 log_probs);
      const int label = ds.labels[Idx(s)];
      loss -= log_probs[Idx(label)];
      const auto best = std::max_element(log_probs.begin(), log_probs.end());
      correct += (best - log_probs.begin()) == label;
      ++total;
    }
  }
  if (total == 0) return {};
  return {loss / static_cast<double>(total),
          static_cast<double>(correct) / static_cast<double>(total)};
}

GradientMessage LocalUpdate(const ModelState& state, const DeviceDataset& data,
                            const ModelSpec& model,
                            const SimMechanism& mechanism, double clip,
                            const CoordinateStreams& streams) {
  const std::vector<double> grad = LocalGradient(state, data, model);
  if (!AllFinite(grad)) {
    throw SimulationError("non-finite local gradient", streams.round,
                          streams.device);
  }
  std::vector<double> clipped = ClipCoordinatewise(grad, clip);
  if (std::holds_alternative<NoiseFree>(mechanism)) {
    return GradientMessage{std::move(clipped)};
  }
  std::vector<int> z(clipped.size());
  if (const auto* rqm = std::get_if<RqmParams>(&mechanism)) {
    const QuantizationGrid grid(*rqm);
    for (std::size_t j = 0; j < clipped.size(); ++j) {
      RngStream rng = streams.ForCoordinate(static_cast<int>(j));
      z[j] = RqmSample(clipped[j], *rqm, grid, rng);
    }
  } else {
    const auto& pbm = std::get<PbmParams>(mechanism);
    for (std::size_t j = 0; j < clipped.size(); ++j) {
      RngStream rng = streams.ForCoordinate(static_cast<int>(j));
      z[j] = PbmSample(clipped[j], pbm, rng);
    }
  }
  return GradientMessage{std::move(z)};
}

void SecureAggregator::Submit(const GradientMessage& message) {
  if (message.size() != dimension_) {
    throw ValidationError("SecureAggregate: message length mismatch");
  }
  if (count_ == 0) {
    quantized_ = message.quantized();
    if (quantized_) {
      int_sum_.assign(dimension_, 0);
    } else {
      real_sum_.assign(dimension_, 0.0);
    }
  } else if (message.quantized() != quantized_) {
    throw ValidationError("SecureAggregate: mixed message encodings");
  }
  if (quantized_) {
    const auto& z = std::get<std::vector<int>>(message.payload);
    for (std::size_t j = 0; j < dimension_; ++j) int_sum_[j] += z[j];
  } else {
    const auto& v = std::get<std::vector<double>>(message.payload);
    for (std::size_t j = 0; j < dimension_; ++j) real_sum_[j] += v[j];
  }
  ++count_;
}

AggregateSum SecureAggregator::Release() && {
  if (count_ == 0) throw ValidationError("SecureAggregate: no messages");
  AggregateSum out;
  out.count = count_;
  if (quantized_) {
    out.sum = std::move(int_sum_);
  } else {
    out.sum = std::move(real_sum_);
  }
  return out;
}

AggregateSum SecureAggregate(std::span<const GradientMessage> messages) {
  if (messages.empty()) throw ValidationError("SecureAggregate: no messages");
  SecureAggregator aggregator(messages.front().size());
  for (const GradientMessage& m : messages) aggregator.Submit(m);
  return std::move(aggregator).Release();
}

std::vector<double> DecodeMeanGradient(const AggregateSum& sum,
                                       const SimMechanism& mechanism) {
  const int n = sum.count;
  if (n < 1) throw ValidationError("decode: aggregate of zero devices");
  if (std::holds_alternative<NoiseFree>(mechanism)) {
    const auto* real = std::get_if<std::vector<double>>(&sum.sum);
    if (real == nullptr) {
      throw ValidationError("decode: noise-free run received indices");
    }
    std::vector<double> g(*real);
    for (double& e : g) e /= n;
    return g;
  }
  const auto* ints = std::get_if<std::vector<std::int64_t>>(&sum.sum);
  if (ints == nullptr) {
    throw ValidationError("decode: quantized run received raw values");
  }
  std::vector<double> g(ints->size());
  if (const auto* rqm = std::get_if<RqmParams>(&mechanism)) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      g[j] = DecodeAggregate((*ints)[j], n, *rqm);
    }
  } else {
    const auto& pbm = std::get<PbmParams>(mechanism);
    for (std::size_t j = 0; j < g.size(); ++j) {
      g[j] = PbmDecodeAggregate((*ints)[j], n, pbm);
    }
  }
  return g;
}

ModelState ServerStep(const ModelState& state, const AggregateSum& sum,
                      const SimMechanism& mechanism, double learning_rate) {
  const std::vector<double> g = DecodeMeanGradient(sum, mechanism);
  if (g.size() != state.w.size()) {
    throw ValidationError("ServerStep: aggregate dimension mismatch");
  }
  ModelState next{state.w, state.round + 1};
  for (std::size_t j = 0; j < g.size(); ++j) next.w[j] -= learning_rate * g[j];
  if (!AllFinite(next.w)) {
    throw SimulationError("non-finite model after server step", state.round,
                          -1);
  }
  return next;
}

std::int64_t BitsPerDevice(const SimMechanism& mechanism, int dimension) {
  std::int64_t per_coordinate = 64;
  if (const auto* r = std::get_if<RqmParams>(&mechanism)) {
    per_coordinate =
        std::bit_width(static_cast<unsigned>(r->levels() - 1));  // ceil(log2 m)
  } else if (const auto* p = std::get_if<PbmParams>(&mechanism)) {
    per_coordinate = std::bit_width(static_cast<unsigned>(p->trials()));
  }
  return per_coordinate * dimension;
}

std::vector<int> SampleDevices(int total, int n, std::uint64_t master_seed,
                               int round) {
  if (n < 1 || n > total) {
    throw ValidationError("SampleDevices: requires 1 <= n <= total");
  }
  RngStream rng = RngStream::Derive(master_seed, StreamPurpose::kDeviceSampling,
                                    {static_cast<std::uint64_t>(round)});
  std::vector<int> ids(Idx(total));
  std::iota(ids.begin(), ids.end(), 0);
  // Partial Fisher-Yates: the first n slots become the sample.
  for (int i = 0; i < n; ++i) {
    const auto pick = static_cast<int>(
        rng.UniformIndex(static_cast<std::uint64_t>(total - i)));
    std::swap(ids[Idx(i)], ids[Idx(i + pick)]);
  }
  ids.resize(Idx(n));
  std::sort(ids.begin(), ids.end());
  return ids;
}

double CalibrateClipping(const SimConfig& config) {
  SimConfig probe = config;
  probe.mechanism = NoiseFree{};
  const Federation fed = GenerateSyntheticFederation(probe);
  const ModelState w0 = InitialModel(config.model);
  std::vector<double> magnitudes;
  for (const DeviceDataset& ds : fed.devices) {
    for (double g : LocalGradient(w0, ds, config.model)) {
      magnitudes.push_back(std::abs(g));
    }
  }
  const auto mid = magnitudes.begin() + static_cast<long>(magnitudes.size() / 2);
  std::nth_element(magnitudes.begin(), mid, magnitudes.end());
  return *mid;
}

TrainingRun RunTraining(const SimConfig& config, const RunOptions& options) {
  config.Validate();
  const Federation fed = GenerateSyntheticFederation(config);
  const ModelSpec& model = config.model;
  const int dimension = model.Dimension();
  const std::int64_t bits = BitsPerDevice(config.mechanism, dimension);

  TrainingRun run;
  run.final_model = InitialModel(model);
  run.metrics.reserve(Idx(config.rounds));

  for (int t = 0; t < config.rounds; ++t) {
    const ModelState& state = run.final_model;
    const std::vector<int> sampled = SampleDevices(
        config.total_devices, config.devices_per_round, config.master_seed, t);
    const std::size_t n = sampled.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (options.shuffle_execution) {
      RngStream rng = RngStream::Derive(config.master_seed,
                                        StreamPurpose::kExecutionOrder,
                                        {static_cast<std::uint64_t>(t)});
      std::shuffle(order.begin(), order.end(), rng);
    }

    // Slots are indexed by position in the sorted sample, so the aggregation
    // order is fixed regardless of which device finishes first.
    std::vector<GradientMessage> messages(n);
    auto run_slot = [&](std::size_t slot) {
      const int device = sampled[slot];
      messages[slot] = LocalUpdate(
          state, fed.devices[Idx(device)], model, config.mechanism,
          config.clip, CoordinateStreams{config.master_seed, device, t});
    };
    const int threads =
        std::clamp(options.threads, 1, static_cast<int>(n));
    if (threads == 1) {
      for (std::size_t slot : order) run_slot(slot);
    } else {
      std::vector<std::exception_ptr> errors(Idx(threads));
      {
        std::vector<std::jthread> workers;
        for (int w = 0; w < threads; ++w) {
          workers.emplace_back([&, w] {
            try {
              for (std::size_t i = Idx(w); i < n; i += Idx(threads)) {
                run_slot(order[i]);
              }
            } catch (...) {
              errors[Idx(w)] = std::current_exception();
            }
          });
        }
      }
      for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    std::optional<double> bias;
    if (options.diagnostics) {
      std::vector<double> mean_clipped(Idx(dimension), 0.0);
      for (int device : sampled) {
        const auto clipped = ClipCoordinatewise(
            LocalGradient(state, fed.devices[Idx(device)], model), config.clip);
        for (int j = 0; j < dimension; ++j) {
          mean_clipped[Idx(j)] += clipped[Idx(j)] / static_cast<double>(n);
        }
      }
      const AggregateSum sum = SecureAggregate(messages);
      const auto decoded = DecodeMeanGradient(sum, config.mechanism);
      double sq = 0.0;
      for (int j = 0; j < dimension; ++j) {
        const double d = decoded[Idx(j)] - mean_clipped[Idx(j)];
        sq += d * d;
      }
      bias = std::sqrt(sq);
    }

    SecureAggregator aggregator(Idx(dimension));
    for (const GradientMessage& m : messages) aggregator.Submit(m);
    messages.clear();
    const AggregateSum sum = std::move(aggregator).Release();
    run.final_model =
        ServerStep(run.final_model, sum, config.mechanism, config.learning_rate);

    const Evaluation eval = Evaluate(run.final_model, fed);
    if (!std::isfinite(eval.loss)) {
      throw SimulationError("non-finite training loss", t, -1);
    }
    run.metrics.push_back(RoundMetrics{t, eval.loss, eval.accuracy, bits, bias});
  }
  return run;
}

SimMechanism StandardMechanism(std::string_view name, double clip,
                               PbmSupport support) {
  constexpr int kLevels = 16;
  if (name == "noisefree") return NoiseFree{};
  if (name == "rqm") return RqmParams(clip, clip, kLevels, 0.42);
  if (name == "pbm") {
    return PbmParams(clip, 0.25, PbmTrialsFor(kLevels, support));
  }
  throw ValidationError("unknown mechanism '" + std::string(name) +
                        "' (expected noisefree, rqm or pbm)");
}

SimConfig SyntheticPreset() {
  SimConfig config;
  config.total_devices = 100;
  config.devices_per_round = 10;
  config.rounds = 500;
  config.learning_rate = 0.5;
  config.model = ModelSpec{2, 2};
  config.data = DatasetSpec{50, 2.0, 0.0};
  config.master_seed = 2026;
  config.clip = CalibrateClipping(config);
  return config;
}

}  // namespace rqm
