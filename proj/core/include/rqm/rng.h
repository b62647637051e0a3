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

// Deterministic counter-based random streams.
//
// Key derivation rule (stable across releases; other implementations that
// follow it reproduce identical traces):
//
//   Mix64(z)   = SplitMix64 finalizer:
//                  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//                  z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//                  return z ^ (z >> 31)
//   kGamma     = 0x9E3779B97F4A7C15
//
//   key_0      = Mix64(master_seed + kGamma)
//   key_{i+1}  = Mix64(key_i ^ Mix64(component_i + kGamma))
//
// where the components are, in order, the purpose tag followed by the
// identifiers of the stream (e.g. device, round, coordinate). The k-th
// 64-bit output of the stream (k = 0, 1, ...) is Mix64(key + (k + 1) *
// kGamma), i.e. SplitMix64 seeded with the key.
//
// Variates:
//   Uniform()       = (next >> 11) * 2^-53, in [0, 1)
//   Bernoulli(p)    = Uniform() < p            (one output consumed)
//   UniformIndex(b) = rejection sampling on the top bits (see rng.cc)
//   Normal()        = Box-Muller on two uniforms, cosine branch only

#ifndef RQM_RNG_H_
#define RQM_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace rqm {

enum class StreamPurpose : std::uint64_t {
  kMechanism = 1,       // (device, round, coordinate)
  kDeviceSampling = 2,  // (round)
  kDataGeneration = 3,  // (device)
  kNeighbors = 4,       // (sweep row)
  kMonteCarlo = 5,      // test and diagnostic draws
  kExecutionOrder = 6,  // (round), test-only shuffling of device order
};

std::uint64_t Mix64(std::uint64_t z);

std::uint64_t DeriveKey(std::uint64_t master_seed, StreamPurpose purpose,
                        std::initializer_list<std::uint64_t> ids);

class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t key) : key_(key) {}

  static RngStream Derive(std::uint64_t master_seed, StreamPurpose purpose,
                          std::initializer_list<std::uint64_t> ids) {
    return RngStream(DeriveKey(master_seed, purpose, ids));
  }

  std::uint64_t Next();
  double Uniform();
  bool Bernoulli(double p) { return Uniform() < p; }
  // Uniform integer in [0, bound); bound > 0.
  std::uint64_t UniformIndex(std::uint64_t bound);
  double Normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  // UniformRandomBitGenerator, so <random> and <algorithm> can consume it.
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return Next(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rqm

#endif  // RQM_RNG_H_
