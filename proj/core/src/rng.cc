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

#include "rqm/rng.h"

#include <cmath>
#include <numbers>

namespace rqm {
namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

}  // namespace

std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t DeriveKey(std::uint64_t master_seed, StreamPurpose purpose,
                        std::initializer_list<std::uint64_t> ids) {
  std::uint64_t key = Mix64(master_seed + kGamma);
  key = Mix64(key ^ Mix64(static_cast<std::uint64_t>(purpose) + kGamma));
  for (std::uint64_t id : ids) key = Mix64(key ^ Mix64(id + kGamma));
  return key;
}

std::uint64_t RngStream::Next() {
  ++counter_;
  return Mix64(key_ + counter_ * kGamma);
}

double RngStream::Uniform() {
  return static_cast<double>(Next() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::UniformIndex(std::uint64_t bound) {
  // Reject the partial block at the top of the 64-bit range.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = Next();
  } while (v >= limit);
  return v % bound;
}

double RngStream::Normal() {
  // 1 - U lies in (0, 1], keeping the log finite.
  const double u1 = 1.0 - Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rqm
