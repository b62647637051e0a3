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

#include "rqm/pmf.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rqm/errors.h"

namespace rqm {

Pmf::Pmf(std::vector<double> probs, double tolerance)
    : probs_(std::move(probs)) {
  if (probs_.empty()) throw ValidationError("Pmf: empty support");
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (!(probs_[i] >= 0.0) || !std::isfinite(probs_[i])) {
      std::ostringstream os;
      os << "Pmf: entry " << i << " is " << probs_[i];
      throw ConsistencyError(os.str());
    }
  }
  const double total = CompensatedSum(probs_);
  if (std::abs(total - 1.0) > tolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "Pmf: entries sum to " << total << " (tolerance " << tolerance
       << ")";
    throw ConsistencyError(os.str());
  }
}

Pmf Pmf::PointMass(int index, int size) {
  if (index < 0 || index >= size) {
    throw ValidationError("Pmf::PointMass: index outside support");
  }
  std::vector<double> probs(static_cast<std::size_t>(size), 0.0);
  probs[static_cast<std::size_t>(index)] = 1.0;
  return Pmf(std::move(probs));
}

Pmf Pmf::Uniform(int size) {
  if (size < 1) throw ValidationError("Pmf::Uniform: empty support");
  return Pmf(std::vector<double>(static_cast<std::size_t>(size), 1.0 / size));
}

double Pmf::MinEntry() const {
  return *std::min_element(probs_.begin(), probs_.end());
}

double Pmf::Total() const { return CompensatedSum(probs_); }

double CompensatedSum(std::span<const double> values) {
  double sum = 0.0;
  double compensation = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      compensation += (sum - t) + v;
    } else {
      compensation += (v - t) + sum;
    }
    sum = t;
  }
  return sum + compensation;
}

double TotalVariation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw ValidationError("TotalVariation: support size mismatch");
  }
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv;
}

double TotalVariation(const Pmf& p, const Pmf& q) {
  return TotalVariation(p.probs(), q.probs());
}

std::vector<double> EmpiricalDistribution(std::span<const int> samples,
                                          int size) {
  std::vector<double> freq(static_cast<std::size_t>(size), 0.0);
  for (int s : samples) {
    if (s < 0 || s >= size) {
      throw ValidationError("EmpiricalDistribution: sample outside support");
    }
    freq[static_cast<std::size_t>(s)] += 1.0;
  }
  if (!samples.empty()) {
    for (double& f : freq) f /= static_cast<double>(samples.size());
  }
  return freq;
}

}  // namespace rqm
