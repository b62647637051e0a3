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

#ifndef RQM_PMF_H_
#define RQM_PMF_H_

#include <span>
#include <vector>

namespace rqm {

inline constexpr double kDefaultNormalizationTolerance = 1e-10;

// Probability mass function over the contiguous support {0, ..., size()-1}.
// Entries are nonnegative and sum to one within the tolerance given at
// construction; violations throw ConsistencyError. No renormalization is
// ever applied.
class Pmf {
 public:
  explicit Pmf(std::vector<double> probs,
               double tolerance = kDefaultNormalizationTolerance);

  static Pmf PointMass(int index, int size);
  static Pmf Uniform(int size);

  std::span<const double> probs() const { return probs_; }
  double operator[](int i) const { return probs_[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(probs_.size()); }
  double MinEntry() const;
  double Total() const;

 private:
  std::vector<double> probs_;
};

// Neumaier-compensated sum.
double CompensatedSum(std::span<const double> values);

double TotalVariation(const Pmf& p, const Pmf& q);
double TotalVariation(std::span<const double> p, std::span<const double> q);

// Normalized histogram of integer samples on {0, ..., size-1}.
std::vector<double> EmpiricalDistribution(std::span<const int> samples,
                                          int size);

}  // namespace rqm

#endif  // RQM_PMF_H_
