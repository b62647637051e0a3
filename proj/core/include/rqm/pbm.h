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

// Poisson Binomial Mechanism baseline.
//
// Parameterization: a scalar x in [-c, c] sets the success probability
//
//   p(x) = 1/2 + theta * x / c,   0 < theta <= 1/2,
//
// and the device releases a Binomial(trials, p(x)) draw on {0..trials}.
// The unbiased per-device decode is (c / theta) (z / trials - 1/2).
//
// Comparing against RQM with m levels, the trial count follows one of two
// conventions (PbmSupport):
//   kLevels   trials = m      (PBM's own "m", support {0..m})   [default]
//   kMatched  trials = m - 1  (support {0..m-1}, same cardinality as RQM)

#ifndef RQM_PBM_H_
#define RQM_PBM_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "rqm/pmf.h"
#include "rqm/rng.h"

namespace rqm {

enum class PbmSupport { kLevels, kMatched };

int PbmTrialsFor(int levels, PbmSupport support);
PbmSupport ParsePbmSupport(std::string_view name);
std::string_view PbmSupportName(PbmSupport support);

class PbmParams {
 public:
  // Rejects c <= 0, theta outside (0, 1/2] and trials < 1.
  PbmParams(double c, double theta, int trials);

  double c() const { return c_; }
  double theta() const { return theta_; }
  int trials() const { return trials_; }

  double SuccessProbability(double x) const;
  std::string ToString() const;

  friend bool operator==(const PbmParams&, const PbmParams&) = default;

 private:
  double c_;
  double theta_;
  int trials_;
};

// Binomial(trials, p(x)) on {0..trials}, evaluated in log space via lgamma.
Pmf PbmPmf(double x, const PbmParams& params);

// Sum of `trials` Bernoulli(p(x)) draws.
int PbmSample(double x, const PbmParams& params, RngStream& rng);

double PbmDecode(double z, const PbmParams& params);

// Mean of n per-device decodes given the sum of their outputs.
double PbmDecodeAggregate(std::int64_t z_sum, int n, const PbmParams& params);

}  // namespace rqm

#endif  // RQM_PBM_H_
