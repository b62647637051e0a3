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

#include "rqm/pbm.h"

#include <cmath>
#include <string>
#include <vector>

#include "format.h"
#include "rqm/errors.h"

namespace rqm {

int PbmTrialsFor(int levels, PbmSupport support) {
  const int trials = support == PbmSupport::kLevels ? levels : levels - 1;
  if (trials < 1) throw ValidationError("PBM requires at least one trial");
  return trials;
}

PbmSupport ParsePbmSupport(std::string_view name) {
  if (name == "levels") return PbmSupport::kLevels;
  if (name == "matched") return PbmSupport::kMatched;
  throw ValidationError("unknown PBM support convention '" +
                        std::string(name) + "' (expected levels|matched)");
}

std::string_view PbmSupportName(PbmSupport support) {
  return support == PbmSupport::kLevels ? "levels" : "matched";
}

PbmParams::PbmParams(double c, double theta, int trials)
    : c_(c), theta_(theta), trials_(trials) {
  if (!(std::isfinite(c) && c > 0.0)) {
    throw ValidationError("PBM requires c > 0");
  }
  if (!(theta > 0.0 && theta <= 0.5)) {
    throw ValidationError("PBM requires 0 < theta <= 1/2");
  }
  if (trials < 1) throw ValidationError("PBM requires trials >= 1");
}

double PbmParams::SuccessProbability(double x) const {
  return 0.5 + theta_ * x / c_;
}

std::string PbmParams::ToString() const {
  using internal::Shortest;
  return "pbm(c=" + Shortest(c_) + ", theta=" + Shortest(theta_) +
         ", trials=" + std::to_string(trials_) + ")";
}

Pmf PbmPmf(double x, const PbmParams& params) {
  if (!(std::abs(x) <= params.c())) {
    throw ValidationError("PBM requires |x| <= c");
  }
  const double p = params.SuccessProbability(x);
  const int n = params.trials();
  std::vector<double> probs(static_cast<std::size_t>(n) + 1);
  // p == 0 or 1 only at theta = 1/2 and |x| = c: a point mass.
  if (p <= 0.0 || p >= 1.0) {
    probs[p <= 0.0 ? 0 : static_cast<std::size_t>(n)] = 1.0;
    return Pmf(std::move(probs));
  }
  const double log_p = std::log(p);
  const double log_1mp = std::log1p(-p);
  const double log_n_fact = std::lgamma(n + 1.0);
  for (int k = 0; k <= n; ++k) {
    const double log_choose =
        log_n_fact - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    probs[static_cast<std::size_t>(k)] =
        std::exp(log_choose + k * log_p + (n - k) * log_1mp);
  }
  return Pmf(std::move(probs));
}

int PbmSample(double x, const PbmParams& params, RngStream& rng) {
  if (!(std::abs(x) <= params.c())) {
    throw ValidationError("PBM requires |x| <= c");
  }
  const double p = params.SuccessProbability(x);
  int successes = 0;
  for (int t = 0; t < params.trials(); ++t) successes += rng.Bernoulli(p);
  return successes;
}

double PbmDecode(double z, const PbmParams& params) {
  return params.c() / params.theta() * (z / params.trials() - 0.5);
}

double PbmDecodeAggregate(std::int64_t z_sum, int n, const PbmParams& params) {
  if (n < 1) throw ValidationError("PbmDecodeAggregate: requires n >= 1");
  const std::int64_t top = static_cast<std::int64_t>(n) * params.trials();
  if (z_sum < 0 || z_sum > top) {
    throw ValidationError("PbmDecodeAggregate: sum outside [0, n * trials]");
  }
  return PbmDecode(static_cast<double>(z_sum) / n, params);
}

}  // namespace rqm
