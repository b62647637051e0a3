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

#include "rqm/mechanism.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "format.h"
#include "rqm/errors.h"

namespace rqm {
namespace {

// Slack allowed by RandomizedRound for x sitting a few ulps outside its
// bracket after floating evaluation of the grid.
constexpr double kBracketSlack = 1e-12;

}  // namespace

RqmParams::RqmParams(double c, double delta, int levels, double q)
    : c_(c), delta_(delta), levels_(levels), q_(q) {
  if (!(std::isfinite(c) && c > 0.0)) {
    throw ValidationError("RQM requires c > 0");
  }
  if (!(std::isfinite(delta) && delta > 0.0)) {
    throw ValidationError("RQM requires delta > 0");
  }
  if (levels < 2) {
    throw ValidationError("RQM requires m >= 2 levels");
  }
  if (!(q > 0.0 && q < 1.0)) {
    throw ValidationError("RQM requires 0 < q < 1");
  }
}

std::string RqmParams::ToString() const {
  using internal::Shortest;
  return "rqm(c=" + Shortest(c_) + ", delta=" + Shortest(delta_) +
         ", m=" + std::to_string(levels_) + ", q=" + Shortest(q_) + ")";
}

QuantizationGrid::QuantizationGrid(const RqmParams& params)
    : x_max_(params.x_max()) {
  const int m = params.levels();
  levels_.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    levels_[static_cast<std::size_t>(i)] =
        -x_max_ + 2.0 * i * x_max_ / (m - 1);
  }
}

QuantizationGrid BuildGrid(const RqmParams& params) {
  return QuantizationGrid(params);
}

LevelSubset SubsampleLevels(const RqmParams& params, RngStream& rng) {
  const int m = params.levels();
  LevelSubset subset;
  subset.indices.reserve(static_cast<std::size_t>(m));
  subset.indices.push_back(0);
  for (int i = 1; i <= m - 2; ++i) {
    if (rng.Bernoulli(params.q())) subset.indices.push_back(i);
  }
  subset.indices.push_back(m - 1);
  return subset;
}

int LocateBin(double x, const QuantizationGrid& grid) {
  const double x_max = grid.x_max();
  if (!(x >= -x_max && x < x_max)) {
    throw ValidationError("LocateBin: x outside [-x_max, x_max)");
  }
  const int m = grid.size();
  const double scaled = (x + x_max) * (m - 1) / (2.0 * x_max);
  int j = std::clamp(static_cast<int>(std::floor(scaled)), 0, m - 2);
  // The formula and the stored levels can disagree by one ulp at a grid
  // point; settle on the stored levels so levels[j] <= x < levels[j+1].
  if (j + 1 <= m - 2 && grid.level(j + 1) <= x) {
    ++j;
  } else if (j > 0 && grid.level(j) > x) {
    --j;
  }
  return j;
}

int RandomizedRound(double x, int lo, int hi, const QuantizationGrid& grid,
                    RngStream& rng) {
  if (!(lo >= 0 && lo < hi && hi < grid.size())) {
    throw ValidationError("RandomizedRound: requires 0 <= lo < hi < m");
  }
  const double low = grid.level(lo);
  const double high = grid.level(hi);
  const double slack = kBracketSlack * grid.x_max();
  if (!(x >= low - slack && x <= high + slack)) {
    throw ValidationError("RandomizedRound: x outside [levels[lo], levels[hi]]");
  }
  const double up = std::clamp((x - low) / (high - low), 0.0, 1.0);
  return rng.Uniform() < up ? hi : lo;
}

int RqmSample(double x, const RqmParams& params, RngStream& rng) {
  return RqmSample(x, params, QuantizationGrid(params), rng);
}

int RqmSample(double x, const RqmParams& params, const QuantizationGrid& grid,
              RngStream& rng) {
  if (!(std::abs(x) <= params.c())) {
    throw ValidationError("RqmSample: requires |x| <= c");
  }
  const LevelSubset subset = SubsampleLevels(params, rng);
  const int j = LocateBin(x, grid);
  // Lower bracket: largest kept index <= j. Upper: smallest kept index > j.
  const auto upper = std::upper_bound(subset.indices.begin(),
                                      subset.indices.end(), j);
  const int hi = *upper;
  const int lo = *(upper - 1);
  return RandomizedRound(x, lo, hi, grid, rng);
}

double DecodeLevel(int z, const RqmParams& params) {
  const int m = params.levels();
  if (z < 0 || z >= m) {
    throw ValidationError("DecodeLevel: index outside [0, m-1]");
  }
  const double x_max = params.x_max();
  return -x_max + 2.0 * z * x_max / (m - 1);
}

double DecodeAggregate(std::int64_t z_sum, int n, const RqmParams& params) {
  if (n < 1) throw ValidationError("DecodeAggregate: requires n >= 1");
  const std::int64_t top =
      static_cast<std::int64_t>(n) * (params.levels() - 1);
  if (z_sum < 0 || z_sum > top) {
    throw ValidationError("DecodeAggregate: sum outside [0, n(m-1)]");
  }
  const double x_max = params.x_max();
  return -x_max + 2.0 * static_cast<double>(z_sum) * x_max /
                      static_cast<double>(top);
}

std::vector<double> ClipCoordinatewise(std::span<const double> v, double c) {
  std::vector<double> out(v.begin(), v.end());
  for (double& e : out) e = std::clamp(e, -c, c);
  return out;
}

}  // namespace rqm
