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

// Randomized Quantization Mechanism (RQM).
//
// A scalar x in [-c, c] is encoded as an index into m evenly spaced levels
// spanning the extended range [-(c + delta), c + delta]:
//
//   1. every interior level 1..m-2 is kept independently with probability q
//      (the two endpoints are always kept);
//   2. x is bracketed by the nearest kept levels below and above it;
//   3. x is rounded to one of the two brackets with probabilities that make
//      the decoded value unbiased.
//
// Only the index crosses the device boundary. Decoding is the inverse grid
// map, or its n-device average for a securely aggregated sum.

#ifndef RQM_MECHANISM_H_
#define RQM_MECHANISM_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rqm/rng.h"

namespace rqm {

// Validated RQM parameters. Rejects c <= 0, delta <= 0, m < 2 and q outside
// the open interval (0, 1).
class RqmParams {
 public:
  RqmParams(double c, double delta, int levels, double q);

  double c() const { return c_; }
  double delta() const { return delta_; }
  int levels() const { return levels_; }
  double q() const { return q_; }
  double x_max() const { return c_ + delta_; }

  std::string ToString() const;

  friend bool operator==(const RqmParams&, const RqmParams&) = default;

 private:
  double c_;
  double delta_;
  int levels_;
  double q_;
};

class QuantizationGrid {
 public:
  explicit QuantizationGrid(const RqmParams& params);

  // levels()[i] = -x_max + 2 * i * x_max / (m - 1).
  std::span<const double> levels() const { return levels_; }
  double level(int i) const { return levels_[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(levels_.size()); }
  double x_max() const { return x_max_; }

 private:
  std::vector<double> levels_;
  double x_max_;
};

// Sorted level indices that survived subsampling. Always contains 0 and m-1.
struct LevelSubset {
  std::vector<int> indices;
};

QuantizationGrid BuildGrid(const RqmParams& params);

// Consumes exactly m-2 Bernoulli(q) draws from `rng`, for indices 1..m-2 in
// ascending order.
LevelSubset SubsampleLevels(const RqmParams& params, RngStream& rng);

// Returns j in [0, m-2] with levels[j] <= x < levels[j+1]. Evaluated as
// floor((x + x_max) (m-1) / (2 x_max)) clamped to [0, m-2], so inputs
// within rounding error of a grid point resolve deterministically. Throws
// ValidationError unless -x_max <= x < x_max.
int LocateBin(double x, const QuantizationGrid& grid);

// Returns `hi` with probability (x - levels[lo]) / (levels[hi] - levels[lo])
// and `lo` otherwise. Consumes one uniform draw.
int RandomizedRound(double x, int lo, int hi, const QuantizationGrid& grid,
                    RngStream& rng);

// One draw of the mechanism. Requires |x| <= c. Consumes m-2 Bernoulli draws
// followed by one uniform.
int RqmSample(double x, const RqmParams& params, RngStream& rng);
int RqmSample(double x, const RqmParams& params, const QuantizationGrid& grid,
              RngStream& rng);

double DecodeLevel(int z, const RqmParams& params);

// Decodes the sum of n device indices to the mean of their levels:
// -(c + delta) + 2 z_sum (c + delta) / (n (m - 1)).
double DecodeAggregate(std::int64_t z_sum, int n, const RqmParams& params);

std::vector<double> ClipCoordinatewise(std::span<const double> v, double c);

}  // namespace rqm

#endif  // RQM_MECHANISM_H_
