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

// Renyi-DP accounting for a single device and for securely aggregated sums.
//
// For an aggregator that only reveals sum_i z_i, the privacy loss between
// neighboring input vectors x, x' (differing in one device) is
//
//   eps = D_alpha( P[sum_i Q(x_i)] || P[sum_i Q(x'_i)] ),
//
// computed exactly from the per-device PMFs by discrete convolution. The
// worst case puts every input at +-c, and because the law of the sum depends
// only on how many devices sit at +c, the neighbor pair is fully described
// by that count.

#ifndef RQM_ACCOUNTANT_H_
#define RQM_ACCOUNTANT_H_

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "rqm/mechanism.h"
#include "rqm/pbm.h"
#include "rqm/pmf.h"
#include "rqm/rng.h"

namespace rqm {

inline constexpr double kInfiniteOrder = std::numeric_limits<double>::infinity();

// Entries below this are treated as underflowed: a divergence whose
// reference PMF has such an entry (where the other PMF has mass) is +inf.
inline constexpr double kTinyProbability = 1e-300;

using MechanismSpec = std::variant<RqmParams, PbmParams>;

double MechanismClip(const MechanismSpec& mechanism);
Pmf MechanismPmf(const MechanismSpec& mechanism, double x);

// D_alpha(p || q) for finite alpha > 1, evaluated as
// LSE_i(alpha log p_i - (alpha - 1) log q_i) / (alpha - 1) with a max shift.
// alpha == kInfiniteOrder dispatches to MaxDivergence. Returns +inf when p
// has mass where q is zero or below kTinyProbability.
double RenyiDivergence(const Pmf& p, const Pmf& q, double alpha);

// max_i log(p_i / q_i) over indices with p_i > 0.
double MaxDivergence(const Pmf& p, const Pmf& q);

// Law of the sum of independent draws, on {0 .. sum(size_i - 1)}.
Pmf ConvolveSum(std::span<const Pmf> pmfs);

struct NeighborPair {
  std::vector<double> x;
  std::vector<double> x_prime;
};

// x_1 = c, x'_1 = -c; of devices 2..n, the first `split_k` sit at +c and the
// rest at -c in both vectors. Requires 0 <= split_k <= n - 1.
NeighborPair WorstCaseNeighbors(int n, double c, int split_k);
int DefaultSplit(int n);

// Devices 2..n at +c or -c with probability 1/2 each.
NeighborPair RandomWorstCaseNeighbors(int n, double c, RngStream& rng);

struct DivergenceQuery {
  double alpha = 2.0;
  MechanismSpec mechanism;
  std::vector<double> x;
  std::vector<double> x_prime;
  // Lets x == x' through validation (tests and input sweeps only).
  bool allow_identical = false;
};

// Exact laws of the two aggregated sums of a validated query.
std::pair<Pmf, Pmf> AggregatePmfs(const DivergenceQuery& query);

double AggregateDivergence(const DivergenceQuery& query);

// log(2 (1-q)^2 (1 + c/delta)) + m log(1/(1-q)).
double MaxDivergenceBound(const RqmParams& params);

enum class SweepAxis { kDevices, kOrder, kInput };
enum class NeighborMode { kBalanced, kSeededRandom };

SweepAxis ParseSweepAxis(std::string_view name);
std::string_view SweepAxisName(SweepAxis axis);

// from, from + step, ... up to and including `to` (within half a step).
std::vector<double> AxisRange(double from, double to, double step);

struct SweepSpec {
  SweepAxis axis = SweepAxis::kDevices;
  std::vector<double> values;
  // Held fixed while the other quantity varies.
  double alpha = 2.0;
  int devices = 1;
  RqmParams rqm;
  PbmParams pbm;
  NeighborMode neighbors = NeighborMode::kBalanced;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct SweepRow {
  double axis_value = 0.0;
  double eps_rqm = 0.0;
  double eps_pbm = 0.0;
};

// One row per axis value; rows are independent and the output does not
// depend on `threads`.
std::vector<SweepRow> DivergenceSweep(const SweepSpec& spec);

// Matched RQM/PBM comparison pairs at c = 1 and m = 16 (divergences do not
// depend on c).
//   standard: RQM(Delta = c, q = 0.42) vs PBM(theta = 0.25)
//   wide:     RQM(Delta = 2.33c, q = 0.42) vs PBM(theta = 0.15)
//   narrow:   RQM(Delta = 0.429c, q = 0.49) vs PBM(theta = 0.35)
enum class ComparisonPreset { kStandard, kWide, kNarrow };

ComparisonPreset ParseComparisonPreset(std::string_view name);
std::string_view ComparisonPresetName(ComparisonPreset preset);

struct MechanismPair {
  RqmParams rqm;
  PbmParams pbm;
};

MechanismPair PresetPair(ComparisonPreset preset,
                         PbmSupport support = PbmSupport::kLevels);

}  // namespace rqm

#endif  // RQM_ACCOUNTANT_H_
