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

// Exact output distribution of the randomized quantization mechanism.
//
// With j = LocateBin(x) and r = 1 - q, the probability of emitting index i
// is a sum over the kept level on the other side of x:
//
//   i <= j:  pre(i) * [ r^(m-j-2) (B(m-1)-x)/(B(m-1)-B(i))
//                       + sum_{k=j+1}^{m-2} q r^(k-j-1) (B(k)-x)/(B(k)-B(i)) ]
//            pre(i) = r^(j-i), times q unless i == 0
//
//   i > j:   post(i) * [ r^j (x-B(0))/(B(i)-B(0))
//                        + sum_{k=1}^{j} q r^(j-k) (x-B(k))/(B(i)-B(k)) ]
//            post(i) = r^(i-j-1), times q unless i == m-1
//
// RqmPmfBruteForce enumerates every subsampling outcome instead and is the
// independent check on the closed form.

#ifndef RQM_EXACT_DISTRIBUTION_H_
#define RQM_EXACT_DISTRIBUTION_H_

#include "rqm/mechanism.h"
#include "rqm/pmf.h"

namespace rqm {

inline constexpr int kMaxBruteForceLevels = 20;

// Closed form. Requires |x| <= c. Throws ConsistencyError if the result does
// not sum to one within 1e-10.
Pmf RqmPmf(double x, const RqmParams& params);

// Enumerates all 2^(m-2) level subsets. Requires |x| <= c and
// m <= kMaxBruteForceLevels.
Pmf RqmPmfBruteForce(double x, const RqmParams& params);

// Sum_i p[i] * levels[i]; p must have one entry per level.
double PmfMean(const Pmf& p, const QuantizationGrid& grid);

namespace detail {

// Closed form with the sign of the i == 0 term flipped. Used only as the
// negative control of the self-test.
Pmf RqmPmfWithLowerEndpointFault(double x, const RqmParams& params);

}  // namespace detail
}  // namespace rqm

#endif  // RQM_EXACT_DISTRIBUTION_H_
