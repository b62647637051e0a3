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

#include "rqm/selftest.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "rqm/accountant.h"
#include "rqm/errors.h"
#include "rqm/exact_distribution.h"
#include "rqm/pbm.h"

namespace rqm {
namespace {

constexpr double kQs[] = {0.1, 0.42, 0.9};
constexpr double kDeltaRatios[] = {0.25, 1.0, 2.0};
constexpr int kInputs = 11;

double InputAt(int k, double c) {
  return -c + 2.0 * c * k / (kInputs - 1);
}

// Runs `check` over every (params, x) in the reduced sweep. `check` returns
// an empty string on success, or a description of the failure.
SuiteResult SweepSuite(
    std::string name, int max_levels,
    const std::function<std::string(const RqmParams&, double)>& check) {
  SuiteResult result;
  result.name = std::move(name);
  const double c = 1.0;
  for (int m = 2; m <= max_levels; ++m) {
    for (double q : kQs) {
      for (double ratio : kDeltaRatios) {
        const RqmParams params(c, ratio * c, m, q);
        for (int k = 0; k < kInputs; ++k) {
          const double x = InputAt(k, c);
          ++result.checks;
          std::string failure;
          try {
            failure = check(params, x);
          } catch (const std::exception& e) {
            failure = std::string("exception: ") + e.what();
          }
          if (!failure.empty()) {
            std::ostringstream os;
            os.precision(17);
            os << params.ToString() << ", x=" << x << ": " << failure;
            result.passed = false;
            result.counterexample = os.str();
            return result;
          }
        }
      }
    }
  }
  return result;
}

SuiteResult OracleSuite(bool inject_fault) {
  return SweepSuite(
      "oracle-equivalence", 8,
      [inject_fault](const RqmParams& params, double x) -> std::string {
        const Pmf closed = inject_fault
                               ? detail::RqmPmfWithLowerEndpointFault(x, params)
                               : RqmPmf(x, params);
        const Pmf brute = RqmPmfBruteForce(x, params);
        for (int i = 0; i < closed.size(); ++i) {
          if (std::abs(closed[i] - brute[i]) > 1e-12) {
            std::ostringstream os;
            os.precision(17);
            os << "entry " << i << " closed=" << closed[i]
               << " enumerated=" << brute[i];
            return os.str();
          }
        }
        return {};
      });
}

SuiteResult UnbiasednessSuite() {
  return SweepSuite("unbiasedness", 12,
                    [](const RqmParams& params, double x) -> std::string {
                      const double mean =
                          PmfMean(RqmPmf(x, params), QuantizationGrid(params));
                      if (std::abs(mean - x) > 1e-10) {
                        std::ostringstream os;
                        os.precision(17);
                        os << "mean=" << mean;
                        return os.str();
                      }
                      return {};
                    });
}

SuiteResult MonotonicitySuite() {
  SuiteResult result;
  result.name = "alpha-monotonicity";
  const double orders[] = {1.5, 2.0, 10.0, 100.0, 1000.0, kInfiniteOrder};
  const double c = 1.5;
  std::vector<std::pair<Pmf, Pmf>> pairs;
  for (int m : {4, 8, 16}) {
    for (double q : kQs) {
      const RqmParams params(c, c, m, q);
      pairs.emplace_back(RqmPmf(c, params), RqmPmf(-c, params));
      pairs.emplace_back(RqmPmf(0.3 * c, params), RqmPmf(-0.7 * c, params));
    }
  }
  for (double theta : {0.15, 0.25, 0.35}) {
    const PbmParams params(c, theta, 16);
    pairs.emplace_back(PbmPmf(c, params), PbmPmf(-c, params));
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    double previous = 0.0;
    for (double alpha : orders) {
      ++result.checks;
      const double d = RenyiDivergence(pairs[p].first, pairs[p].second, alpha);
      if (d < previous - 1e-10) {
        std::ostringstream os;
        os.precision(17);
        os << "pair " << p << ": D at alpha=" << alpha << " is " << d
           << " < " << previous;
        result.passed = false;
        result.counterexample = os.str();
        return result;
      }
      previous = d;
    }
  }
  return result;
}

SuiteResult BoundSuite() {
  SuiteResult result;
  result.name = "bound-domination";
  const double c = 1.0;
  for (int m : {2, 4, 8, 16}) {
    for (double q : kQs) {
      for (double ratio : kDeltaRatios) {
        const RqmParams params(c, ratio * c, m, q);
        const double bound = MaxDivergenceBound(params);
        std::vector<Pmf> pmfs;
        for (int k = 0; k < kInputs; ++k) {
          pmfs.push_back(RqmPmf(InputAt(k, c), params));
        }
        for (int a = 0; a < kInputs; ++a) {
          for (int b = 0; b < kInputs; ++b) {
            ++result.checks;
            const double d = MaxDivergence(pmfs[static_cast<std::size_t>(a)],
                                           pmfs[static_cast<std::size_t>(b)]);
            if (d > bound + 1e-9) {
              std::ostringstream os;
              os.precision(17);
              os << params.ToString() << ", x=" << InputAt(a, c)
                 << ", x'=" << InputAt(b, c) << ": D_inf=" << d
                 << " > bound=" << bound;
              result.passed = false;
              result.counterexample = os.str();
              return result;
            }
          }
        }
      }
    }
  }
  return result;
}

}  // namespace

bool SelftestReport::passed() const {
  return std::all_of(suites.begin(), suites.end(),
                     [](const SuiteResult& s) { return s.passed; });
}

SelftestReport RunSelftest(const SelftestOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  SelftestReport report;
  report.suites.push_back(OracleSuite(options.inject_fault));
  report.suites.push_back(UnbiasednessSuite());
  report.suites.push_back(MonotonicitySuite());
  report.suites.push_back(BoundSuite());
  report.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return report;
}

}  // namespace rqm
