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

#ifndef RQM_SELFTEST_H_
#define RQM_SELFTEST_H_

#include <string>
#include <vector>

namespace rqm {

struct SelftestOptions {
  // Negative control: evaluate the closed form with the sign of its i == 0
  // term flipped. The oracle suite must then fail.
  bool inject_fault = false;
};

struct SuiteResult {
  std::string name;
  bool passed = true;
  long checks = 0;
  // First failing case; empty when the suite passed.
  std::string counterexample;
};

struct SelftestReport {
  std::vector<SuiteResult> suites;
  double seconds = 0.0;

  bool passed() const;
};

// Reduced-scale invariant suites: closed form vs enumeration, unbiasedness,
// monotonicity in the order alpha, and single-device bound domination.
SelftestReport RunSelftest(const SelftestOptions& options = {});

}  // namespace rqm

#endif  // RQM_SELFTEST_H_
