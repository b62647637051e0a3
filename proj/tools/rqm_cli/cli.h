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

// Command-line front end: pmf, bound, divergence, sweep, simulate, selftest.

#ifndef RQM_TOOLS_RQM_CLI_CLI_H_
#define RQM_TOOLS_RQM_CLI_CLI_H_

#include <ostream>

namespace rqm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitConsistency = 2;
inline constexpr int kExitSelftest = 3;

// Parses argv, runs one subcommand and returns the process exit code.
int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace rqm::cli

#endif  // RQM_TOOLS_RQM_CLI_CLI_H_
