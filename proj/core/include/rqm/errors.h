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

#ifndef RQM_ERRORS_H_
#define RQM_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rqm {

// Invalid parameters or inputs supplied by the caller (bad c, q out of range,
// |x| > c, index out of range, ...). The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An internal invariant failed, e.g. a PMF that does not sum to one or a
// convolution that underflowed. The CLI maps these to exit code 2.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Training aborted. Carries the round and device that produced the fault.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, int round, int device)
      : std::runtime_error(what + " (round " + std::to_string(round) +
                           ", device " + std::to_string(device) + ")"),
        round_(round),
        device_(device) {}

  int round() const { return round_; }
  int device() const { return device_; }

 private:
  int round_;
  int device_;
};

}  // namespace rqm

#endif  // RQM_ERRORS_H_
