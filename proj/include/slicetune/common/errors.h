// Copyright 2026 The slicetune Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SLICETUNE_COMMON_ERRORS_H_
#define SLICETUNE_COMMON_ERRORS_H_

#include <stdexcept>
#include <string>

namespace slicetune {

// Error categories map onto CLI exit codes (see tools/slicetune.cc).

// Invalid or missing configuration. Exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value outside its admissible box (action ranges, parameter boxes).
class RangeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// No feasible configuration was ever observed. Exit code 3.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite losses, failed factorizations. Exit code 4.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed persisted artifact (trace, ledger, checkpoint).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace slicetune

#endif  // SLICETUNE_COMMON_ERRORS_H_
