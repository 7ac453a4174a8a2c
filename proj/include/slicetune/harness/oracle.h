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

#ifndef SLICETUNE_HARNESS_ORACLE_H_
#define SLICETUNE_HARNESS_ORACLE_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "slicetune/metrics/ledger.h"
#include "slicetune/sim/environment.h"

namespace slicetune {

struct OracleConfig {
  std::vector<double> levels = {0.0, 0.3, 0.6, 0.9};
  double requirement = 0.9;
  double threshold_ms = 300.0;
  double duration_s = 60.0;
  NetworkState state;
  std::uint64_t seed = 1;
  int threads = 0;
};

struct OracleResult {
  ReferenceOptimum best;
  std::vector<ConfigAction> actions;
  std::vector<double> usage;
  std::vector<double> qoe;
  std::size_t feasible_count = 0;
};

// Brute force over the full factorial grid: the minimum-usage action whose
// measured QoE meets the requirement (ties: grid order). Throws
// InfeasibleError when no grid action is feasible.
OracleResult GridOracle(const Environment& env, const OracleConfig& cfg);

void SaveOracle(const std::filesystem::path& path, const ReferenceOptimum& ref);
ReferenceOptimum LoadOracle(const std::filesystem::path& path);

}  // namespace slicetune

#endif  // SLICETUNE_HARNESS_ORACLE_H_
