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

#ifndef SLICETUNE_STAGE2_OFFLINE_H_
#define SLICETUNE_STAGE2_OFFLINE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "slicetune/bnn/bnn.h"
#include "slicetune/metrics/ledger.h"
#include "slicetune/sim/environment.h"
#include "slicetune/sim/types.h"

namespace slicetune {

// Policy-network input: (traffic / 4, Y / Y_max, a / A).
constexpr int kPolicyInputDim = 2 + static_cast<int>(ConfigAction::kDim);
std::vector<double> EncodePolicyInput(int traffic, double threshold_ms,
                                      double max_threshold_ms, const ConfigAction& a);

struct Stage2Config {
  int iterations = 400;    // T
  int parallel = 8;        // P
  int warmup = 40;         // W
  int candidates = 10000;  // M
  double requirement = 0.9;     // E
  double threshold_ms = 300.0;  // Y
  double max_threshold_ms = 1000.0;
  double step = 0.1;  // dual step size epsilon
  double duration_s = 60.0;
  std::vector<int> traffic_levels = {1, 2, 3, 4};
  int incumbent_traffic = 1;  // the level whose incumbent is "the" best action
  BnnConfig bnn;
  int warmup_epochs = 200;
  int steps_per_query = 2;
  std::uint64_t seed = 1;
  int threads = 0;

  void Validate() const;
};

struct Incumbent {
  ConfigAction action;
  double usage = 0;
  double qoe = 0;
  std::int64_t iter = 0;
};

struct Stage2Result {
  BnnModel policy;
  ConfigAction best_action;
  double best_usage = 0;
  double best_qoe = 0;
  double lambda_final = 0;
  // Multiplier of the constraint restricted to one traffic level: the same
  // dual update, fed with the mean QoE of that level's queries in each round.
  // Selection always uses the shared multiplier.
  std::map<int, double> lambda_by_traffic;
  RunLedger ledger;
  std::map<int, Incumbent> per_traffic;
  // Multiplier after every round (warmup rounds excluded).
  std::vector<double> lambda_trace;
  // Mean measured QoE of every round.
  std::vector<double> round_mean_qoe;
  // Best QoE measured at the incumbent traffic level, for diagnostics.
  double best_seen_qoe = 0;
};

// True when candidate (usage, iter) beats the incumbent: lower usage, then
// earlier iteration.
bool BeatsIncumbent(double usage, std::int64_t iter, const std::optional<Incumbent>& inc);

// Lagrangian primal-dual Thompson search over configuration actions in the
// augmented simulator `sim`. Throws InfeasibleError when no action at the
// incumbent traffic level ever met the requirement.
Stage2Result OfflineTrain(const Stage2Config& cfg, const Environment& sim);

}  // namespace slicetune

#endif  // SLICETUNE_STAGE2_OFFLINE_H_
