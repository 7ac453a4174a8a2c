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

#ifndef SLICETUNE_STAGE1_SEARCH_H_
#define SLICETUNE_STAGE1_SEARCH_H_

#include <cstdint>
#include <vector>

#include "slicetune/bnn/bnn.h"
#include "slicetune/metrics/kl.h"
#include "slicetune/metrics/ledger.h"
#include "slicetune/sim/engine.h"
#include "slicetune/sim/types.h"

namespace slicetune {

struct Stage1Config {
  int iterations = 300;    // T
  int parallel = 8;        // P
  int warmup = -1;         // W; negative means max(20, T/10)
  int candidates = 10000;  // M
  double alpha = 7.0;
  double radius = 0.4;  // H, in normalized coordinates
  double duration_s = 60.0;
  // The action and network state every stage-1 query replays; must match the
  // reference trace.
  ConfigAction reference_action = {9, 3, 0, 0, 0.5, 0.8};
  NetworkState state;
  SimulationParams x_hat = SimulationParams::Original();
  ParamBox box = ParamBox::Default();
  KlOptions kl;
  BnnConfig bnn;
  int warmup_epochs = 200;   // first fit after the warmup queries
  int steps_per_query = 2;   // retraining steps per round = this * P
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency
  EngineConfig engine;

  int EffectiveWarmup() const;
  // Throws ConfigError on out-of-range settings.
  void Validate() const;
};

struct Stage1Result {
  SimulationParams best;
  double best_kl = 0;
  double best_weighted = 0;
  RunLedger ledger;
  BnnModel surrogate;
  // Incumbent weighted discrepancy after every query, in ledger order.
  std::vector<double> best_so_far;
};

// n draws uniform over the part of the normalized box within distance H of
// x_hat (rejection sampling from the ball's bounding box). H = 0 returns n
// copies of x_hat. Throws std::invalid_argument for H < 0 or n < 1 and
// InfeasibleError when the acceptance rate drops below 1e-4.
std::vector<SimulationParams> SampleParamCandidates(const SimulationParams& x_hat,
                                                    double radius, std::size_t n,
                                                    std::uint64_t seed,
                                                    const ParamBox& box = ParamBox::Default());

// Parallel Thompson-sampling search for the simulator parameters that
// reproduce `reference` (the frozen real-network latency trace).
Stage1Result SearchParameters(const Stage1Config& cfg, const LatencyTrace& reference);

}  // namespace slicetune

#endif  // SLICETUNE_STAGE1_SEARCH_H_
