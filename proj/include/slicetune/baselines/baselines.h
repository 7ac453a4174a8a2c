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

#ifndef SLICETUNE_BASELINES_BASELINES_H_
#define SLICETUNE_BASELINES_BASELINES_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "slicetune/bnn/bnn.h"
#include "slicetune/gp/gp.h"
#include "slicetune/metrics/ledger.h"
#include "slicetune/sim/environment.h"

namespace slicetune {

// Closed-form expected improvement for minimization below `best`.
double ExpectedImprovement(double mean, double std, double best);
// 2 ln(n^2 pi^2 / (6 delta)).
double GpUcbBeta(int n, double delta = 0.1);

// Index of the minimum-usage candidate whose predicted QoE meets the
// requirement (ties: lower index). When none qualifies, the candidate with the
// highest predicted QoE.
std::size_t PickMinUsageFeasible(const std::vector<double>& usage,
                                 const std::vector<double>& predicted_qoe,
                                 double requirement);

enum class Acquisition { kEi, kUcb };

// Plain GP Bayesian optimization of a black box on [0,1]^dim (minimization),
// over a fresh uniform candidate set each iteration. Used to check the
// acquisition machinery on synthetic problems.
struct GpMinimizeResult {
  std::vector<double> best_x;
  double best_f = 0;
  std::vector<double> history;  // f of every query
};
GpMinimizeResult GpMinimize(const std::function<double(const std::vector<double>&)>& f,
                            int dim, int iterations, int candidates, Acquisition acq,
                            std::uint64_t seed, GpHyper hyper = {});

struct BaselineConfig {
  int iterations = 100;
  int candidates = 10000;
  double requirement = 0.9;
  double threshold_ms = 300.0;
  double max_threshold_ms = 1000.0;
  double step = 0.1;
  int traffic = 1;
  double duration_s = 60.0;
  GpHyper gp = {0.3, 1.0, 1e-3, 0.05};
  double ucb_delta = 0.1;
  // First applied action; a seeded uniform draw when empty.
  std::optional<ConfigAction> first_action;
  std::uint64_t seed = 1;

  void Validate() const;
};

struct BaselineResult {
  RunLedger ledger;
  double lambda_final = 0;
};

// Online GP baselines on the real network: one GP over (traffic, action) ->
// QoE, scored through the Lagrangian with lambda moved by the dual update on
// every measured QoE. No offline artifacts are used.
BaselineResult RunGpEi(const Environment& env, const BaselineConfig& cfg,
                       const ReferenceOptimum& reference);
BaselineResult RunGpUcb(const Environment& env, const BaselineConfig& cfg,
                        const ReferenceOptimum& reference);

// Offline-surrogate filter: the offline policy's mean QoE plus the running
// mean of observed (real - predicted) residuals; applies the minimum-usage
// predicted-feasible action of a fixed candidate pool.
BaselineResult RunOfflineFilter(const Environment& env, const BaselineConfig& cfg,
                                const ReferenceOptimum& reference, const BnnModel& policy);

}  // namespace slicetune

#endif  // SLICETUNE_BASELINES_BASELINES_H_
