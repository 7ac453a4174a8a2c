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

#ifndef SLICETUNE_STAGE3_ONLINE_H_
#define SLICETUNE_STAGE3_ONLINE_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "slicetune/bnn/bnn.h"
#include "slicetune/gp/gp.h"
#include "slicetune/metrics/ledger.h"
#include "slicetune/sim/environment.h"
#include "slicetune/sim/types.h"

namespace slicetune {

// Shape of the randomized exploration weight at online iteration n:
// ln((n^2 + 1) / sqrt(2 pi)) / ln(1 + rho / 2), floored at kappa_min.
double CrgpucbKappa(int n, double rho, double kappa_min = 1e-3);
// beta ~ Gamma(shape kappa, scale rho), clipped to [0, clip]. Throws
// std::invalid_argument for n < 1, rho <= 0 or clip <= 0.
double CrgpucbBeta(int n, double rho, double clip, std::uint64_t seed,
                   double kappa_min = 1e-3);

// Optimistic QoE: q_s_mean + g.mean + sqrt(beta) * sqrt(g.std^2 + q_s_std^2),
// clamped to [0, 1.5].
double AcquisitionQoe(double q_s_mean, double q_s_std, const GpModel::Prediction& g,
                      double beta);
// Same, evaluated from the models; `policy_input` is the raw policy input and
// `gp_input` the residual model's input.
double AcquisitionQoe(const BnnModel& policy, const GpModel& gp,
                      const std::vector<double>& policy_input,
                      const std::vector<double>& gp_input, double beta, int n_mc,
                      std::uint64_t seed);

// Residual-model input: (traffic / 4, a / A).
std::vector<double> EncodeResidualInput(int traffic, const ConfigAction& a);

struct Stage3Config {
  int iterations = 100;    // online queries
  int inner_rounds = 20;   // N simulator queries per online step
  int candidates = 10000;  // fixed pool size
  double requirement = 0.9;
  double threshold_ms = 300.0;
  double max_threshold_ms = 1000.0;
  double step = 0.1;  // epsilon
  double rho = 0.1;
  double clip = 10.0;  // B
  double kappa_min = 1e-3;
  int n_mc = 30;
  int traffic = 1;
  double duration_s = 60.0;
  GpHyper gp = {0.3, 1.0, 1e-3, 0.05};
  std::uint64_t seed = 1;
  int threads = 0;

  void Validate() const;
};

struct Transition {
  ConfigAction action;
  int traffic = 1;
  double q_real = 0;
  double q_sim = 0;
  double g = 0;  // q_real - q_sim
};

struct OnlineState {
  double lambda = 0;
  GpModel gp;
  std::vector<Transition> transitions;
  int n = 0;  // online queries so far
  RunLedger ledger;
  // Set by OfflineAccelerate: the action to apply next, the seed of the
  // simulator query that selected it and the QoE that query measured. The
  // real query reuses the seed, so the measurement doubles as Q_s.
  std::optional<ConfigAction> pending;
  std::uint64_t pending_seed = 0;
  double pending_q_sim = 0;
  // Simulator QoE observed at pool actions during the inner rounds, indexed
  // like CandidatePool::actions. Where present it replaces the policy's
  // estimate of Q_s.
  std::vector<double> sim_qoe_sum;
  std::vector<int> sim_qoe_count;
};

// Called with every ledger row as soon as it is appended.
using RowSink = std::function<void(const LedgerRow&)>;

// Candidate pool with the offline policy's statistics cached once per run.
struct CandidatePool {
  std::vector<ConfigAction> actions;
  std::vector<double> usage;
  std::vector<double> q_mean;  // mean-weight forward pass
  std::vector<double> q_std;   // Monte Carlo spread over n_mc draws
  Eigen::MatrixXd gp_inputs;   // columns: residual-model inputs
};
// `seeded` actions come first, followed by cfg.candidates uniform draws.
CandidatePool BuildCandidatePool(const BnnModel& policy, const Stage3Config& cfg,
                                 const std::vector<ConfigAction>& seeded = {});

// N serial inner rounds against the augmented simulator: score the pool with
// the optimistic estimate (the mean simulator QoE with zero policy spread at
// actions already queried), take the Lagrangian argmin, query the simulator,
// and move lambda with Q_s + G_pred. The last argmin becomes state.pending.
// `online_iter` only feeds seed derivation and ledger rows.
void OfflineAccelerate(OnlineState& state, const CandidatePool& pool,
                       const Environment& sim, const Stage3Config& cfg, double beta,
                       int online_iter, const RowSink& sink = {});

struct Stage3Inputs {
  const BnnModel* policy = nullptr;
  ConfigAction first_action;  // stage-2 best action
  double lambda0 = 0;         // stage-2 multiplier at cfg.traffic
  ReferenceOptimum reference;
};

struct Stage3Result {
  OnlineState state;
  std::vector<double> betas;  // one per online iteration >= 1
  std::vector<double> residual_means;  // GP mean at the applied action, per iteration
};

// Online loop against `real`, with `sim` the augmented simulator.
Stage3Result OnlineLearn(const Stage3Config& cfg, const Stage3Inputs& in,
                         const Environment& real, const Environment& sim,
                         const RowSink& sink = {});

}  // namespace slicetune

#endif  // SLICETUNE_STAGE3_ONLINE_H_
