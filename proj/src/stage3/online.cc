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

#include "slicetune/stage3/online.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "slicetune/common/errors.h"
#include "slicetune/common/rng.h"
#include "slicetune/metrics/objectives.h"
#include "slicetune/sim/sampling.h"
#include "slicetune/stage2/offline.h"

namespace slicetune {

namespace {

constexpr double kSqrt2Pi = 2.50662827463100050242;

double MeasureQoe(const Environment& env, const ConfigAction& a, int traffic,
                  const Stage3Config& cfg, std::uint64_t seed) {
  NetworkState state;
  state.traffic = traffic;
  LatencyTrace trace = env.Query(a, state, cfg.duration_s, seed);
  return trace.frames.empty() ? 0.0 : Qoe(trace, cfg.threshold_ms);
}

LedgerRow MakeRow(std::int64_t iter, const char* kind, const ConfigAction& a, double qoe,
                  double lambda, std::optional<double> beta, std::uint64_t seed,
                  int traffic) {
  auto raw = a.ToArray();
  LedgerRow row;
  row.iter = iter;
  row.stage = 3;
  row.kind = kind;
  row.x_or_a.assign(raw.begin(), raw.end());
  row.usage = ResourceUsage(a);
  row.qoe = qoe;
  row.lambda = lambda;
  row.beta = beta;
  row.seed = seed;
  row.traffic = traffic;
  return row;
}

}  // namespace

double CrgpucbKappa(int n, double rho, double kappa_min) {
  if (n < 1) throw std::invalid_argument("cRGP-UCB iteration must be >= 1");
  if (!(rho > 0)) throw std::invalid_argument("cRGP-UCB rho must be > 0");
  double nn = static_cast<double>(n);
  double kappa = std::log((nn * nn + 1.0) / kSqrt2Pi) / std::log1p(rho / 2.0);
  return std::max(kappa, kappa_min);
}

double CrgpucbBeta(int n, double rho, double clip, std::uint64_t seed, double kappa_min) {
  if (!(clip > 0)) throw std::invalid_argument("cRGP-UCB clip must be > 0");
  double kappa = CrgpucbKappa(n, rho, kappa_min);
  Rng rng(seed);
  std::gamma_distribution<double> gamma(kappa, rho);
  return std::clamp(gamma(rng), 0.0, clip);
}

double AcquisitionQoe(double q_s_mean, double q_s_std, const GpModel::Prediction& g,
                      double beta) {
  double sigma = std::sqrt(g.std * g.std + q_s_std * q_s_std);
  double q = q_s_mean + g.mean + std::sqrt(std::max(beta, 0.0)) * sigma;
  return std::clamp(q, 0.0, 1.5);
}

double AcquisitionQoe(const BnnModel& policy, const GpModel& gp,
                      const std::vector<double>& policy_input,
                      const std::vector<double>& gp_input, double beta, int n_mc,
                      std::uint64_t seed) {
  double mean = policy.PredictMean(policy_input);
  double std = policy.PosteriorAt(policy_input, n_mc, seed).std;
  return AcquisitionQoe(mean, std, gp.Predict(gp_input), beta);
}

std::vector<double> EncodeResidualInput(int traffic, const ConfigAction& a) {
  std::vector<double> x;
  x.reserve(1 + ConfigAction::kDim);
  x.push_back(static_cast<double>(traffic) / NetworkState::kMaxTraffic);
  for (double v : a.Normalized()) x.push_back(v);
  return x;
}

void Stage3Config::Validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("stage3: " + what); };
  if (iterations < 1 || inner_rounds < 1 || candidates < 1) {
    fail("iterations, inner_rounds and candidates must be >= 1");
  }
  if (!(requirement >= 0 && requirement <= 1)) fail("requirement must be in [0, 1]");
  if (!(threshold_ms > 0) || !(max_threshold_ms > 0)) fail("thresholds must be > 0");
  if (!(step > 0) || !(rho > 0) || !(clip > 0)) fail("step, rho and clip must be > 0");
  if (n_mc < 2) fail("n_mc must be >= 2");
  if (traffic < 1 || traffic > NetworkState::kMaxTraffic) fail("traffic must be in [1, 4]");
  if (!(duration_s > 0)) fail("duration_s must be > 0");
}

CandidatePool BuildCandidatePool(const BnnModel& policy, const Stage3Config& cfg,
                                 const std::vector<ConfigAction>& seeded) {
  CandidatePool pool;
  pool.actions = seeded;
  auto drawn = SampleActions(static_cast<std::size_t>(cfg.candidates),
                             DeriveSeed(cfg.seed, Stage::kStage3, 0, 0, "pool"));
  pool.actions.insert(pool.actions.end(), drawn.begin(), drawn.end());
  const std::size_t m = pool.actions.size();
  std::vector<std::vector<double>> inputs;
  inputs.reserve(m);
  pool.usage.resize(m);
  pool.gp_inputs.resize(1 + ConfigAction::kDim, static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    const auto& a = pool.actions[j];
    inputs.push_back(EncodePolicyInput(cfg.traffic, cfg.threshold_ms, cfg.max_threshold_ms, a));
    pool.usage[j] = ResourceUsage(a);
    auto g = EncodeResidualInput(cfg.traffic, a);
    for (std::size_t i = 0; i < g.size(); ++i) pool.gp_inputs(i, j) = g[i];
  }
  pool.q_mean = policy.PredictMeanBatch(inputs);
  auto post = policy.PosteriorBatch(inputs, cfg.n_mc,
                                    DeriveSeed(cfg.seed, Stage::kStage3, 0, 0, "pool-posterior"));
  pool.q_std.resize(m);
  for (std::size_t j = 0; j < m; ++j) pool.q_std[j] = post[j].std;
  return pool;
}

void OfflineAccelerate(OnlineState& state, const CandidatePool& pool,
                       const Environment& sim, const Stage3Config& cfg, double beta,
                       int online_iter, const RowSink& sink) {
  const std::size_t m = pool.actions.size();
  if (m == 0) throw std::invalid_argument("stage3: empty candidate pool");
  // The residual model and beta are fixed across the inner rounds; only the
  // multiplier moves.
  auto g = state.gp.PredictBatch(pool.gp_inputs);
  if (state.sim_qoe_sum.size() != m) {
    state.sim_qoe_sum.assign(m, 0.0);
    state.sim_qoe_count.assign(m, 0);
  }
  auto score = [&](std::size_t j) {
    if (state.sim_qoe_count[j] > 0) {
      return AcquisitionQoe(state.sim_qoe_sum[j] / state.sim_qoe_count[j], 0.0, g[j], beta);
    }
    return AcquisitionQoe(pool.q_mean[j], pool.q_std[j], g[j], beta);
  };
  std::vector<double> q_hat(m);
  for (std::size_t j = 0; j < m; ++j) q_hat[j] = score(j);
  for (int k = 0; k < cfg.inner_rounds; ++k) {
    std::size_t best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      double v = Lagrangian(pool.usage[j], q_hat[j], state.lambda, cfg.requirement);
      if (v < best_val) {
        best_val = v;
        best = j;
      }
    }
    const ConfigAction& a = pool.actions[best];
    std::uint64_t seed = DeriveSeed(cfg.seed, Stage::kStage3, online_iter, k, "inner-query");
    double q_s = MeasureQoe(sim, a, cfg.traffic, cfg, seed);
    state.lambda = DualUpdate(state.lambda, q_s + g[best].mean, cfg.requirement, cfg.step);
    state.pending = a;
    state.pending_seed = seed;
    state.pending_q_sim = q_s;
    state.sim_qoe_sum[best] += q_s;
    ++state.sim_qoe_count[best];
    q_hat[best] = score(best);
    LedgerRow row = MakeRow(online_iter, "offline", a, q_s, state.lambda, beta, seed,
                            cfg.traffic);
    state.ledger.Append(row);
    if (sink) sink(row);
  }
}

Stage3Result OnlineLearn(const Stage3Config& cfg, const Stage3Inputs& in,
                         const Environment& real, const Environment& sim,
                         const RowSink& sink) {
  cfg.Validate();
  if (in.policy == nullptr) throw std::invalid_argument("stage3: policy network missing");
  in.first_action.Validate();
  if (!(in.lambda0 >= 0)) throw std::invalid_argument("stage3: initial lambda must be >= 0");

  Stage3Result result;
  OnlineState& state = result.state;
  state.lambda = in.lambda0;
  state.gp = GpModel(cfg.gp);
  state.ledger.SetReference(in.reference);

  // The stage-2 action stays selectable after the first step.
  CandidatePool pool = BuildCandidatePool(*in.policy, cfg, {in.first_action});
  state.sim_qoe_sum.assign(pool.actions.size(), 0.0);
  state.sim_qoe_count.assign(pool.actions.size(), 0);
  std::vector<std::vector<double>> gp_x;
  std::vector<double> gp_y;

  for (int t = 0; t < cfg.iterations; ++t) {
    ConfigAction action;
    std::uint64_t seed;
    double q_sim;
    std::optional<double> beta;
    if (t == 0) {
      action = in.first_action;
      seed = DeriveSeed(cfg.seed, Stage::kStage3, 0, 0, "online-query");
      q_sim = MeasureQoe(sim, action, cfg.traffic, cfg, seed);
      state.sim_qoe_sum[0] += q_sim;
      ++state.sim_qoe_count[0];
    } else {
      beta = CrgpucbBeta(t, cfg.rho, cfg.clip,
                         DeriveSeed(cfg.seed, Stage::kStage3, t, 0, "beta"), cfg.kappa_min);
      result.betas.push_back(*beta);
      OfflineAccelerate(state, pool, sim, cfg, *beta, t, sink);
      action = *state.pending;
      seed = state.pending_seed;
      q_sim = state.pending_q_sim;
    }

    auto gp_in = EncodeResidualInput(cfg.traffic, action);
    result.residual_means.push_back(state.gp.Predict(gp_in).mean);
    double q_real = MeasureQoe(real, action, cfg.traffic, cfg, seed);

    Transition tr{action, cfg.traffic, q_real, q_sim, q_real - q_sim};
    state.transitions.push_back(tr);
    gp_x.push_back(gp_in);
    gp_y.push_back(tr.g);
    state.gp.Fit(gp_x, gp_y);
    ++state.n;

    LedgerRow row = MakeRow(t, "online", action, q_real, state.lambda, beta, seed, cfg.traffic);
    row.qoe_sim = q_sim;
    state.ledger.Append(row);
    state.ledger.UpdateRegret(ResourceUsage(action), q_real);
    if (sink) sink(row);
  }
  return result;
}

}  // namespace slicetune
