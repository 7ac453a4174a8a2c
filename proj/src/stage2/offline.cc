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

#include "slicetune/stage2/offline.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "slicetune/common/errors.h"
#include "slicetune/common/parallel.h"
#include "slicetune/common/rng.h"
#include "slicetune/metrics/objectives.h"
#include "slicetune/sim/sampling.h"

namespace slicetune {

std::vector<double> EncodePolicyInput(int traffic, double threshold_ms,
                                      double max_threshold_ms, const ConfigAction& a) {
  std::vector<double> x;
  x.reserve(kPolicyInputDim);
  x.push_back(static_cast<double>(traffic) / NetworkState::kMaxTraffic);
  x.push_back(threshold_ms / max_threshold_ms);
  for (double v : a.Normalized()) x.push_back(v);
  return x;
}

void Stage2Config::Validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("stage2: " + what); };
  if (iterations < 1 || parallel < 1 || candidates < 1) {
    fail("iterations, parallel and candidates must be >= 1");
  }
  if (warmup < 1 || warmup > iterations) fail("warmup must be in [1, iterations]");
  if (!(requirement >= 0 && requirement <= 1)) fail("requirement must be in [0, 1]");
  if (!(threshold_ms > 0) || !(max_threshold_ms > 0)) fail("thresholds must be > 0");
  if (!(step > 0)) fail("step must be > 0");
  if (!(duration_s > 0)) fail("duration_s must be > 0");
  if (traffic_levels.empty()) fail("traffic_levels must not be empty");
  for (int t : traffic_levels) {
    if (t < 1 || t > NetworkState::kMaxTraffic) fail("traffic levels must be in [1, 4]");
  }
  if (std::find(traffic_levels.begin(), traffic_levels.end(), incumbent_traffic) ==
      traffic_levels.end()) {
    fail("incumbent_traffic must be one of traffic_levels");
  }
  if (warmup_epochs < 1 || steps_per_query < 1) fail("training schedule must be >= 1");
}

bool BeatsIncumbent(double usage, std::int64_t iter, const std::optional<Incumbent>& inc) {
  if (!inc) return true;
  if (usage != inc->usage) return usage < inc->usage;
  return iter < inc->iter;
}

Stage2Result OfflineTrain(const Stage2Config& cfg, const Environment& sim) {
  cfg.Validate();
  const std::size_t threads = static_cast<std::size_t>(std::max(cfg.threads, 0));
  Stage2Result result;
  std::vector<Sample> data;
  std::map<int, std::optional<Incumbent>> incumbents;
  std::map<int, double> best_seen;
  double lambda = 0.0;
  std::map<int, double> level_lambda;
  for (int t : cfg.traffic_levels) level_lambda[t] = 0.0;

  auto draw_traffic = [&](std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, cfg.traffic_levels.size() - 1);
    return cfg.traffic_levels[pick(rng)];
  };

  struct Query {
    ConfigAction action;
    int traffic = 1;
    std::uint64_t seed = 0;
    double qoe = 0;
  };

  auto run_queries = [&](std::vector<Query>& qs) {
    ParallelFor(
        qs.size(),
        [&](std::size_t i) {
          NetworkState state;
          state.traffic = qs[i].traffic;
          LatencyTrace trace = sim.Query(qs[i].action, state, cfg.duration_s, qs[i].seed);
          qs[i].qoe = trace.frames.empty() ? 0.0 : Qoe(trace, cfg.threshold_ms);
        },
        threads);
  };

  auto record = [&](std::int64_t iter, const Query& q) {
    double usage = ResourceUsage(q.action);
    auto raw = q.action.ToArray();
    LedgerRow row;
    row.iter = iter;
    row.stage = 2;
    row.kind = "offline";
    row.x_or_a.assign(raw.begin(), raw.end());
    row.usage = usage;
    row.qoe = q.qoe;
    row.lambda = lambda;
    row.seed = q.seed;
    row.traffic = q.traffic;
    result.ledger.Append(std::move(row));
    data.push_back({EncodePolicyInput(q.traffic, cfg.threshold_ms, cfg.max_threshold_ms,
                                      q.action),
                    q.qoe});
    best_seen[q.traffic] = std::max(best_seen[q.traffic], q.qoe);
    auto& inc = incumbents[q.traffic];
    if (q.qoe >= cfg.requirement && BeatsIncumbent(usage, iter, inc)) {
      inc = Incumbent{q.action, usage, q.qoe, iter};
    }
  };

  // Purely random exploration.
  {
    auto actions = SampleActions(static_cast<std::size_t>(cfg.warmup),
                                 DeriveSeed(cfg.seed, Stage::kStage2, 0, 0, "warmup"));
    std::vector<Query> qs(actions.size());
    for (std::size_t i = 0; i < qs.size(); ++i) {
      qs[i].action = actions[i];
      qs[i].traffic = draw_traffic(DeriveSeed(cfg.seed, Stage::kStage2, i, 0, "traffic"));
      qs[i].seed = DeriveSeed(cfg.seed, Stage::kStage2, i, 0, "query");
    }
    run_queries(qs);
    for (std::size_t i = 0; i < qs.size(); ++i) record(static_cast<std::int64_t>(i), qs[i]);
  }

  BnnModel& bnn = result.policy;
  bnn = BnnModel(kPolicyInputDim, cfg.bnn, DeriveSeed(cfg.seed, Stage::kStage2, 0, 0, "bnn-init"));
  bnn.Train(data, cfg.warmup_epochs, DeriveSeed(cfg.seed, Stage::kStage2, 0, 0, "bnn-train"));

  const std::size_t m = static_cast<std::size_t>(cfg.candidates);
  const std::size_t p = static_cast<std::size_t>(cfg.parallel);
  for (int round = cfg.warmup; round < cfg.iterations; ++round) {
    auto pick = [&](std::size_t worker, std::string_view purpose) {
      Query q;
      q.traffic = draw_traffic(DeriveSeed(cfg.seed, Stage::kStage2, round, worker, "traffic"));
      auto cands = SampleActions(
          m, DeriveSeed(cfg.seed, Stage::kStage2, round, worker, "candidates"));
      Eigen::MatrixXd z(kPolicyInputDim, static_cast<Eigen::Index>(m));
      std::vector<double> usage(m);
      for (std::size_t j = 0; j < m; ++j) {
        z.col(j) = bnn.NormalizeInput(
            EncodePolicyInput(q.traffic, cfg.threshold_ms, cfg.max_threshold_ms, cands[j]));
        usage[j] = ResourceUsage(cands[j]);
      }
      auto q_hat = bnn.ThompsonPredictNormalized(
          z, DeriveSeed(cfg.seed, Stage::kStage2, round, worker, purpose));
      std::size_t best = 0;
      double best_val = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m; ++j) {
        double v = Lagrangian(usage[j], q_hat[j], lambda, cfg.requirement);
        if (v < best_val) {
          best_val = v;
          best = j;
        }
      }
      q.action = cands[best];
      q.seed = DeriveSeed(cfg.seed, Stage::kStage2, round, worker, "query");
      return q;
    };

    std::vector<Query> qs(p);
    ParallelFor(p, [&](std::size_t w) { qs[w] = pick(w, "thompson"); }, threads);
    auto same = [](const Query& a, const Query& b) {
      return a.action == b.action && a.traffic == b.traffic;
    };
    for (std::size_t w = 1; w < p; ++w) {
      for (std::size_t v = 0; v < w; ++v) {
        if (same(qs[v], qs[w])) {
          qs[w] = pick(w, "thompson-redraw");
          break;
        }
      }
    }
    run_queries(qs);
    double mean_qoe = 0;
    for (const auto& q : qs) {
      record(round, q);
      mean_qoe += q.qoe / static_cast<double>(p);
    }
    result.round_mean_qoe.push_back(mean_qoe);
    lambda = DualUpdate(lambda, mean_qoe, cfg.requirement, cfg.step);
    for (auto& [traffic, lam] : level_lambda) {
      double sum = 0;
      int count = 0;
      for (const auto& q : qs) {
        if (q.traffic != traffic) continue;
        sum += q.qoe;
        ++count;
      }
      if (count > 0) lam = DualUpdate(lam, sum / count, cfg.requirement, cfg.step);
    }
    result.lambda_trace.push_back(lambda);

    bnn.TrainSteps(data, cfg.steps_per_query * cfg.parallel,
                   DeriveSeed(cfg.seed, Stage::kStage2, round, 0, "bnn-train"));
  }

  result.lambda_final = lambda;
  result.lambda_by_traffic = level_lambda;
  result.best_seen_qoe = best_seen[cfg.incumbent_traffic];
  for (const auto& [traffic, inc] : incumbents) {
    if (inc) result.per_traffic[traffic] = *inc;
  }
  auto it = result.per_traffic.find(cfg.incumbent_traffic);
  if (it == result.per_traffic.end()) {
    std::ostringstream os;
    os << "stage2: no action at traffic " << cfg.incumbent_traffic << " reached QoE "
       << cfg.requirement << "; best achieved QoE was " << result.best_seen_qoe;
    throw InfeasibleError(os.str());
  }
  result.best_action = it->second.action;
  result.best_usage = it->second.usage;
  result.best_qoe = it->second.qoe;
  return result;
}

}  // namespace slicetune
