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
#include <map>

#include "gtest/gtest.h"
#include "slicetune/common/errors.h"
#include "slicetune/metrics/objectives.h"

namespace slicetune {
namespace {

Stage2Config SmallConfig() {
  Stage2Config cfg;
  cfg.iterations = 12;
  cfg.parallel = 4;
  cfg.warmup = 6;
  cfg.candidates = 400;
  cfg.duration_s = 10;
  cfg.warmup_epochs = 30;
  cfg.bnn.hidden = {16, 16};
  cfg.seed = 9;
  return cfg;
}

ConfigAction ActionOf(const LedgerRow& r) {
  std::array<double, ConfigAction::kDim> a{};
  std::copy(r.x_or_a.begin(), r.x_or_a.end(), a.begin());
  return ConfigAction::FromArray(a);
}

// Feasibility-first incumbent replayed from the ledger, independent of the
// library's bookkeeping.
std::vector<double> ReplayIncumbentUsage(const std::vector<LedgerRow>& rows, int traffic,
                                         double requirement, const LedgerRow** best) {
  std::vector<double> trace;
  double inc = INFINITY;
  *best = nullptr;
  for (const auto& r : rows) {
    if (r.traffic.value_or(1) == traffic && *r.qoe >= requirement && *r.usage < inc) {
      inc = *r.usage;
      *best = &r;
    }
    trace.push_back(inc);
  }
  return trace;
}

TEST(OfflineTrain, LedgerInvariants) {
  Stage2Config cfg = SmallConfig();
  cfg.threshold_ms = 1000;
  cfg.requirement = 0.5;
  SimulatorEnv sim(SimulationParams::Original());
  auto r = OfflineTrain(cfg, sim);
  const auto& rows = r.ledger.rows();
  ASSERT_EQ(rows.size(), static_cast<std::size_t>(cfg.warmup +
                                                  (cfg.iterations - cfg.warmup) * cfg.parallel));
  for (const auto& row : rows) {
    EXPECT_EQ(row.stage, 2);
    ASSERT_TRUE(row.qoe && row.usage && row.lambda && row.traffic);
    EXPECT_GE(*row.qoe, 0.0);
    EXPECT_LE(*row.qoe, 1.0);
    EXPECT_GE(*row.lambda, 0.0);
    ConfigAction a = ActionOf(row);
    EXPECT_TRUE(a.InRange()) << a.ToString();
    EXPECT_NEAR(*row.usage, ResourceUsage(a), 1e-12);
    EXPECT_NE(std::find(cfg.traffic_levels.begin(), cfg.traffic_levels.end(), *row.traffic),
              cfg.traffic_levels.end());
  }
  for (double l : r.lambda_trace) EXPECT_GE(l, 0.0);
}

TEST(OfflineTrain, IncumbentIsMinimumFeasibleUsageAndNonIncreasing) {
  Stage2Config cfg = SmallConfig();
  cfg.threshold_ms = 1000;
  cfg.requirement = 0.5;
  SimulatorEnv sim(SimulationParams::Original());
  auto r = OfflineTrain(cfg, sim);
  const LedgerRow* best = nullptr;
  auto trace = ReplayIncumbentUsage(r.ledger.rows(), cfg.incumbent_traffic, cfg.requirement,
                                    &best);
  ASSERT_NE(best, nullptr);
  for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1]);
  EXPECT_EQ(r.best_action, ActionOf(*best));
  EXPECT_DOUBLE_EQ(r.best_usage, *best->usage);
  EXPECT_DOUBLE_EQ(r.best_qoe, *best->qoe);
  EXPECT_GE(r.best_qoe, cfg.requirement);
}

TEST(OfflineTrain, VacuousConstraintPicksMinimumUsage) {
  Stage2Config cfg = SmallConfig();
  cfg.threshold_ms = 1e9;
  cfg.max_threshold_ms = 1e9;
  SimulatorEnv sim(SimulationParams::Original());
  auto r = OfflineTrain(cfg, sim);
  double min_usage = INFINITY;
  for (const auto& row : r.ledger.rows()) {
    EXPECT_DOUBLE_EQ(*row.qoe, 1.0);
    if (row.traffic.value_or(1) == cfg.incumbent_traffic) {
      min_usage = std::min(min_usage, *row.usage);
    }
  }
  EXPECT_DOUBLE_EQ(r.best_usage, min_usage);
  // Multiplier stays at 0.
  for (double l : r.lambda_trace) EXPECT_DOUBLE_EQ(l, 0.0);
}

TEST(OfflineTrain, MultiplierFollowsTheDualLaw) {
  Stage2Config cfg = SmallConfig();
  cfg.threshold_ms = 300;
  cfg.requirement = 0.9;
  cfg.warmup = 16;
  cfg.iterations = 24;
  SimulatorEnv sim(SimulationParams::Original());
  Stage2Result r = OfflineTrain(cfg, sim);
  bool rose = false;
  ASSERT_EQ(r.lambda_trace.size(), r.round_mean_qoe.size());
  double prev = 0;
  for (std::size_t k = 0; k < r.lambda_trace.size(); ++k) {
    double q = r.round_mean_qoe[k];
    double expected = std::max(prev - cfg.step * (q - cfg.requirement), 0.0);
    EXPECT_NEAR(r.lambda_trace[k], expected, 1e-12);
    if (q < cfg.requirement) {
      EXPECT_GT(r.lambda_trace[k], prev);
      rose = true;
    }
    prev = r.lambda_trace[k];
  }
  EXPECT_DOUBLE_EQ(r.lambda_final, prev);
  EXPECT_TRUE(rose);
}

TEST(OfflineTrain, PerTrafficMultiplierReplaysFromLedger) {
  Stage2Config cfg = SmallConfig();
  cfg.threshold_ms = 400;
  cfg.requirement = 0.6;
  SimulatorEnv sim(SimulationParams::Original());
  Stage2Result r = OfflineTrain(cfg, sim);
  std::map<int, double> lam;
  for (int t : cfg.traffic_levels) lam[t] = 0;
  for (int round = cfg.warmup; round < cfg.iterations; ++round) {
    std::map<int, std::pair<double, int>> acc;
    for (const auto& row : r.ledger.rows()) {
      if (row.iter != round) continue;
      acc[*row.traffic].first += *row.qoe;
      acc[*row.traffic].second += 1;
    }
    for (auto& [t, l] : lam) {
      auto it = acc.find(t);
      if (it == acc.end()) continue;
      double mean = it->second.first / it->second.second;
      l = std::max(l - cfg.step * (mean - cfg.requirement), 0.0);
    }
  }
  ASSERT_EQ(r.lambda_by_traffic.size(), lam.size());
  for (const auto& [t, l] : lam) EXPECT_NEAR(r.lambda_by_traffic.at(t), l, 1e-12) << t;
}

TEST(OfflineTrain, InfeasibleNamesBestQoe) {
  Stage2Config cfg = SmallConfig();
  cfg.threshold_ms = 1.0;
  SimulatorEnv sim(SimulationParams::Original());
  try {
    OfflineTrain(cfg, sim);
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("best achieved QoE"), std::string::npos) << e.what();
  }
}

TEST(OfflineTrain, DeterministicForSeed) {
  Stage2Config cfg = SmallConfig();
  cfg.threshold_ms = 1000;
  cfg.requirement = 0.5;
  SimulatorEnv sim(SimulationParams::Original());
  auto a = OfflineTrain(cfg, sim);
  auto b = OfflineTrain(cfg, sim);
  EXPECT_EQ(a.ledger.rows(), b.ledger.rows());
  EXPECT_EQ(a.best_action, b.best_action);
  EXPECT_EQ(a.lambda_by_traffic, b.lambda_by_traffic);
}

TEST(OfflineTrain, BeatsIncumbentTieBreak) {
  Incumbent inc{ConfigAction{}, 0.3, 0.95, 5};
  EXPECT_TRUE(BeatsIncumbent(0.2, 9, inc));
  EXPECT_FALSE(BeatsIncumbent(0.4, 1, inc));
  EXPECT_TRUE(BeatsIncumbent(0.3, 4, inc));
  EXPECT_FALSE(BeatsIncumbent(0.3, 6, inc));
  EXPECT_TRUE(BeatsIncumbent(0.9, 100, std::nullopt));
}

TEST(OfflineTrain, InvalidConfigThrows) {
  SimulatorEnv sim(SimulationParams::Original());
  Stage2Config cfg = SmallConfig();
  cfg.incumbent_traffic = 3;
  cfg.traffic_levels = {1, 2};
  EXPECT_THROW(OfflineTrain(cfg, sim), ConfigError);
  cfg = SmallConfig();
  cfg.step = 0;
  EXPECT_THROW(OfflineTrain(cfg, sim), ConfigError);
}

TEST(EncodePolicyInput, Layout) {
  ConfigAction a{25, 10, 5, 0, 50, 0.5};
  auto v = EncodePolicyInput(2, 300, 1000, a);
  ASSERT_EQ(v.size(), static_cast<std::size_t>(kPolicyInputDim));
  EXPECT_DOUBLE_EQ(v[0], 0.5);
  EXPECT_DOUBLE_EQ(v[1], 0.3);
  EXPECT_DOUBLE_EQ(v[2], 0.5);
  EXPECT_DOUBLE_EQ(v[3], 0.2);
  EXPECT_DOUBLE_EQ(v[4], 0.5);
  EXPECT_DOUBLE_EQ(v[7], 0.5);
}

}  // namespace
}  // namespace slicetune
