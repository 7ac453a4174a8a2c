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

#include "slicetune/stage1/search.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "gtest/gtest.h"
#include "slicetune/common/errors.h"
#include "slicetune/metrics/objectives.h"
#include "slicetune/sim/environment.h"

namespace slicetune {
namespace {

double Dist(const ParamBox& box, const std::vector<double>& x, const SimulationParams& c) {
  std::array<double, SimulationParams::kDim> a{};
  std::copy(x.begin(), x.end(), a.begin());
  return NormalizedDistance(box, SimulationParams::FromArray(a), c);
}

TEST(SampleParamCandidates, ZeroRadiusReturnsCenter) {
  auto x_hat = SimulationParams::Original();
  auto c = SampleParamCandidates(x_hat, 0.0, 17, 3);
  ASSERT_EQ(c.size(), 17u);
  for (const auto& x : c) EXPECT_EQ(x, x_hat);
}

TEST(SampleParamCandidates, InsideBallAndBox) {
  const ParamBox box = ParamBox::Default();
  auto x_hat = SimulationParams::Original();
  for (double h : {0.05, 0.4, 1.0}) {
    auto c = SampleParamCandidates(x_hat, h, 2000, 7);
    ASSERT_EQ(c.size(), 2000u);
    for (const auto& x : c) {
      EXPECT_LE(NormalizedDistance(box, x, x_hat), h + 1e-12);
      EXPECT_TRUE(box.Contains(x));
    }
  }
}

TEST(SampleParamCandidates, LargeRadiusCoversTheBox) {
  const ParamBox box = ParamBox::Default();
  auto x_hat = SimulationParams::Original();
  auto c = SampleParamCandidates(x_hat, std::sqrt(7.0), 4000, 9);
  // Uniform over [0,1]^7: every coordinate should reach both ends.
  for (std::size_t i = 0; i < SimulationParams::kDim; ++i) {
    double lo = 1, hi = 0;
    for (const auto& x : c) {
      double u = box.Normalize(x)[i];
      lo = std::min(lo, u);
      hi = std::max(hi, u);
    }
    EXPECT_LT(lo, 0.01) << i;
    EXPECT_GT(hi, 0.99) << i;
  }
}

TEST(SampleParamCandidates, BadArgumentsAndDeterminism) {
  auto x_hat = SimulationParams::Original();
  EXPECT_THROW(SampleParamCandidates(x_hat, -0.1, 5, 1), std::invalid_argument);
  EXPECT_THROW(SampleParamCandidates(x_hat, 0.3, 0, 1), std::invalid_argument);
  auto bad = x_hat;
  bad.baseline_loss_db = 1e6;
  EXPECT_THROW(SampleParamCandidates(bad, 0.3, 5, 1), RangeError);
  EXPECT_EQ(SampleParamCandidates(x_hat, 0.3, 50, 4), SampleParamCandidates(x_hat, 0.3, 50, 4));
  EXPECT_NE(SampleParamCandidates(x_hat, 0.3, 50, 4), SampleParamCandidates(x_hat, 0.3, 50, 5));
}

Stage1Config SmallConfig() {
  Stage1Config cfg;
  cfg.iterations = 10;
  cfg.parallel = 3;
  cfg.warmup = 6;
  cfg.candidates = 400;
  cfg.duration_s = 20;
  cfg.warmup_epochs = 30;
  cfg.bnn.hidden = {16, 16};
  cfg.seed = 5;
  return cfg;
}

TEST(SearchParameters, QueryCountLedgerAndIncumbent) {
  Stage1Config cfg = SmallConfig();
  RealTwin twin(RealTwin::DefaultHiddenParams(), RealTwin::kDefaultSigmaRes);
  auto ref = CollectReference(twin, cfg.state, cfg.reference_action, cfg.duration_s, 77);
  Stage1Result r = SearchParameters(cfg, ref);

  const auto& rows = r.ledger.rows();
  const std::size_t expected =
      cfg.EffectiveWarmup() + static_cast<std::size_t>(cfg.iterations - cfg.EffectiveWarmup()) *
                                  cfg.parallel;
  ASSERT_EQ(rows.size(), expected);
  ASSERT_EQ(r.best_so_far.size(), expected);

  double best_w = INFINITY;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    EXPECT_EQ(row.stage, 1);
    EXPECT_EQ(row.kind, "offline");
    ASSERT_TRUE(row.kl.has_value());
    EXPECT_GE(*row.kl, -1e-9);
    ASSERT_EQ(row.x_or_a.size(), SimulationParams::kDim);
    EXPECT_LE(Dist(cfg.box, row.x_or_a, cfg.x_hat), cfg.radius + 1e-9);
    std::array<double, SimulationParams::kDim> a{};
    std::copy(row.x_or_a.begin(), row.x_or_a.end(), a.begin());
    best_w = std::min(best_w,
                      WeightedDiscrepancy(*row.kl, SimulationParams::FromArray(a), cfg.x_hat,
                                          cfg.alpha, cfg.box));
    EXPECT_NEAR(r.best_so_far[i], best_w, 1e-12);
    if (i > 0) EXPECT_LE(r.best_so_far[i], r.best_so_far[i - 1]);
  }
  EXPECT_NEAR(r.best_weighted, best_w, 1e-12);
  EXPECT_NEAR(r.best_weighted,
              WeightedDiscrepancy(r.best_kl, r.best, cfg.x_hat, cfg.alpha, cfg.box), 1e-12);

  // One iteration index per warmup query and per batched round.
  std::set<std::int64_t> iters;
  for (const auto& row : rows) iters.insert(row.iter);
  EXPECT_EQ(iters.size(), static_cast<std::size_t>(cfg.iterations));
}

TEST(SearchParameters, DeterministicForSeed) {
  Stage1Config cfg = SmallConfig();
  cfg.iterations = 8;
  RealTwin twin(RealTwin::DefaultHiddenParams(), RealTwin::kDefaultSigmaRes);
  auto ref = CollectReference(twin, cfg.state, cfg.reference_action, cfg.duration_s, 77);
  auto a = SearchParameters(cfg, ref);
  auto b = SearchParameters(cfg, ref);
  EXPECT_EQ(a.ledger.rows(), b.ledger.rows());
  EXPECT_EQ(a.best, b.best);
}

TEST(SearchParameters, TwinEqualsSimulatorStaysNearTheOrigin) {
  // sigma_res = 0 and hidden = x_hat. alpha = 0 leaves only the KL term.
  Stage1Config cfg = SmallConfig();
  cfg.iterations = 14;
  cfg.alpha = 0;
  RealTwin twin(cfg.x_hat, 0.0);
  auto ref = CollectReference(twin, cfg.state, cfg.reference_action, cfg.duration_s, 77);
  auto r = SearchParameters(cfg, ref);

  double floor = 0;
  for (std::uint64_t s = 1; s <= 8; ++s) {
    auto sim = Simulate(cfg.x_hat, cfg.reference_action, cfg.state, cfg.duration_s, 1000 + s);
    floor = std::max(floor, KlDivergence(ref, sim, cfg.kl));
  }
  EXPECT_LE(r.best_weighted, floor + 1e-9) << "noise floor " << floor;
}

TEST(SearchParameters, InvalidConfigThrows) {
  Stage1Config cfg = SmallConfig();
  LatencyTrace ref;
  cfg.warmup = cfg.iterations + 1;
  EXPECT_THROW(SearchParameters(cfg, ref), ConfigError);
  cfg = SmallConfig();
  cfg.radius = 0;
  EXPECT_THROW(SearchParameters(cfg, ref), ConfigError);
  cfg = SmallConfig();
  cfg.parallel = 0;
  EXPECT_THROW(SearchParameters(cfg, ref), ConfigError);
}

}  // namespace
}  // namespace slicetune
