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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "gtest/gtest.h"
#include "slicetune/common/errors.h"
#include "slicetune/common/parallel.h"
#include "slicetune/metrics/kl.h"
#include "slicetune/sim/engine.h"
#include "slicetune/sim/environment.h"
#include "slicetune/sim/sampling.h"
#include "slicetune/sim/trace_io.h"

namespace slicetune {
namespace {

const ConfigAction kGenerous{50, 50, 0, 0, 100, 1.0};
const ConfigAction kReference{9, 3, 0, 0, 0.5, 0.8};

NetworkState Traffic(int t) {
  NetworkState s;
  s.traffic = t;
  return s;
}

bool SameTrace(const LatencyTrace& a, const LatencyTrace& b) {
  if (a.frames.size() != b.frames.size()) return false;
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    const auto& x = a.frames[i];
    const auto& y = b.frames[i];
    if (x.frame_id != y.frame_id || x.t_done_ms != y.t_done_ms ||
        x.latency_ms != y.latency_ms || x.parts.queueing != y.parts.queueing) {
      return false;
    }
  }
  return true;
}

TEST(Simulate, Deterministic) {
  auto a = Simulate(SimulationParams::Original(), kReference, Traffic(3), 30, 17);
  auto b = Simulate(SimulationParams::Original(), kReference, Traffic(3), 30, 17);
  EXPECT_TRUE(SameTrace(a, b));
  auto c = Simulate(SimulationParams::Original(), kReference, Traffic(3), 30, 18);
  EXPECT_FALSE(SameTrace(a, c));
}

// Frozen from the first run of this engine; any engine change that moves it
// must re-freeze deliberately.
TEST(Simulate, RegressionPin) {
  auto t = Simulate(SimulationParams::Original(), kGenerous, Traffic(1), 60, 1);
  EXPECT_EQ(t.frames_completed(), 638u);
  EXPECT_NEAR(t.MeanLatency(), 94.0320910039, 1e-8);
}

TEST(Simulate, TraceInvariants) {
  for (int traffic = 1; traffic <= 4; ++traffic) {
    auto t = Simulate(SimulationParams::Original(), kReference, Traffic(traffic), 20, 5);
    ASSERT_FALSE(t.frames.empty());
    EXPECT_EQ(t.frames_completed(), t.Samples().size());
    for (const auto& f : t.frames) {
      EXPECT_GT(f.latency_ms, 0);
      EXPECT_EQ(f.latency_ms, f.parts.Total());
      EXPECT_LE(f.t_done_ms, 20 * 1000.0);
    }
  }
}

// The number of frames whose [start, done) interval covers an instant equals
// the traffic level. Probes stay well before the end of the trace, where
// unfinished frames would be missing.
TEST(Simulate, ClosedLoopPopulation) {
  for (int traffic = 1; traffic <= 4; ++traffic) {
    auto t = Simulate(SimulationParams::Original(), kReference, Traffic(traffic), 30, 9);
    std::vector<std::pair<double, double>> spans;
    double last_done = 0;
    for (const auto& f : t.frames) {
      spans.emplace_back(f.t_done_ms - f.latency_ms, f.t_done_ms);
      last_done = std::max(last_done, f.t_done_ms);
    }
    for (double x = 1.0; x < last_done * 0.8; x += 97.3) {
      int covering = 0;
      for (const auto& [s, e] : spans) covering += (s <= x && x < e);
      EXPECT_EQ(covering, traffic) << "traffic " << traffic << " at " << x << " ms";
    }
  }
}

TEST(Simulate, MoreUplinkPrbsNeverSlowUplink) {
  ConfigAction narrow{10, 10, 0, 0, 20, 0.8};
  ConfigAction wide = narrow;
  wide.bandwidth_ul = 20;
  auto a = Simulate(SimulationParams::Original(), narrow, Traffic(1), 30, 4);
  auto b = Simulate(SimulationParams::Original(), wide, Traffic(1), 30, 4);
  EXPECT_LE(b.MeanBreakdown().ul_tx, a.MeanBreakdown().ul_tx);
  EXPECT_LE(UplinkRateBps(SimulationParams::Original(), narrow, Traffic(1), {}),
            UplinkRateBps(SimulationParams::Original(), wide, Traffic(1), {}));
}

TEST(Simulate, PrbFloor) {
  ConfigAction a{0, 0, 0, 0, 10, 0.5};
  EXPECT_EQ(a.EffectiveUlPrb(), 6);
  EXPECT_EQ(a.EffectiveDlPrb(), 3);
  ConfigAction floor{6, 3, 0, 0, 10, 0.5};
  EXPECT_EQ(UplinkRateBps(SimulationParams::Original(), a, Traffic(1), {}),
            UplinkRateBps(SimulationParams::Original(), floor, Traffic(1), {}));
  EXPECT_EQ(DownlinkRateBps(SimulationParams::Original(), a, Traffic(1), {}),
            DownlinkRateBps(SimulationParams::Original(), floor, Traffic(1), {}));
  EXPECT_GT(UplinkRateBps(SimulationParams::Original(), a, Traffic(1), {}), 0);
  ConfigAction more{7, 4, 0, 0, 10, 0.5};
  EXPECT_EQ(more.EffectiveUlPrb(), 7);
  EXPECT_EQ(more.EffectiveDlPrb(), 4);
}

TEST(Simulate, OutOfRangeActionThrows) {
  ConfigAction bad{51, 3, 0, 0, 10, 0.5};
  EXPECT_THROW(Simulate(SimulationParams::Original(), bad, Traffic(1), 5, 1), RangeError);
  ConfigAction neg{6, 3, 0, 0, 10, -0.1};
  EXPECT_THROW(Simulate(SimulationParams::Original(), neg, Traffic(1), 5, 1), RangeError);
  ConfigAction mcs{6, 3, 11, 0, 10, 0.5};
  EXPECT_THROW(Simulate(SimulationParams::Original(), mcs, Traffic(1), 5, 1), RangeError);
  NetworkState zero;
  zero.traffic = 0;
  EXPECT_ANY_THROW(Simulate(SimulationParams::Original(), kReference, zero, 5, 1));
}

std::map<std::int64_t, double> ById(const LatencyTrace& t) {
  std::map<std::int64_t, double> m;
  for (const auto& f : t.frames) m[f.frame_id] = f.latency_ms;
  return m;
}

// Single frame in flight: no queueing anywhere, so each additive extra moves
// every frame by exactly its own delta.
TEST(Simulate, AdditiveExtrasShiftEveryFrame) {
  const double delta = 4.0;
  auto base = Simulate(SimulationParams::Original(), kReference, Traffic(1), 30, 21);
  auto base_ids = ById(base);
  for (int field : {4, 5, 6}) {  // backhaul delay, compute, loading extras
    auto arr = SimulationParams::Original().ToArray();
    arr[field] += delta;
    auto shifted = Simulate(SimulationParams::FromArray(arr), kReference, Traffic(1), 30, 21);
    int matched = 0;
    for (const auto& f : shifted.frames) {
      auto it = base_ids.find(f.frame_id);
      if (it == base_ids.end()) continue;
      ++matched;
      EXPECT_GE(f.latency_ms - it->second, delta - 1e-9) << "field " << field;
    }
    EXPECT_GT(matched, 100);
  }
}

// Closed-loop users: under saturation only the sign of the mean shift holds.
TEST(Simulate, AdditiveExtrasRaiseMeanUnderContention) {
  const double delta = 4.0;
  for (int traffic = 2; traffic <= 4; ++traffic) {
    auto base = Simulate(SimulationParams::Original(), kReference, Traffic(traffic), 60, 22);
    for (int field : {4, 5, 6}) {
      auto arr = SimulationParams::Original().ToArray();
      arr[field] += delta;
      auto shifted =
          Simulate(SimulationParams::FromArray(arr), kReference, Traffic(traffic), 60, 22);
      EXPECT_GT(shifted.MeanLatency() - base.MeanLatency(), 0.0)
          << "traffic " << traffic << " field " << field;
    }
  }
}

TEST(Simulate, ConcurrentQueriesMatchSerial) {
  auto actions = SampleActions(12, 99);
  std::vector<LatencyTrace> serial, parallel(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    serial.push_back(Simulate(SimulationParams::Original(), actions[i], Traffic(2), 10, i));
  }
  ParallelFor(actions.size(), [&](std::size_t i) {
    parallel[i] = Simulate(SimulationParams::Original(), actions[i], Traffic(2), 10, i);
  });
  for (std::size_t i = 0; i < actions.size(); ++i) {
    EXPECT_TRUE(SameTrace(serial[i], parallel[i])) << i;
  }
}

TEST(Simulate, HigherTrafficRaisesLatency) {
  RealTwin twin(RealTwin::DefaultHiddenParams(), RealTwin::kDefaultSigmaRes);
  auto t1 = CollectReference(twin, Traffic(1), kReference, 60, 3);
  auto t4 = CollectReference(twin, Traffic(4), kReference, 60, 3);
  EXPECT_GT(t4.MeanLatency(), t1.MeanLatency());
}

TEST(RealTwin, DefaultHiddenParams) {
  auto p = RealTwin::DefaultHiddenParams().ToArray();
  std::array<double, 7> expected = {38.76, 0.68, 8.93, 5.03, 8.93, 2.16, 3.10};
  for (std::size_t i = 0; i < 7; ++i) EXPECT_DOUBLE_EQ(p[i], expected[i]);
}

TEST(RealTwin, DegeneratesToSimulator) {
  RealTwin twin(SimulationParams::Original(), 0.0);
  SimulatorEnv sim(SimulationParams::Original());
  auto real = twin.Query(kReference, Traffic(1), 60, 11);
  auto simulated = sim.Query(kReference, Traffic(1), 60, 11);
  EXPECT_LE(KlDivergence(real, simulated), 1e-9);
}

TEST(RealTwin, ResidualNoiseIsMultiplicativeAndSeeded) {
  RealTwin noisy(SimulationParams::Original(), 0.05);
  RealTwin clean(SimulationParams::Original(), 0.0);
  auto a = noisy.Query(kReference, Traffic(1), 30, 2);
  auto b = noisy.Query(kReference, Traffic(1), 30, 2);
  EXPECT_TRUE(SameTrace(a, b));
  auto c = clean.Query(kReference, Traffic(1), 30, 2);
  ASSERT_EQ(a.frames.size(), c.frames.size());
  double log_sum = 0, log_sq = 0;
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    double r = std::log(a.frames[i].latency_ms / c.frames[i].latency_ms);
    log_sum += r;
    log_sq += r * r;
    EXPECT_NEAR(a.frames[i].latency_ms, a.frames[i].parts.Total(), 1e-9);
  }
  double n = static_cast<double>(a.frames.size());
  double mean = log_sum / n;
  double sd = std::sqrt(log_sq / n - mean * mean);
  EXPECT_NEAR(mean, 0.0, 4 * 0.05 / std::sqrt(n));
  EXPECT_NEAR(sd, 0.05, 0.01);
  EXPECT_THROW(RealTwin(SimulationParams::Original(), -0.1), RangeError);
}

TEST(RealTwin, DefaultTwinHasPositiveBaselineDiscrepancy) {
  RealTwin twin(RealTwin::DefaultHiddenParams(), RealTwin::kDefaultSigmaRes);
  SimulatorEnv sim(SimulationParams::Original());
  auto real = CollectReference(twin, Traffic(1), kReference, 60, 7);
  auto simulated = sim.Query(kReference, Traffic(1), 60, 8);
  EXPECT_GT(KlDivergence(real, simulated), 0.1);
}

TEST(TraceIo, RoundTrip) {
  RealTwin twin(RealTwin::DefaultHiddenParams(), RealTwin::kDefaultSigmaRes);
  auto a = CollectReference(twin, Traffic(2), kReference, 20, 4);
  auto b = CollectReference(twin, Traffic(2), kReference, 20, 4);
  EXPECT_TRUE(SameTrace(a, b));
  auto path = std::filesystem::temp_directory_path() / "slicetune_trace_roundtrip.csv";
  SaveTrace(path, a);
  auto back = LoadTrace(path);
  ASSERT_EQ(back.frames.size(), a.frames.size());
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    EXPECT_EQ(back.frames[i].frame_id, a.frames[i].frame_id);
    EXPECT_EQ(back.frames[i].latency_ms, a.frames[i].latency_ms);
    EXPECT_EQ(back.frames[i].parts.compute, a.frames[i].parts.compute);
  }
  std::filesystem::remove(path);
}

TEST(TraceIo, RejectsMalformedLine) {
  std::istringstream is("1, 2.0, 3.0\n");
  EXPECT_THROW(ReadTrace(is), FormatError);
}

TEST(ParamBox, NormalizationRoundTrip) {
  ParamBox box = ParamBox::Default();
  auto p = RealTwin::DefaultHiddenParams();
  EXPECT_TRUE(box.Contains(p));
  EXPECT_TRUE(box.Contains(SimulationParams::Original()));
  auto u = box.Normalize(p);
  for (double v : u) {
    EXPECT_GE(v, 0);
    EXPECT_LE(v, 1);
  }
  auto back = box.Denormalize(u).ToArray();
  auto orig = p.ToArray();
  for (std::size_t i = 0; i < orig.size(); ++i) EXPECT_NEAR(back[i], orig[i], 1e-12);
  SimulationParams outside = p;
  outside.baseline_loss_db = 60;
  EXPECT_FALSE(box.Contains(outside));
  EXPECT_THROW(box.Validate(outside), RangeError);
}

TEST(Sampling, UniformActionsInRangeAndGrid) {
  auto acts = SampleActions(500, 5);
  ASSERT_EQ(acts.size(), 500u);
  for (const auto& a : acts) EXPECT_TRUE(a.InRange());
  EXPECT_EQ(SampleActions(10, 5), SampleActions(10, 5));
  auto grid = GridActions();
  EXPECT_EQ(grid.size(), 4096u);
  for (const auto& a : grid) EXPECT_TRUE(a.InRange());
  std::sort(grid.begin(), grid.end(), [](const ConfigAction& x, const ConfigAction& y) {
    return x.ToArray() < y.ToArray();
  });
  EXPECT_EQ(std::adjacent_find(grid.begin(), grid.end()), grid.end());
}

}  // namespace
}  // namespace slicetune
