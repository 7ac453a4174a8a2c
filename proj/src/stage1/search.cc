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
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "slicetune/common/errors.h"
#include "slicetune/common/parallel.h"
#include "slicetune/common/rng.h"
#include "slicetune/metrics/objectives.h"

namespace slicetune {

namespace {

constexpr std::size_t kDim = SimulationParams::kDim;
using Unit = std::array<double, kDim>;

double Distance(const Unit& a, const Unit& b) {
  double s = 0;
  for (std::size_t i = 0; i < kDim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::vector<Unit> SampleUnitBall(const Unit& center, double radius, std::size_t n,
                                 std::uint64_t seed) {
  if (!(radius >= 0)) throw std::invalid_argument("candidate radius H must be >= 0");
  if (n < 1) throw std::invalid_argument("candidate count must be >= 1");
  if (radius == 0) return std::vector<Unit>(n, center);

  Unit lo{}, hi{};
  for (std::size_t i = 0; i < kDim; ++i) {
    lo[i] = std::max(0.0, center[i] - radius);
    hi[i] = std::min(1.0, center[i] + radius);
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Unit> out;
  out.reserve(n);
  std::uint64_t attempts = 0;
  while (out.size() < n) {
    Unit u;
    for (std::size_t i = 0; i < kDim; ++i) u[i] = lo[i] + (hi[i] - lo[i]) * uni(rng);
    ++attempts;
    if (Distance(u, center) <= radius) out.push_back(u);
    if (attempts >= 100000 && static_cast<double>(out.size()) < 1e-4 * attempts) {
      std::ostringstream os;
      os << "candidate acceptance rate " << static_cast<double>(out.size()) / attempts
         << " is below 1e-4 for H = " << radius << "; use a larger H";
      throw InfeasibleError(os.str());
    }
  }
  return out;
}

std::string DescribeParams(const SimulationParams& x) {
  std::ostringstream os;
  os << "[";
  auto v = x.ToArray();
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

double QueryKl(const Stage1Config& cfg, const LatencyTrace& reference,
               const SimulationParams& x, std::uint64_t seed) {
  try {
    LatencyTrace sim = Simulate(x, cfg.reference_action, cfg.state, cfg.duration_s, seed,
                                cfg.engine);
    return KlDivergence(reference, sim, cfg.kl);
  } catch (const RangeError& e) {
    throw RangeError(std::string(e.what()) + " (simulating x = " + DescribeParams(x) + ")");
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(e.what()) + " (simulating x = " +
                             DescribeParams(x) + ")");
  }
}

}  // namespace

int Stage1Config::EffectiveWarmup() const {
  return warmup >= 0 ? warmup : std::max(20, iterations / 10);
}

void Stage1Config::Validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("stage1: " + what); };
  if (iterations < 1) fail("iterations must be >= 1");
  if (parallel < 1) fail("parallel must be >= 1");
  if (candidates < 1) fail("candidates must be >= 1");
  if (EffectiveWarmup() < 1 || EffectiveWarmup() > iterations) {
    fail("warmup must be in [1, iterations]");
  }
  if (!(alpha >= 0)) fail("alpha must be >= 0");
  if (!(radius > 0)) fail("radius must be > 0");
  if (!(duration_s > 0)) fail("duration_s must be > 0");
  if (warmup_epochs < 1 || steps_per_query < 1) fail("training schedule must be >= 1");
  box.Validate(x_hat);
  reference_action.Validate();
  state.Validate();
}

std::vector<SimulationParams> SampleParamCandidates(const SimulationParams& x_hat,
                                                    double radius, std::size_t n,
                                                    std::uint64_t seed,
                                                    const ParamBox& box) {
  box.Validate(x_hat);
  auto units = SampleUnitBall(box.Normalize(x_hat), radius, n, seed);
  std::vector<SimulationParams> out;
  out.reserve(units.size());
  for (const auto& u : units) out.push_back(box.Denormalize(u));
  return out;
}

Stage1Result SearchParameters(const Stage1Config& cfg, const LatencyTrace& reference) {
  cfg.Validate();
  if (reference.frames.empty()) {
    throw std::invalid_argument("stage1: the reference trace is empty");
  }
  const int warmup = cfg.EffectiveWarmup();
  const Unit u_hat = cfg.box.Normalize(cfg.x_hat);
  const std::size_t threads = static_cast<std::size_t>(std::max(cfg.threads, 0));

  Stage1Result result;
  std::vector<Sample> data;
  double best_score = std::numeric_limits<double>::infinity();

  auto record = [&](std::int64_t iter, const Unit& u, double kl, std::uint64_t seed) {
    SimulationParams x = cfg.box.Denormalize(u);
    auto raw = x.ToArray();
    LedgerRow row;
    row.iter = iter;
    row.stage = 1;
    row.kind = "offline";
    row.x_or_a.assign(raw.begin(), raw.end());
    row.kl = kl;
    row.seed = seed;
    result.ledger.Append(std::move(row));
    data.push_back({std::vector<double>(u.begin(), u.end()), kl});
    double score = kl + cfg.alpha * Distance(u, u_hat);
    if (score < best_score) {
      best_score = score;
      result.best = x;
      result.best_kl = kl;
      result.best_weighted = score;
    }
    result.best_so_far.push_back(best_score);
  };

  auto run_queries = [&](std::int64_t iter_base, bool one_iter_per_query,
                         const std::vector<Unit>& xs) {
    std::vector<double> kls(xs.size());
    std::vector<std::uint64_t> seeds(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::uint64_t iter = one_iter_per_query ? iter_base + i : iter_base;
      std::uint64_t worker = one_iter_per_query ? 0 : i;
      seeds[i] = DeriveSeed(cfg.seed, Stage::kStage1, iter, worker, "query");
    }
    ParallelFor(
        xs.size(),
        [&](std::size_t i) { kls[i] = QueryKl(cfg, reference, cfg.box.Denormalize(xs[i]), seeds[i]); },
        threads);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      record(one_iter_per_query ? iter_base + static_cast<std::int64_t>(i) : iter_base, xs[i],
             kls[i], seeds[i]);
    }
  };

  // Purely random exploration.
  auto warm = SampleUnitBall(u_hat, cfg.radius, static_cast<std::size_t>(warmup),
                             DeriveSeed(cfg.seed, Stage::kStage1, 0, 0, "warmup"));
  run_queries(0, true, warm);

  BnnModel& bnn = result.surrogate;
  bnn = BnnModel(static_cast<int>(kDim), cfg.bnn,
                 DeriveSeed(cfg.seed, Stage::kStage1, 0, 0, "bnn-init"));
  bnn.Train(data, cfg.warmup_epochs, DeriveSeed(cfg.seed, Stage::kStage1, 0, 0, "bnn-train"));

  const std::size_t m = static_cast<std::size_t>(cfg.candidates);
  for (int round = warmup; round < cfg.iterations; ++round) {
    auto pick = [&](std::size_t worker, std::string_view purpose) {
      auto cands = SampleUnitBall(
          u_hat, cfg.radius, m,
          DeriveSeed(cfg.seed, Stage::kStage1, round, worker, "candidates"));
      Eigen::MatrixXd z(static_cast<Eigen::Index>(kDim), static_cast<Eigen::Index>(m));
      for (std::size_t j = 0; j < m; ++j) {
        z.col(j) = bnn.NormalizeInput(std::vector<double>(cands[j].begin(), cands[j].end()));
      }
      auto kl_hat = bnn.ThompsonPredictNormalized(
          z, DeriveSeed(cfg.seed, Stage::kStage1, round, worker, purpose));
      std::size_t best = 0;
      double best_val = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m; ++j) {
        double v = kl_hat[j] + cfg.alpha * Distance(cands[j], u_hat);
        if (v < best_val) {
          best_val = v;
          best = j;
        }
      }
      return cands[best];
    };

    const std::size_t p = static_cast<std::size_t>(cfg.parallel);
    std::vector<Unit> picks(p);
    ParallelFor(p, [&](std::size_t w) { picks[w] = pick(w, "thompson"); }, threads);
    for (std::size_t w = 1; w < p; ++w) {
      if (std::find(picks.begin(), picks.begin() + w, picks[w]) != picks.begin() + w) {
        picks[w] = pick(w, "thompson-redraw");
      }
    }
    run_queries(round, false, picks);

    bnn.TrainSteps(data, cfg.steps_per_query * cfg.parallel,
                   DeriveSeed(cfg.seed, Stage::kStage1, round, 0, "bnn-train"));
  }
  return result;
}

}  // namespace slicetune
