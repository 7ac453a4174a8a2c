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

#include "slicetune/baselines/baselines.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "slicetune/common/errors.h"
#include "slicetune/common/rng.h"
#include "slicetune/metrics/objectives.h"
#include "slicetune/sim/sampling.h"
#include "slicetune/stage2/offline.h"
#include "slicetune/stage3/online.h"

namespace slicetune {

namespace {

double NormalPdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2 * std::numbers::pi); }
double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double MeasureQoe(const Environment& env, const ConfigAction& a, const BaselineConfig& cfg,
                  std::uint64_t seed) {
  NetworkState state;
  state.traffic = cfg.traffic;
  LatencyTrace trace = env.Query(a, state, cfg.duration_s, seed);
  return trace.frames.empty() ? 0.0 : Qoe(trace, cfg.threshold_ms);
}

void AppendOnline(BaselineResult& out, std::int64_t iter, const ConfigAction& a, double qoe,
                  std::optional<double> lambda, std::optional<double> beta, std::uint64_t seed, int traffic) {
  auto raw = a.ToArray();
  LedgerRow row;
  row.iter = iter;
  row.stage = 3;
  row.kind = "online";
  row.x_or_a.assign(raw.begin(), raw.end());
  row.usage = ResourceUsage(a);
  row.qoe = qoe;
  row.lambda = lambda;
  row.beta = beta;
  row.seed = seed;
  row.traffic = traffic;
  out.ledger.Append(row);
  out.ledger.UpdateRegret(*row.usage, qoe);
}

ConfigAction FirstAction(const BaselineConfig& cfg) {
  if (cfg.first_action) return *cfg.first_action;
  return SampleActions(1, DeriveSeed(cfg.seed, Stage::kBaseline, 0, 0, "first-action"))
      .front();
}

BaselineResult RunGpOnline(const Environment& env, const BaselineConfig& cfg,
                           const ReferenceOptimum& reference, Acquisition acq) {
  cfg.Validate();
  BaselineResult out;
  out.ledger.SetReference(reference);
  auto pool = SampleActions(static_cast<std::size_t>(cfg.candidates),
                            DeriveSeed(cfg.seed, Stage::kBaseline, 0, 0, "pool"));
  const std::size_t m = pool.size();
  Eigen::MatrixXd inputs(1 + ConfigAction::kDim, static_cast<Eigen::Index>(m));
  std::vector<double> usage(m);
  for (std::size_t j = 0; j < m; ++j) {
    auto x = EncodeResidualInput(cfg.traffic, pool[j]);
    for (std::size_t i = 0; i < x.size(); ++i) inputs(i, j) = x[i];
    usage[j] = ResourceUsage(pool[j]);
  }

  GpModel gp(cfg.gp);
  std::vector<std::vector<double>> xs;
  std::vector<double> qs;
  std::vector<double> us;
  double lambda = 0;

  for (int t = 0; t < cfg.iterations; ++t) {
    ConfigAction action;
    std::optional<double> beta;
    if (t == 0) {
      action = FirstAction(cfg);
    } else {
      auto pred = gp.PredictBatch(inputs);
      std::size_t best = 0;
      if (acq == Acquisition::kEi) {
        double incumbent = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < qs.size(); ++i) {
          incumbent = std::min(incumbent, Lagrangian(us[i], qs[i], lambda, cfg.requirement));
        }
        double best_ei = -1;
        double best_mean = std::numeric_limits<double>::infinity();
        std::size_t best_mean_idx = 0;
        for (std::size_t j = 0; j < m; ++j) {
          double mu = Lagrangian(usage[j], pred[j].mean, lambda, cfg.requirement);
          double ei = ExpectedImprovement(mu, lambda * pred[j].std, incumbent);
          if (ei > best_ei) {
            best_ei = ei;
            best = j;
          }
          if (mu < best_mean) {
            best_mean = mu;
            best_mean_idx = j;
          }
        }
        if (!(best_ei > 0)) best = best_mean_idx;
      } else {
        beta = GpUcbBeta(t, cfg.ucb_delta);
        double best_val = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
          double q = pred[j].mean + std::sqrt(*beta) * pred[j].std;
          double v = Lagrangian(usage[j], q, lambda, cfg.requirement);
          if (v < best_val) {
            best_val = v;
            best = j;
          }
        }
      }
      action = pool[best];
    }
    std::uint64_t seed = DeriveSeed(cfg.seed, Stage::kBaseline, t, 0, "query");
    double q = MeasureQoe(env, action, cfg, seed);
    xs.push_back(EncodeResidualInput(cfg.traffic, action));
    qs.push_back(q);
    us.push_back(ResourceUsage(action));
    gp.Fit(xs, qs);
    lambda = DualUpdate(lambda, q, cfg.requirement, cfg.step);
    AppendOnline(out, t, action, q, lambda, beta, seed, cfg.traffic);
  }
  out.lambda_final = lambda;
  return out;
}

}  // namespace

double ExpectedImprovement(double mean, double std, double best) {
  double gain = best - mean;
  if (!(std > 0)) return std::max(gain, 0.0);
  double z = gain / std;
  return gain * NormalCdf(z) + std * NormalPdf(z);
}

double GpUcbBeta(int n, double delta) {
  if (n < 1) throw std::invalid_argument("GP-UCB iteration must be >= 1");
  if (!(delta > 0 && delta < 1)) throw std::invalid_argument("GP-UCB delta must be in (0, 1)");
  double nn = static_cast<double>(n);
  return 2.0 * std::log(nn * nn * std::numbers::pi * std::numbers::pi / (6.0 * delta));
}

std::size_t PickMinUsageFeasible(const std::vector<double>& usage,
                                 const std::vector<double>& predicted_qoe,
                                 double requirement) {
  if (usage.empty() || usage.size() != predicted_qoe.size()) {
    throw std::invalid_argument("PickMinUsageFeasible: mismatched or empty inputs");
  }
  std::ptrdiff_t best = -1;
  std::size_t best_q = 0;
  for (std::size_t j = 0; j < usage.size(); ++j) {
    if (predicted_qoe[j] > predicted_qoe[best_q]) best_q = j;
    if (predicted_qoe[j] >= requirement && (best < 0 || usage[j] < usage[best])) {
      best = static_cast<std::ptrdiff_t>(j);
    }
  }
  return best >= 0 ? static_cast<std::size_t>(best) : best_q;
}

GpMinimizeResult GpMinimize(const std::function<double(const std::vector<double>&)>& f,
                            int dim, int iterations, int candidates, Acquisition acq,
                            std::uint64_t seed, GpHyper hyper) {
  if (dim < 1 || iterations < 1 || candidates < 1) {
    throw std::invalid_argument("GpMinimize: dim, iterations and candidates must be >= 1");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  GpModel gp(hyper);
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  GpMinimizeResult out;
  out.best_f = std::numeric_limits<double>::infinity();
  for (int t = 0; t < iterations; ++t) {
    std::vector<double> x(dim);
    if (t == 0) {
      for (auto& v : x) v = uni(rng);
    } else {
      Eigen::MatrixXd cand(dim, candidates);
      for (Eigen::Index j = 0; j < candidates; ++j) {
        for (int i = 0; i < dim; ++i) cand(i, j) = uni(rng);
      }
      auto pred = gp.PredictBatch(cand);
      Eigen::Index best = 0;
      double best_val = -std::numeric_limits<double>::infinity();
      double beta = acq == Acquisition::kUcb ? GpUcbBeta(t) : 0.0;
      for (Eigen::Index j = 0; j < candidates; ++j) {
        double v = acq == Acquisition::kEi
                       ? ExpectedImprovement(pred[j].mean, pred[j].std, out.best_f)
                       : -(pred[j].mean - std::sqrt(beta) * pred[j].std);
        if (v > best_val) {
          best_val = v;
          best = j;
        }
      }
      for (int i = 0; i < dim; ++i) x[i] = cand(i, best);
    }
    double y = f(x);
    out.history.push_back(y);
    if (y < out.best_f) {
      out.best_f = y;
      out.best_x = x;
    }
    xs.push_back(x);
    ys.push_back(y);
    gp.Fit(xs, ys);
  }
  return out;
}

void BaselineConfig::Validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("baseline: " + what); };
  if (iterations < 1 || candidates < 1) fail("iterations and candidates must be >= 1");
  if (!(requirement >= 0 && requirement <= 1)) fail("requirement must be in [0, 1]");
  if (!(threshold_ms > 0)) fail("threshold_ms must be > 0");
  if (!(step > 0)) fail("step must be > 0");
  if (traffic < 1 || traffic > NetworkState::kMaxTraffic) fail("traffic must be in [1, 4]");
  if (!(duration_s > 0)) fail("duration_s must be > 0");
  if (first_action) first_action->Validate();
}

BaselineResult RunGpEi(const Environment& env, const BaselineConfig& cfg,
                       const ReferenceOptimum& reference) {
  return RunGpOnline(env, cfg, reference, Acquisition::kEi);
}

BaselineResult RunGpUcb(const Environment& env, const BaselineConfig& cfg,
                        const ReferenceOptimum& reference) {
  return RunGpOnline(env, cfg, reference, Acquisition::kUcb);
}

BaselineResult RunOfflineFilter(const Environment& env, const BaselineConfig& cfg,
                                const ReferenceOptimum& reference, const BnnModel& policy) {
  cfg.Validate();
  BaselineResult out;
  out.ledger.SetReference(reference);
  auto pool = SampleActions(static_cast<std::size_t>(cfg.candidates),
                            DeriveSeed(cfg.seed, Stage::kBaseline, 0, 0, "pool"));
  std::vector<std::vector<double>> inputs;
  std::vector<double> usage;
  for (const auto& a : pool) {
    inputs.push_back(EncodePolicyInput(cfg.traffic, cfg.threshold_ms, cfg.max_threshold_ms, a));
    usage.push_back(ResourceUsage(a));
  }
  const std::vector<double> q_mean = policy.PredictMeanBatch(inputs);
  double residual_sum = 0;
  std::vector<double> predicted(pool.size());
  for (int t = 0; t < cfg.iterations; ++t) {
    double correction = t == 0 ? 0.0 : residual_sum / t;
    for (std::size_t j = 0; j < pool.size(); ++j) predicted[j] = q_mean[j] + correction;
    std::size_t pick = PickMinUsageFeasible(usage, predicted, cfg.requirement);
    std::uint64_t seed = DeriveSeed(cfg.seed, Stage::kBaseline, t, 0, "query");
    double q = MeasureQoe(env, pool[pick], cfg, seed);
    residual_sum += q - q_mean[pick];
    AppendOnline(out, t, pool[pick], q, std::nullopt, std::nullopt, seed, cfg.traffic);
  }
  return out;
}

}  // namespace slicetune
