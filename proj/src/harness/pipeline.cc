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

#include "slicetune/harness/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "slicetune/common/errors.h"
#include "slicetune/common/rng.h"
#include "slicetune/harness/plot_data.h"
#include "slicetune/metrics/kl.h"
#include "slicetune/sim/environment.h"
#include "slicetune/sim/trace_io.h"

namespace slicetune {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int GetIntIn(const Config& c, std::string_view key, int fallback, int lo,
             int hi = std::numeric_limits<int>::max()) {
  std::int64_t v = c.GetInt(key, fallback);
  if (v < lo || v > hi) {
    auto it = c.entries().find(key);
    std::ostringstream os;
    os << c.source();
    if (it != c.entries().end() && it->second.line > 0) os << ":" << it->second.line;
    os << ": " << key << ": " << v << " is outside [" << lo << ", " << hi << "]";
    throw ConfigError(os.str());
  }
  return static_cast<int>(v);
}

template <std::size_t N>
std::array<double, N> GetArray(const Config& c, std::string_view key,
                               std::array<double, N> fallback) {
  if (!c.Has(key)) return fallback;
  auto v = c.GetDoubleList(key);
  if (v.size() != N) {
    auto it = c.entries().find(key);
    throw ConfigError(c.source() + ":" + std::to_string(it->second.line) + ": " +
                      std::string(key) + ": expected " + std::to_string(N) +
                      " values, got " + std::to_string(v.size()));
  }
  std::array<double, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

BnnConfig MakeBnnConfig(const Config& c) {
  BnnConfig b;
  if (c.Has("bnn.hidden")) {
    b.hidden.clear();
    for (double w : c.GetDoubleList("bnn.hidden")) {
      if (w < 1 || w != static_cast<int>(w)) {
        throw ConfigError(c.source() + ": bnn.hidden: widths must be positive integers");
      }
      b.hidden.push_back(static_cast<int>(w));
    }
  }
  b.prior_sigma = c.GetDouble("bnn.prior_sigma", b.prior_sigma);
  b.likelihood_sigma = c.GetDouble("bnn.likelihood_sigma", b.likelihood_sigma);
  b.init_sigma = c.GetDouble("bnn.init_sigma", b.init_sigma);
  b.kl_weight = c.GetDouble("bnn.kl_weight", b.kl_weight);
  std::string opt = c.GetString("bnn.optimizer", "adadelta");
  if (opt == "adadelta") {
    b.optimizer = BnnOptimizer::kAdadelta;
  } else if (opt == "adam") {
    b.optimizer = BnnOptimizer::kAdam;
  } else {
    throw ConfigError(c.source() + ": bnn.optimizer: expected adadelta or adam, got '" +
                      opt + "'");
  }
  b.learning_rate = c.GetDouble("bnn.learning_rate", b.learning_rate);
  b.lr_decay = c.GetDouble("bnn.lr_decay", b.lr_decay);
  b.batch_size = GetIntIn(c, "bnn.batch_size", b.batch_size, 1);
  if (!(b.prior_sigma > 0) || !(b.likelihood_sigma > 0) || !(b.init_sigma > 0) ||
      !(b.kl_weight >= 0) || !(b.learning_rate > 0) || !(b.lr_decay > 0 && b.lr_decay <= 1)) {
    throw ConfigError(c.source() + ": bnn: scales and rates must be positive, lr_decay in (0, 1]");
  }
  return b;
}

void WriteFileAtomic(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw FormatError("cannot open " + tmp.string() + " for writing");
    os << text;
  }
  fs::rename(tmp, path);
}

json ReadJson(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw FormatError("malformed " + path.string() + ": " + e.what());
  }
}

template <std::size_t N>
std::vector<double> ToVec(const std::array<double, N>& a) {
  return {a.begin(), a.end()};
}

template <std::size_t N>
std::array<double, N> FromVec(const std::vector<double>& v, const fs::path& where) {
  if (v.size() != N) {
    throw FormatError(where.string() + ": expected " + std::to_string(N) + " values");
  }
  std::array<double, N> a{};
  std::copy(v.begin(), v.end(), a.begin());
  return a;
}

void SaveRows(const fs::path& path, const std::vector<LedgerRow>& rows) {
  fs::create_directories(path.parent_path());
  SaveLedger(path, rows);
}

RealTwin MakeTwin(const RunConfig& cfg) { return RealTwin(cfg.twin_params, cfg.sigma_res); }

}  // namespace

void RunConfig::SetSeed(std::uint64_t s) {
  seed = s;
  stage1.seed = s;
  stage2.seed = s;
  stage3.seed = s;
  baseline.seed = s;
  oracle.seed = s;
}

const std::vector<std::string_view>& KnownConfigKeys() {
  static const std::vector<std::string_view> keys = {
      "run.seed", "run.threads", "run.duration_s", "run.baselines",
      "twin.params", "twin.sigma_res",
      "objective.requirement", "objective.threshold_ms", "objective.max_threshold_ms",
      "objective.step",
      "stage1.iterations", "stage1.parallel", "stage1.warmup", "stage1.candidates",
      "stage1.alpha", "stage1.radius", "stage1.x_hat", "stage1.reference_action",
      "stage1.traffic", "stage1.warmup_epochs", "stage1.steps_per_query",
      "stage2.iterations", "stage2.parallel", "stage2.warmup", "stage2.candidates",
      "stage2.traffic_levels", "stage2.incumbent_traffic", "stage2.warmup_epochs",
      "stage2.steps_per_query",
      "stage3.iterations", "stage3.inner_rounds", "stage3.candidates", "stage3.rho",
      "stage3.clip", "stage3.kappa_min", "stage3.n_mc", "stage3.traffic",
      "stage3.gp_lengthscale", "stage3.gp_signal_var", "stage3.gp_noise_var",
      "stage3.gp_scale_floor",
      "baseline.iterations", "baseline.candidates", "baseline.ucb_delta",
      "oracle.levels",
      "bnn.hidden", "bnn.prior_sigma", "bnn.likelihood_sigma", "bnn.init_sigma",
      "bnn.kl_weight", "bnn.optimizer", "bnn.learning_rate", "bnn.lr_decay",
      "bnn.batch_size",
  };
  return keys;
}

const std::vector<std::string_view>& RequiredConfigKeys() {
  static const std::vector<std::string_view> keys = {"run.seed", "twin.sigma_res",
                                                     "twin.params"};
  return keys;
}

RunConfig MakeRunConfig(const Config& in) {
  Config c = in;
  c.CheckKnown(KnownConfigKeys());
  c.CheckRequired(RequiredConfigKeys());
  if (const char* env = std::getenv("ATLAS_SEED"); env != nullptr && *env != '\0') {
    c.Set("run.seed", env);
    try {
      (void)c.GetUint("run.seed");
    } catch (const ConfigError&) {
      throw ConfigError(std::string("ATLAS_SEED: expected a non-negative integer, got '") +
                        env + "'");
    }
  }

  RunConfig r;
  r.source = c;
  r.threads = GetIntIn(c, "run.threads", 0, 0);
  r.twin_params = SimulationParams::FromArray(
      GetArray<SimulationParams::kDim>(c, "twin.params", {}));
  for (double v : r.twin_params.ToArray()) {
    if (!std::isfinite(v)) throw ConfigError(c.source() + ": twin.params: values must be finite");
  }
  r.sigma_res = c.GetDouble("twin.sigma_res");
  if (!(r.sigma_res >= 0) || !std::isfinite(r.sigma_res)) {
    throw ConfigError(c.source() + ": twin.sigma_res: must be finite and >= 0");
  }
  const double duration = c.GetDouble("run.duration_s", 60.0);
  if (!(duration > 0)) throw ConfigError(c.source() + ": run.duration_s: must be > 0");
  const double e = c.GetDouble("objective.requirement", 0.9);
  const double y = c.GetDouble("objective.threshold_ms", 300.0);
  const double ymax = c.GetDouble("objective.max_threshold_ms", 1000.0);
  const double step = c.GetDouble("objective.step", 0.1);
  const BnnConfig bnn = MakeBnnConfig(c);

  auto& s1 = r.stage1;
  s1.iterations = GetIntIn(c, "stage1.iterations", s1.iterations, 1);
  s1.parallel = GetIntIn(c, "stage1.parallel", s1.parallel, 1);
  s1.warmup = GetIntIn(c, "stage1.warmup", s1.warmup, -1);
  s1.candidates = GetIntIn(c, "stage1.candidates", s1.candidates, 1);
  s1.alpha = c.GetDouble("stage1.alpha", s1.alpha);
  s1.radius = c.GetDouble("stage1.radius", s1.radius);
  s1.x_hat = SimulationParams::FromArray(
      GetArray<SimulationParams::kDim>(c, "stage1.x_hat", s1.x_hat.ToArray()));
  s1.reference_action = ConfigAction::FromArray(GetArray<ConfigAction::kDim>(
      c, "stage1.reference_action", s1.reference_action.ToArray()));
  s1.state.traffic = GetIntIn(c, "stage1.traffic", 1, 1, NetworkState::kMaxTraffic);
  s1.warmup_epochs = GetIntIn(c, "stage1.warmup_epochs", s1.warmup_epochs, 1);
  s1.steps_per_query = GetIntIn(c, "stage1.steps_per_query", s1.steps_per_query, 0);
  s1.duration_s = duration;
  s1.bnn = bnn;
  s1.threads = r.threads;

  auto& s2 = r.stage2;
  s2.iterations = GetIntIn(c, "stage2.iterations", s2.iterations, 1);
  s2.parallel = GetIntIn(c, "stage2.parallel", s2.parallel, 1);
  s2.warmup = GetIntIn(c, "stage2.warmup", s2.warmup, 1);
  s2.candidates = GetIntIn(c, "stage2.candidates", s2.candidates, 1);
  if (c.Has("stage2.traffic_levels")) {
    s2.traffic_levels.clear();
    for (double t : c.GetDoubleList("stage2.traffic_levels")) {
      s2.traffic_levels.push_back(static_cast<int>(t));
    }
  }
  s2.incumbent_traffic =
      GetIntIn(c, "stage2.incumbent_traffic", s2.incumbent_traffic, 1, NetworkState::kMaxTraffic);
  s2.warmup_epochs = GetIntIn(c, "stage2.warmup_epochs", s2.warmup_epochs, 1);
  s2.steps_per_query = GetIntIn(c, "stage2.steps_per_query", s2.steps_per_query, 0);
  s2.requirement = e;
  s2.threshold_ms = y;
  s2.max_threshold_ms = ymax;
  s2.step = step;
  s2.duration_s = duration;
  s2.bnn = bnn;
  s2.threads = r.threads;

  auto& s3 = r.stage3;
  s3.iterations = GetIntIn(c, "stage3.iterations", s3.iterations, 1);
  s3.inner_rounds = GetIntIn(c, "stage3.inner_rounds", s3.inner_rounds, 1);
  s3.candidates = GetIntIn(c, "stage3.candidates", s3.candidates, 1);
  s3.rho = c.GetDouble("stage3.rho", s3.rho);
  s3.clip = c.GetDouble("stage3.clip", s3.clip);
  s3.kappa_min = c.GetDouble("stage3.kappa_min", s3.kappa_min);
  s3.n_mc = GetIntIn(c, "stage3.n_mc", s3.n_mc, 2);
  s3.traffic = GetIntIn(c, "stage3.traffic", s3.traffic, 1, NetworkState::kMaxTraffic);
  s3.gp.lengthscale = c.GetDouble("stage3.gp_lengthscale", s3.gp.lengthscale);
  s3.gp.signal_var = c.GetDouble("stage3.gp_signal_var", s3.gp.signal_var);
  s3.gp.noise_var = c.GetDouble("stage3.gp_noise_var", s3.gp.noise_var);
  s3.gp.target_scale_floor = c.GetDouble("stage3.gp_scale_floor", s3.gp.target_scale_floor);
  s3.requirement = e;
  s3.threshold_ms = y;
  s3.max_threshold_ms = ymax;
  s3.step = step;
  s3.duration_s = duration;
  s3.threads = r.threads;

  auto& b = r.baseline;
  b.iterations = GetIntIn(c, "baseline.iterations", s3.iterations, 1);
  b.candidates = GetIntIn(c, "baseline.candidates", s3.candidates, 1);
  b.ucb_delta = c.GetDouble("baseline.ucb_delta", b.ucb_delta);
  b.requirement = e;
  b.threshold_ms = y;
  b.max_threshold_ms = ymax;
  b.step = step;
  b.traffic = s3.traffic;
  b.duration_s = duration;
  b.gp = s3.gp;

  auto& o = r.oracle;
  o.levels = c.GetDoubleList("oracle.levels", o.levels);
  for (double l : o.levels) {
    if (!(l >= 0 && l <= 1)) throw ConfigError(c.source() + ": oracle.levels: values must be in [0, 1]");
  }
  o.requirement = e;
  o.threshold_ms = y;
  o.duration_s = duration;
  o.state.traffic = s3.traffic;
  o.threads = r.threads;

  r.baselines = c.GetStringList("run.baselines", r.baselines);
  for (const auto& m : r.baselines) {
    if (m != "gp-ei" && m != "gp-ucb" && m != "offline-filter") {
      throw ConfigError(c.source() + ": run.baselines: unknown method '" + m + "'");
    }
  }

  r.SetSeed(c.GetUint("run.seed"));
  try {
    s1.Validate();
    s2.Validate();
    s3.Validate();
    b.Validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
  if (std::find(s2.traffic_levels.begin(), s2.traffic_levels.end(), s3.traffic) ==
      s2.traffic_levels.end()) {
    throw ConfigError(c.source() + ": stage3.traffic: level " + std::to_string(s3.traffic) +
                      " is not among stage2.traffic_levels");
  }
  return r;
}

RunConfig LoadRunConfig(const fs::path& path) { return MakeRunConfig(Config::Load(path)); }

Stage1Artifacts RunStage1(const RunConfig& cfg, const fs::path& run_dir) {
  RealTwin twin = MakeTwin(cfg);
  const auto& c1 = cfg.stage1;
  LatencyTrace reference =
      CollectReference(twin, c1.state, c1.reference_action, c1.duration_s,
                       DeriveSeed(cfg.seed, Stage::kReference, 0, 0, "reference"));
  fs::create_directories(run_dir / "stage1");
  SaveTrace(run_dir / "reference_trace.csv", reference);

  LatencyTrace original = Simulate(c1.x_hat, c1.reference_action, c1.state, c1.duration_s,
                                   DeriveSeed(cfg.seed, Stage::kStage1, 0, 0, "d0"), c1.engine);
  Stage1Artifacts out;
  out.d0 = KlDivergence(reference, original, c1.kl);

  Stage1Result r = SearchParameters(c1, reference);
  out.best = r.best;
  out.best_kl = r.best_kl;
  out.best_weighted = r.best_weighted;
  SaveRows(run_dir / "stage1" / "ledger.jsonl", r.ledger.rows());
  r.surrogate.Save(run_dir / "stage1" / "bnn.ckpt");
  json j;
  j["params"] = ToVec(out.best.ToArray());
  j["kl"] = out.best_kl;
  j["weighted"] = out.best_weighted;
  j["d0"] = out.d0;
  WriteFileAtomic(run_dir / "stage1" / "best_params.json", j.dump(1) + "\n");
  return out;
}

Stage1Artifacts LoadStage1(const fs::path& run_dir) {
  fs::path p = run_dir / "stage1" / "best_params.json";
  json j = ReadJson(p);
  Stage1Artifacts out;
  try {
    out.best = SimulationParams::FromArray(
        FromVec<SimulationParams::kDim>(j.at("params").get<std::vector<double>>(), p));
    out.best_kl = j.at("kl").get<double>();
    out.best_weighted = j.at("weighted").get<double>();
    out.d0 = j.at("d0").get<double>();
  } catch (const json::exception& e) {
    throw FormatError("malformed " + p.string() + ": " + e.what());
  }
  return out;
}

Stage2Artifacts RunStage2(const RunConfig& cfg, const Stage1Artifacts& s1,
                          const fs::path& run_dir) {
  SimulatorEnv sim(s1.best);
  Stage2Result r = OfflineTrain(cfg.stage2, sim);
  fs::create_directories(run_dir / "stage2");
  SaveRows(run_dir / "stage2" / "ledger.jsonl", r.ledger.rows());
  r.policy.Save(run_dir / "stage2" / "policy.ckpt");
  json j;
  j["action"] = ToVec(r.best_action.ToArray());
  j["usage"] = r.best_usage;
  j["qoe"] = r.best_qoe;
  j["lambda_final"] = r.lambda_final;
  json per = json::object();
  for (const auto& [t, lam] : r.lambda_by_traffic) per[std::to_string(t)] = lam;
  j["lambda_by_traffic"] = per;
  WriteFileAtomic(run_dir / "stage2" / "best_action.json", j.dump(1) + "\n");

  Stage2Artifacts out;
  out.best_action = r.best_action;
  out.best_usage = r.best_usage;
  out.best_qoe = r.best_qoe;
  out.lambda_final = r.lambda_final;
  out.lambda_by_traffic = r.lambda_by_traffic;
  out.policy = std::move(r.policy);
  return out;
}

Stage2Artifacts LoadStage2(const fs::path& run_dir) {
  fs::path p = run_dir / "stage2" / "best_action.json";
  json j = ReadJson(p);
  Stage2Artifacts out;
  try {
    out.best_action = ConfigAction::FromArray(
        FromVec<ConfigAction::kDim>(j.at("action").get<std::vector<double>>(), p));
    out.best_usage = j.at("usage").get<double>();
    out.best_qoe = j.at("qoe").get<double>();
    out.lambda_final = j.at("lambda_final").get<double>();
    for (const auto& [k, v] : j.at("lambda_by_traffic").items()) {
      out.lambda_by_traffic[std::stoi(k)] = v.get<double>();
    }
  } catch (const json::exception& e) {
    throw FormatError("malformed " + p.string() + ": " + e.what());
  } catch (const std::logic_error& e) {
    throw FormatError("malformed " + p.string() + ": bad traffic key");
  }
  out.policy = BnnModel::Load(run_dir / "stage2" / "policy.ckpt");
  return out;
}

ReferenceOptimum RunOracleStage(const RunConfig& cfg, const fs::path& run_dir) {
  RealTwin twin = MakeTwin(cfg);
  OracleResult r = GridOracle(twin, cfg.oracle);
  fs::create_directories(run_dir / "oracle");
  SaveOracle(run_dir / "oracle" / "oracle.json", r.best);
  return r.best;
}

ReferenceOptimum EnsureOracle(const RunConfig& cfg, const fs::path& run_dir) {
  fs::path p = run_dir / "oracle" / "oracle.json";
  if (fs::exists(p)) return LoadOracle(p);
  return RunOracleStage(cfg, run_dir);
}

Stage3Artifacts RunStage3(const RunConfig& cfg, const Stage1Artifacts& s1,
                          const Stage2Artifacts& s2, const ReferenceOptimum& ref,
                          const fs::path& run_dir) {
  RealTwin twin = MakeTwin(cfg);
  SimulatorEnv sim(s1.best);
  auto lam = s2.lambda_by_traffic.find(cfg.stage3.traffic);
  if (lam == s2.lambda_by_traffic.end()) {
    throw ConfigError("stage3.traffic " + std::to_string(cfg.stage3.traffic) +
                      " was not trained in stage 2");
  }
  Stage3Inputs in{&s2.policy, s2.best_action, lam->second, ref};

  fs::path dir = run_dir / "stage3";
  fs::create_directories(dir);
  fs::path ledger_path = dir / "ledger.jsonl";
  std::ofstream ledger(ledger_path, std::ios::binary | std::ios::trunc);
  if (!ledger) throw FormatError("cannot open " + ledger_path.string() + " for writing");
  RowSink sink = [&ledger](const LedgerRow& row) {
    ledger << SerializeRow(row) << "\n";
    ledger.flush();
  };
  Stage3Result r = OnlineLearn(cfg.stage3, in, twin, sim, sink);
  ledger.close();
  r.state.gp.Save(dir / "gp.json");

  Stage3Artifacts out;
  out.avg_usage_regret = r.state.ledger.AverageUsageRegret();
  out.avg_qoe_regret = r.state.ledger.AverageQoeRegret();
  out.lambda_final = r.state.lambda;
  json j;
  j["avg_usage_regret"] = out.avg_usage_regret;
  j["avg_qoe_regret"] = out.avg_qoe_regret;
  j["lambda_final"] = out.lambda_final;
  j["lambda0"] = in.lambda0;
  WriteFileAtomic(dir / "summary.json", j.dump(1) + "\n");
  return out;
}

BaselineResult RunBaselineStage(const RunConfig& cfg, const std::string& method,
                                const Stage2Artifacts* s2, const ReferenceOptimum& ref,
                                const fs::path& run_dir) {
  RealTwin twin = MakeTwin(cfg);
  BaselineResult r;
  if (method == "gp-ei") {
    r = RunGpEi(twin, cfg.baseline, ref);
  } else if (method == "gp-ucb") {
    r = RunGpUcb(twin, cfg.baseline, ref);
  } else if (method == "offline-filter") {
    if (s2 == nullptr) throw ConfigError("offline-filter baseline needs stage-2 outputs");
    r = RunOfflineFilter(twin, cfg.baseline, ref, s2->policy);
  } else {
    throw ConfigError("unknown baseline method '" + method + "'");
  }
  SaveRows(run_dir / "baselines" / method / "ledger.jsonl", r.ledger.rows());
  return r;
}

void RunPipeline(const RunConfig& cfg, const fs::path& run_dir, const PipelineOptions& opts) {
  for (int s : opts.stages) {
    if (s < 1 || s > 3) throw ConfigError("stages must be drawn from 1,2,3");
  }
  fs::create_directories(run_dir);
  {
    std::ostringstream os;
    cfg.source.Write(os);
    WriteFileAtomic(run_dir / "config.txt", os.str());
  }
  const fs::path from = opts.params_from.value_or(run_dir);
  auto wants = [&](int s, const fs::path& marker) {
    return opts.stages.count(s) > 0 && !(opts.resume && fs::exists(marker));
  };

  Stage1Artifacts s1;
  if (wants(1, run_dir / "stage1" / "best_params.json")) {
    s1 = RunStage1(cfg, run_dir);
  } else {
    s1 = LoadStage1(opts.stages.count(1) ? run_dir : from);
  }

  std::optional<Stage2Artifacts> s2;
  if (wants(2, run_dir / "stage2" / "best_action.json")) {
    s2 = RunStage2(cfg, s1, run_dir);
  } else if (opts.stages.count(2) || opts.stages.count(3)) {
    s2 = LoadStage2(opts.stages.count(2) ? run_dir : from);
  }

  if (opts.stages.count(3)) {
    ReferenceOptimum ref = EnsureOracle(cfg, run_dir);
    if (wants(3, run_dir / "stage3" / "summary.json")) RunStage3(cfg, s1, *s2, ref, run_dir);
    if (opts.baselines) {
      for (const auto& m : cfg.baselines) {
        if (opts.resume && fs::exists(run_dir / "baselines" / m / "ledger.jsonl")) continue;
        RunBaselineStage(cfg, m, &*s2, ref, run_dir);
      }
    }
  }
  EmitPlotData(run_dir);
}

}  // namespace slicetune
