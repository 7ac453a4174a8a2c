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

#ifndef SLICETUNE_HARNESS_PIPELINE_H_
#define SLICETUNE_HARNESS_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "slicetune/baselines/baselines.h"
#include "slicetune/bnn/bnn.h"
#include "slicetune/harness/config.h"
#include "slicetune/harness/oracle.h"
#include "slicetune/metrics/ledger.h"
#include "slicetune/sim/types.h"
#include "slicetune/stage1/search.h"
#include "slicetune/stage2/offline.h"
#include "slicetune/stage3/online.h"

namespace slicetune {

// Everything a run needs, resolved from a Config. The run seed is copied into
// every stage config.
struct RunConfig {
  std::uint64_t seed = 1;
  int threads = 0;
  SimulationParams twin_params;
  double sigma_res = 0.05;
  Stage1Config stage1;
  Stage2Config stage2;
  Stage3Config stage3;
  BaselineConfig baseline;
  OracleConfig oracle;
  std::vector<std::string> baselines = {"gp-ei", "gp-ucb", "offline-filter"};
  Config source;

  void SetSeed(std::uint64_t s);
};

// Keys accepted in a run config file; run.seed, twin.sigma_res and
// twin.params are required.
const std::vector<std::string_view>& KnownConfigKeys();
const std::vector<std::string_view>& RequiredConfigKeys();

// Validates the keys and builds the run config. The ATLAS_SEED environment
// variable, when set, replaces run.seed. Throws ConfigError.
RunConfig MakeRunConfig(const Config& cfg);
RunConfig LoadRunConfig(const std::filesystem::path& path);

// Stage artifacts as persisted under a run directory:
//   config.txt, reference_trace.csv
//   stage1/{ledger.jsonl, best_params.json, bnn.ckpt}
//   stage2/{ledger.jsonl, policy.ckpt, best_action.json}
//   oracle/oracle.json
//   stage3/{ledger.jsonl, gp.json}
//   baselines/<method>/ledger.jsonl
//   plots/*.csv
struct Stage1Artifacts {
  SimulationParams best;
  double best_kl = 0;
  double best_weighted = 0;
  double d0 = 0;  // KL of the unsearched simulator against the reference
};

struct Stage2Artifacts {
  ConfigAction best_action;
  double best_usage = 0;
  double best_qoe = 0;
  double lambda_final = 0;
  std::map<int, double> lambda_by_traffic;
  BnnModel policy;
};

struct Stage3Artifacts {
  double avg_usage_regret = 0;
  double avg_qoe_regret = 0;
  double lambda_final = 0;
};

Stage1Artifacts RunStage1(const RunConfig& cfg, const std::filesystem::path& run_dir);
Stage1Artifacts LoadStage1(const std::filesystem::path& run_dir);

Stage2Artifacts RunStage2(const RunConfig& cfg, const Stage1Artifacts& s1,
                          const std::filesystem::path& run_dir);
Stage2Artifacts LoadStage2(const std::filesystem::path& run_dir);

ReferenceOptimum RunOracleStage(const RunConfig& cfg, const std::filesystem::path& run_dir);
// Reuses oracle/oracle.json when present, otherwise runs the grid oracle.
ReferenceOptimum EnsureOracle(const RunConfig& cfg, const std::filesystem::path& run_dir);

// Online learning against the twin. Ledger rows are flushed to
// stage3/ledger.jsonl as they are produced.
Stage3Artifacts RunStage3(const RunConfig& cfg, const Stage1Artifacts& s1,
                          const Stage2Artifacts& s2, const ReferenceOptimum& ref,
                          const std::filesystem::path& run_dir);

// method: gp-ei | gp-ucb | offline-filter. The offline filter needs `s2`.
BaselineResult RunBaselineStage(const RunConfig& cfg, const std::string& method,
                                const Stage2Artifacts* s2, const ReferenceOptimum& ref,
                                const std::filesystem::path& run_dir);

struct PipelineOptions {
  std::set<int> stages = {1, 2, 3};
  // Where to read stage-1 (and stage-2) outputs from when those stages are
  // not run; defaults to the run directory itself.
  std::optional<std::filesystem::path> params_from;
  // Skip a requested stage whose outputs already exist in the run directory.
  bool resume = false;
  bool baselines = true;
};

// stage1 -> stage2 -> oracle -> stage3 (+ baselines), then plot data.
void RunPipeline(const RunConfig& cfg, const std::filesystem::path& run_dir,
                 const PipelineOptions& opts = {});

}  // namespace slicetune

#endif  // SLICETUNE_HARNESS_PIPELINE_H_
