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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "slicetune/common/errors.h"
#include "slicetune/harness/config.h"
#include "slicetune/harness/oracle.h"
#include "slicetune/harness/pipeline.h"
#include "slicetune/harness/plot_data.h"

namespace fs = std::filesystem;
using namespace slicetune;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

RunConfig Resolve(const std::string& path, std::optional<std::uint64_t> seed) {
  RunConfig cfg = LoadRunConfig(path);
  if (seed) {
    cfg.SetSeed(*seed);
    cfg.source.Set("run.seed", std::to_string(*seed));
  }
  return cfg;
}

std::set<int> ParseStages(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "1" || item == "2" || item == "3") {
      out.insert(item[0] - '0');
    } else {
      throw ConfigError("--stages: expected a comma list of 1,2,3, got '" + s + "'");
    }
  }
  if (out.empty()) throw ConfigError("--stages: empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slicetune: simulator-assisted slice configuration"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string from;
  std::optional<std::uint64_t> seed;

  auto* s1 = app.add_subcommand("stage1", "Search simulation parameters against the twin");
  s1->add_option("--config", config, "Run config file")->required();
  s1->add_option("--out", out, "Run directory")->required();
  s1->add_option("--seed", seed, "Run seed (overrides config and ATLAS_SEED)");

  auto* s2 = app.add_subcommand("stage2", "Offline Lagrangian search over actions");
  s2->add_option("--config", config)->required();
  s2->add_option("--params-from", from, "Run directory holding stage1/")->required();
  s2->add_option("--out", out)->required();
  s2->add_option("--seed", seed);

  auto* s3 = app.add_subcommand("stage3", "Online learning against the twin");
  s3->add_option("--config", config)->required();
  s3->add_option("--offline-from", from, "Run directory holding stage1/ and stage2/")
      ->required();
  s3->add_option("--out", out)->required();
  s3->add_option("--seed", seed);

  std::string method;
  auto* bl = app.add_subcommand("baseline", "Run one comparison method online");
  bl->add_option("--method", method)
      ->required()
      ->check(CLI::IsMember({"gp-ei", "gp-ucb", "offline-filter"}));
  bl->add_option("--config", config)->required();
  bl->add_option("--offline-from", from, "Run directory (stage2/ is needed by offline-filter)");
  bl->add_option("--out", out)->required();
  bl->add_option("--seed", seed);

  std::string stages = "1,2,3";
  bool resume = false;
  bool no_baselines = false;
  auto* pl = app.add_subcommand("pipeline", "stage1 -> stage2 -> stage3 with hand-off");
  pl->add_option("--config", config)->required();
  pl->add_option("--out", out)->required();
  pl->add_option("--stages", stages, "Comma list drawn from 1,2,3");
  pl->add_option("--params-from", from, "Reuse earlier stage outputs from this run directory");
  pl->add_flag("--resume", resume, "Skip stages whose outputs already exist");
  pl->add_flag("--no-baselines", no_baselines);
  pl->add_option("--seed", seed);

  std::string run;
  auto* pd = app.add_subcommand("plot-data", "Write plots/*.csv from a run directory");
  pd->add_option("--run", run)->required();

  auto* orc = app.add_subcommand("oracle", "Brute-force grid optimum on the twin");
  orc->add_option("--config", config)->required();
  orc->add_option("--out", out)->required();
  orc->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (s1->parsed()) {
      RunConfig cfg = Resolve(config, seed);
      auto a = RunStage1(cfg, out);
      std::cout << "d0 " << a.d0 << " best_kl " << a.best_kl << " weighted "
                << a.best_weighted << "\n";
    } else if (s2->parsed()) {
      RunConfig cfg = Resolve(config, seed);
      auto a = RunStage2(cfg, LoadStage1(from), out);
      std::cout << "best " << a.best_action.ToString() << " usage " << a.best_usage << " qoe "
                << a.best_qoe << " lambda " << a.lambda_final << "\n";
    } else if (s3->parsed()) {
      RunConfig cfg = Resolve(config, seed);
      ReferenceOptimum ref = EnsureOracle(cfg, out);
      auto a = RunStage3(cfg, LoadStage1(from), LoadStage2(from), ref, out);
      std::cout << "avg_usage_regret " << a.avg_usage_regret << " avg_qoe_regret "
                << a.avg_qoe_regret << "\n";
    } else if (bl->parsed()) {
      RunConfig cfg = Resolve(config, seed);
      ReferenceOptimum ref = EnsureOracle(cfg, out);
      std::optional<Stage2Artifacts> s2a;
      if (method == "offline-filter") {
        if (from.empty()) throw ConfigError("--offline-from is required for offline-filter");
        s2a = LoadStage2(from);
      }
      auto r = RunBaselineStage(cfg, method, s2a ? &*s2a : nullptr, ref, out);
      std::cout << "avg_usage_regret " << r.ledger.AverageUsageRegret() << " avg_qoe_regret "
                << r.ledger.AverageQoeRegret() << "\n";
    } else if (pl->parsed()) {
      RunConfig cfg = Resolve(config, seed);
      PipelineOptions opts;
      opts.stages = ParseStages(stages);
      if (!from.empty()) opts.params_from = fs::path(from);
      opts.resume = resume;
      opts.baselines = !no_baselines;
      RunPipeline(cfg, out, opts);
      std::cout << "run directory " << out << "\n";
    } else if (pd->parsed()) {
      for (const auto& p : EmitPlotData(run)) std::cout << p.string() << "\n";
    } else if (orc->parsed()) {
      RunConfig cfg = Resolve(config, seed);
      auto ref = RunOracleStage(cfg, out);
      std::cout << "oracle " << ref.action.ToString() << " usage " << ref.usage << " qoe "
                << ref.qoe << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const RangeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
