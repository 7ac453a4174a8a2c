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

#include "slicetune/harness/plot_data.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>

#include "slicetune/common/errors.h"
#include "slicetune/harness/oracle.h"
#include "slicetune/harness/pipeline.h"
#include "slicetune/metrics/objectives.h"

namespace slicetune {
namespace fs = std::filesystem;

namespace {

std::vector<LedgerRow> LoadNonEmpty(const fs::path& path) {
  auto rows = LoadLedger(path);
  if (rows.empty()) throw FormatError("empty ledger " + path.string());
  return rows;
}

SimulationParams ParamsOf(const LedgerRow& row) {
  if (row.x_or_a.size() != SimulationParams::kDim) {
    throw FormatError("stage-1 ledger row has " + std::to_string(row.x_or_a.size()) +
                      " parameters");
  }
  std::array<double, SimulationParams::kDim> a{};
  std::copy(row.x_or_a.begin(), row.x_or_a.end(), a.begin());
  return SimulationParams::FromArray(a);
}

std::ofstream OpenCsv(const fs::path& path, const char* header) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  os.precision(10);
  os << header << "\n";
  return os;
}

void WriteOnline(const fs::path& plots, const std::string& name,
                 const std::vector<LedgerRow>& rows, const std::optional<ReferenceOptimum>& ref,
                 std::vector<fs::path>* written) {
  fs::path fp = plots / ("footprint_" + name + ".csv");
  auto fo = OpenCsv(fp, "iteration,usage,qoe,lambda,beta");
  for (const auto& r : rows) {
    if (r.kind != "online") continue;
    fo << r.iter << "," << r.usage.value_or(NAN) << "," << r.qoe.value_or(NAN) << ",";
    if (r.lambda) fo << *r.lambda;
    fo << ",";
    if (r.beta) fo << *r.beta;
    fo << "\n";
  }
  written->push_back(fp);
  if (!ref) return;
  RunLedger replay = ReplayRegret(rows, *ref);
  fs::path rp = plots / ("regret_" + name + ".csv");
  auto ro = OpenCsv(rp, "iteration,avg_usage_regret,avg_qoe_regret");
  const auto& gu = replay.usage_regret_series();
  const auto& gp = replay.qoe_regret_series();
  for (std::size_t i = 0; i < gu.size(); ++i) {
    double n = static_cast<double>(i + 1);
    ro << i << "," << gu[i] / n << "," << gp[i] / n << "\n";
  }
  written->push_back(rp);
}

}  // namespace

std::vector<ParetoPoint> ParetoSweep(const std::vector<LedgerRow>& stage1_rows,
                                     const SimulationParams& x_hat,
                                     const std::vector<double>& alphas) {
  const ParamBox box = ParamBox::Default();
  std::vector<std::pair<double, double>> dk;  // (distance, kl)
  std::vector<const LedgerRow*> src;
  for (const auto& r : stage1_rows) {
    if (!r.kl) continue;
    dk.emplace_back(NormalizedDistance(box, ParamsOf(r), x_hat), *r.kl);
    src.push_back(&r);
  }
  if (dk.empty()) throw FormatError("pareto sweep: no stage-1 rows with a KL value");
  std::vector<ParetoPoint> out;
  for (double alpha : alphas) {
    std::size_t best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dk.size(); ++i) {
      double v = dk[i].second + alpha * dk[i].first;
      if (v < best_v) {
        best_v = v;
        best = i;
      }
    }
    out.push_back({alpha, dk[best].first, dk[best].second, src[best]->x_or_a});
  }
  return out;
}

RunLedger ReplayRegret(const std::vector<LedgerRow>& rows, const ReferenceOptimum& ref) {
  RunLedger ledger;
  ledger.SetReference(ref);
  for (const auto& r : rows) {
    if (r.kind != "online") continue;
    if (!r.usage || !r.qoe) throw FormatError("online ledger row without usage or qoe");
    ledger.UpdateRegret(*r.usage, *r.qoe);
  }
  return ledger;
}

std::vector<fs::path> EmitPlotData(const fs::path& run_dir) {
  Stage1Config s1_defaults;
  SimulationParams x_hat = s1_defaults.x_hat;
  double alpha = s1_defaults.alpha;
  int incumbent_traffic = Stage2Config{}.incumbent_traffic;
  double requirement = Stage2Config{}.requirement;
  if (fs::exists(run_dir / "config.txt")) {
    RunConfig cfg = LoadRunConfig(run_dir / "config.txt");
    x_hat = cfg.stage1.x_hat;
    alpha = cfg.stage1.alpha;
    incumbent_traffic = cfg.stage2.incumbent_traffic;
    requirement = cfg.stage2.requirement;
  }
  std::optional<ReferenceOptimum> ref;
  if (fs::exists(run_dir / "oracle" / "oracle.json")) {
    ref = LoadOracle(run_dir / "oracle" / "oracle.json");
  }

  fs::path plots = run_dir / "plots";
  fs::create_directories(plots);
  std::vector<fs::path> written;
  bool any = false;

  if (fs::path p = run_dir / "stage1" / "ledger.jsonl"; fs::exists(p)) {
    any = true;
    auto rows = LoadNonEmpty(p);
    fs::path cp = plots / "stage1_convergence.csv";
    auto os = OpenCsv(cp, "query,iteration,kl,weighted,best_weighted,best_kl");
    double best_w = std::numeric_limits<double>::infinity();
    double best_kl = std::numeric_limits<double>::infinity();
    std::size_t q = 0;
    for (const auto& r : rows) {
      if (!r.kl) continue;
      double w = WeightedDiscrepancy(*r.kl, ParamsOf(r), x_hat, alpha);
      best_w = std::min(best_w, w);
      best_kl = std::min(best_kl, *r.kl);
      os << q++ << "," << r.iter << "," << *r.kl << "," << w << "," << best_w << "," << best_kl
         << "\n";
    }
    written.push_back(cp);

    fs::path pp = plots / "pareto_alpha.csv";
    auto po = OpenCsv(pp, "alpha,distance,kl");
    for (const auto& pt : ParetoSweep(rows, x_hat, {std::begin(kParetoAlphas),
                                                    std::end(kParetoAlphas)})) {
      po << pt.alpha << "," << pt.distance << "," << pt.kl << "\n";
    }
    written.push_back(pp);
  }

  if (fs::path p = run_dir / "stage2" / "ledger.jsonl"; fs::exists(p)) {
    any = true;
    auto rows = LoadNonEmpty(p);
    fs::path cp = plots / "stage2_convergence.csv";
    auto os = OpenCsv(cp, "query,iteration,traffic,usage,qoe,lambda,best_feasible_usage");
    double best = NAN;
    std::size_t q = 0;
    for (const auto& r : rows) {
      if (r.traffic.value_or(1) == incumbent_traffic && r.qoe && *r.qoe >= requirement &&
          r.usage && !(*r.usage >= best)) {
        best = *r.usage;
      }
      os << q++ << "," << r.iter << "," << r.traffic.value_or(1) << "," << r.usage.value_or(NAN)
         << "," << r.qoe.value_or(NAN) << "," << r.lambda.value_or(NAN) << "," << best << "\n";
    }
    written.push_back(cp);
  }

  if (fs::path p = run_dir / "stage3" / "ledger.jsonl"; fs::exists(p)) {
    any = true;
    WriteOnline(plots, "ours", LoadNonEmpty(p), ref, &written);
  }
  if (fs::exists(run_dir / "baselines")) {
    for (const auto& entry : fs::directory_iterator(run_dir / "baselines")) {
      fs::path p = entry.path() / "ledger.jsonl";
      if (!fs::exists(p)) continue;
      any = true;
      WriteOnline(plots, entry.path().filename().string(), LoadNonEmpty(p), ref, &written);
    }
  }
  if (!any) throw FormatError("no ledgers under " + run_dir.string());
  return written;
}

}  // namespace slicetune
