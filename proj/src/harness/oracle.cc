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

#include "slicetune/harness/oracle.h"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "slicetune/common/errors.h"
#include "slicetune/common/parallel.h"
#include "slicetune/common/rng.h"
#include "slicetune/metrics/objectives.h"
#include "slicetune/sim/sampling.h"

namespace slicetune {

OracleResult GridOracle(const Environment& env, const OracleConfig& cfg) {
  cfg.state.Validate();
  OracleResult out;
  out.actions = GridActions(cfg.levels);
  const std::size_t n = out.actions.size();
  out.usage.resize(n);
  out.qoe.resize(n);
  ParallelFor(
      n,
      [&](std::size_t i) {
        auto trace = env.Query(out.actions[i], cfg.state, cfg.duration_s,
                               DeriveSeed(cfg.seed, Stage::kOracle, i, 0, "query"));
        out.usage[i] = ResourceUsage(out.actions[i]);
        out.qoe[i] = trace.frames.empty() ? 0.0 : Qoe(trace, cfg.threshold_ms);
      },
      static_cast<std::size_t>(std::max(cfg.threads, 0)));

  std::ptrdiff_t best = -1;
  double best_q = 0;
  for (std::size_t i = 0; i < n; ++i) {
    best_q = std::max(best_q, out.qoe[i]);
    if (out.qoe[i] < cfg.requirement) continue;
    ++out.feasible_count;
    if (best < 0 || out.usage[i] < out.usage[best]) best = static_cast<std::ptrdiff_t>(i);
  }
  if (best < 0) {
    std::ostringstream os;
    os << "oracle: no grid action reaches QoE " << cfg.requirement
       << "; best grid QoE was " << best_q;
    throw InfeasibleError(os.str());
  }
  out.best = {out.actions[best], out.usage[best], out.qoe[best]};
  return out;
}

void SaveOracle(const std::filesystem::path& path, const ReferenceOptimum& ref) {
  auto a = ref.action.ToArray();
  nlohmann::json j;
  j["action"] = std::vector<double>(a.begin(), a.end());
  j["usage"] = ref.usage;
  j["qoe"] = ref.qoe;
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  os << j.dump(1) << "\n";
}

ReferenceOptimum LoadOracle(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open oracle file " + path.string());
  try {
    auto j = nlohmann::json::parse(is);
    auto v = j.at("action").get<std::vector<double>>();
    if (v.size() != ConfigAction::kDim) throw FormatError("oracle action must have 6 entries");
    std::array<double, ConfigAction::kDim> a{};
    std::copy(v.begin(), v.end(), a.begin());
    ReferenceOptimum ref;
    ref.action = ConfigAction::FromArray(a);
    ref.usage = j.at("usage").get<double>();
    ref.qoe = j.at("qoe").get<double>();
    return ref;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed oracle file " + path.string() + ": " + e.what());
  }
}

}  // namespace slicetune
