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

#ifndef SLICETUNE_HARNESS_PLOT_DATA_H_
#define SLICETUNE_HARNESS_PLOT_DATA_H_

#include <filesystem>
#include <vector>

#include "slicetune/metrics/ledger.h"
#include "slicetune/sim/types.h"

namespace slicetune {

inline constexpr double kParetoAlphas[] = {1, 3, 5, 7, 10, 15};

struct ParetoPoint {
  double alpha = 0;
  double distance = 0;  // normalized distance to x_hat
  double kl = 0;
  std::vector<double> params;
};

// For each alpha, the stage-1 ledger row minimizing kl + alpha * distance.
// Throws FormatError on a ledger without stage-1 rows.
std::vector<ParetoPoint> ParetoSweep(const std::vector<LedgerRow>& stage1_rows,
                                     const SimulationParams& x_hat,
                                     const std::vector<double>& alphas);

// Replays the online rows of a ledger against the oracle optimum; the result
// has one regret step per online row.
RunLedger ReplayRegret(const std::vector<LedgerRow>& rows, const ReferenceOptimum& ref);

// Writes plots/*.csv for every ledger found under the run directory:
// stage1_convergence, pareto_alpha, stage2_convergence, and footprint_<m> /
// regret_<m> for stage 3 ("ours") and each baseline. Returns the files
// written. Throws FormatError when a ledger is empty or none exists.
std::vector<std::filesystem::path> EmitPlotData(const std::filesystem::path& run_dir);

}  // namespace slicetune

#endif  // SLICETUNE_HARNESS_PLOT_DATA_H_
