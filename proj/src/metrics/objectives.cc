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

#include "slicetune/metrics/objectives.h"

#include <algorithm>
#include <stdexcept>

namespace slicetune {

double WeightedDiscrepancy(double kl, const SimulationParams& x,
                           const SimulationParams& x_hat, double alpha,
                           const ParamBox& box) {
  if (alpha == 0) return kl;
  return kl + alpha * NormalizedDistance(box, x, x_hat);
}

double Qoe(std::span<const double> latencies_ms, double threshold_ms) {
  if (latencies_ms.empty()) throw std::invalid_argument("QoE of an empty trace");
  std::size_t ok = 0;
  for (double l : latencies_ms) {
    if (l <= threshold_ms) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(latencies_ms.size());
}

double Qoe(const LatencyTrace& trace, double threshold_ms) {
  if (trace.frames.empty()) throw std::invalid_argument("QoE of an empty trace");
  std::size_t ok = 0;
  for (const auto& f : trace.frames) {
    if (f.latency_ms <= threshold_ms) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(trace.frames.size());
}

double ResourceUsage(const ConfigAction& action) {
  auto u = action.Normalized();
  return ResourceUsageNormalized(u);
}

double ResourceUsageNormalized(std::span<const double> normalized_action) {
  double s = 0;
  for (double v : normalized_action) s += v;
  return s / static_cast<double>(ConfigAction::kDim);
}

double DualUpdate(double lambda, double qoe, double requirement, double step) {
  if (!(step > 0)) throw std::invalid_argument("dual step size must be > 0");
  return std::max(lambda - step * (qoe - requirement), 0.0);
}

}  // namespace slicetune
