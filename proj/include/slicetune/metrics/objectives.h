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

#ifndef SLICETUNE_METRICS_OBJECTIVES_H_
#define SLICETUNE_METRICS_OBJECTIVES_H_

#include <span>

#include "slicetune/sim/types.h"

namespace slicetune {

// kl + alpha * ||x - x_hat||_2 with both vectors mapped into [0,1]^7.
double WeightedDiscrepancy(double kl, const SimulationParams& x,
                           const SimulationParams& x_hat, double alpha,
                           const ParamBox& box = ParamBox::Default());

// Fraction of frames whose latency is at most `threshold_ms`.
double Qoe(std::span<const double> latencies_ms, double threshold_ms);
double Qoe(const LatencyTrace& trace, double threshold_ms);

// (1/6) * sum_i a_i / A_i.
double ResourceUsage(const ConfigAction& action);
double ResourceUsageNormalized(std::span<const double> normalized_action);

// usage - lambda * (qoe - E).
inline double Lagrangian(double usage, double qoe, double lambda,
                         double requirement) {
  return usage - lambda * (qoe - requirement);
}

// Projected sub-gradient step on the multiplier: [lambda - eps (qoe - E)]^+.
// For the online form, pass qoe = Q_s + G.
double DualUpdate(double lambda, double qoe, double requirement, double step);

}  // namespace slicetune

#endif  // SLICETUNE_METRICS_OBJECTIVES_H_
