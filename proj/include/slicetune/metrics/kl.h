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

#ifndef SLICETUNE_METRICS_KL_H_
#define SLICETUNE_METRICS_KL_H_

#include <span>

#include "slicetune/sim/types.h"

namespace slicetune {

struct KlOptions {
  int bins = 60;
  double latency_cap_ms = 2000.0;  // overflow mass lands in the last bin
  double smoothing = 0.5;          // added to every bin before normalizing
};

// Normalized, smoothed histogram over the shared bin edges.
std::vector<double> LatencyHistogram(std::span<const double> samples,
                                     const KlOptions& opts = {});

// KL(real || sim) between histogram estimates of two latency samples.
// Throws std::invalid_argument when either sample is empty.
double KlDivergence(std::span<const double> real, std::span<const double> sim,
                    const KlOptions& opts = {});
double KlDivergence(const LatencyTrace& real, const LatencyTrace& sim,
                    const KlOptions& opts = {});

}  // namespace slicetune

#endif  // SLICETUNE_METRICS_KL_H_
