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

#include "slicetune/metrics/kl.h"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace slicetune {

std::vector<double> LatencyHistogram(std::span<const double> samples,
                                     const KlOptions& opts) {
  if (samples.empty()) throw std::invalid_argument("histogram of empty sample");
  if (opts.bins < 1 || !(opts.latency_cap_ms > 0)) {
    throw std::invalid_argument("histogram needs bins >= 1 and a positive cap");
  }
  std::vector<double> counts(opts.bins, 0.0);
  double width = opts.latency_cap_ms / opts.bins;
  for (double s : samples) {
    int b = s <= 0 ? 0 : static_cast<int>(s / width);
    if (b >= opts.bins) b = opts.bins - 1;
    counts[b] += 1.0;
  }
  double total = 0;
  for (double& c : counts) {
    c += opts.smoothing;
    total += c;
  }
  for (double& c : counts) c /= total;
  return counts;
}

double KlDivergence(std::span<const double> real, std::span<const double> sim,
                    const KlOptions& opts) {
  if (real.empty() || sim.empty()) {
    throw std::invalid_argument("KL divergence of an empty trace");
  }
  auto p = LatencyHistogram(real, opts);
  auto q = LatencyHistogram(sim, opts);
  double kl = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

double KlDivergence(const LatencyTrace& real, const LatencyTrace& sim,
                    const KlOptions& opts) {
  auto r = real.Samples();
  auto s = sim.Samples();
  return KlDivergence(r, s, opts);
}

}  // namespace slicetune
