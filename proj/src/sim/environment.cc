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

#include "slicetune/sim/environment.h"

#include <cmath>
#include <random>

#include "slicetune/common/errors.h"
#include "slicetune/common/rng.h"

namespace slicetune {

SimulationParams RealTwin::DefaultHiddenParams() {
  return SimulationParams::FromArray({38.76, 0.68, 8.93, 5.03, 8.93, 2.16, 3.10});
}

RealTwin::RealTwin(SimulationParams hidden, double sigma_res, EngineConfig cfg)
    : hidden_(hidden), sigma_res_(sigma_res), cfg_(cfg) {
  if (!(sigma_res >= 0) || !std::isfinite(sigma_res)) {
    throw RangeError("twin residual noise sigma_res must be finite and >= 0");
  }
}

LatencyTrace RealTwin::Query(const ConfigAction& action, const NetworkState& state,
                             double duration_s, std::uint64_t seed) const {
  LatencyTrace trace = Simulate(hidden_, action, state, duration_s, seed, cfg_);
  if (sigma_res_ == 0) return trace;
  Rng rng(SubSeed(seed, HashTag("twin-residual")));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& f : trace.frames) {
    double factor = std::exp(sigma_res_ * normal(rng));
    f.parts.loading *= factor;
    f.parts.ul_tx *= factor;
    f.parts.backhaul *= factor;
    f.parts.queueing *= factor;
    f.parts.compute *= factor;
    f.parts.dl_tx *= factor;
    f.latency_ms = f.parts.Total();
  }
  return trace;
}

LatencyTrace CollectReference(const Environment& real, const NetworkState& state,
                              const ConfigAction& action, double duration_s,
                              std::uint64_t seed) {
  return real.Query(action, state, duration_s, seed);
}

}  // namespace slicetune
