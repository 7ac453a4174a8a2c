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

#ifndef SLICETUNE_SIM_ENVIRONMENT_H_
#define SLICETUNE_SIM_ENVIRONMENT_H_

#include <cstdint>
#include <string>

#include "slicetune/sim/engine.h"
#include "slicetune/sim/types.h"

namespace slicetune {

// Anything a configuration can be applied to: the simulator or the real twin.
// Implementations are immutable and safe for concurrent queries.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual LatencyTrace Query(const ConfigAction& action, const NetworkState& state,
                             double duration_s, std::uint64_t seed) const = 0;
  virtual std::string Name() const = 0;
};

class SimulatorEnv final : public Environment {
 public:
  explicit SimulatorEnv(SimulationParams params, EngineConfig cfg = {})
      : params_(params), cfg_(cfg) {}

  LatencyTrace Query(const ConfigAction& action, const NetworkState& state,
                     double duration_s, std::uint64_t seed) const override {
    return Simulate(params_, action, state, duration_s, seed, cfg_);
  }
  std::string Name() const override { return "simulator"; }

  const SimulationParams& params() const { return params_; }

 private:
  SimulationParams params_;
  EngineConfig cfg_;
};

// Stand-in for the physical network: the same engine driven by hidden
// parameters, with every frame latency scaled by an independent log-normal
// factor (median 1, log-std sigma_res). The hidden parameters are not
// exposed; stage algorithms only see Query().
class RealTwin final : public Environment {
 public:
  static SimulationParams DefaultHiddenParams();
  static constexpr double kDefaultSigmaRes = 0.05;

  RealTwin(SimulationParams hidden, double sigma_res, EngineConfig cfg = {});

  LatencyTrace Query(const ConfigAction& action, const NetworkState& state,
                     double duration_s, std::uint64_t seed) const override;
  std::string Name() const override { return "real-twin"; }

 private:
  SimulationParams hidden_;
  double sigma_res_;
  EngineConfig cfg_;
};

// D_r: one twin query, frozen for the whole of stage 1.
LatencyTrace CollectReference(const Environment& real, const NetworkState& state,
                              const ConfigAction& action, double duration_s,
                              std::uint64_t seed);

}  // namespace slicetune

#endif  // SLICETUNE_SIM_ENVIRONMENT_H_
