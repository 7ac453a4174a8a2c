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

#ifndef SLICETUNE_SIM_TYPES_H_
#define SLICETUNE_SIM_TYPES_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace slicetune {

// Seven simulator knobs searched in stage 1. Radio terms are in dB; the four
// extras are additive on top of the engine's nominal transport, compute and
// loading models.
struct SimulationParams {
  static constexpr std::size_t kDim = 7;

  double baseline_loss_db = 38.57;
  double enb_noise_figure_db = 5.0;
  double ue_noise_figure_db = 9.0;
  double backhaul_bw_extra_mbps = 0.0;
  double backhaul_delay_extra_ms = 0.0;
  double compute_time_extra_ms = 0.0;
  double loading_time_extra_ms = 0.0;

  std::array<double, kDim> ToArray() const;
  static SimulationParams FromArray(const std::array<double, kDim>& v);

  // The stock engine parameters, before any search.
  static SimulationParams Original();

  bool operator==(const SimulationParams&) const = default;
};

// Axis-aligned bounds for SimulationParams with the affine map onto [0,1]^7.
struct ParamBox {
  std::array<double, SimulationParams::kDim> lo{};
  std::array<double, SimulationParams::kDim> hi{};

  static ParamBox Default();

  bool Contains(const SimulationParams& p) const;
  std::array<double, SimulationParams::kDim> Normalize(
      const SimulationParams& p) const;
  SimulationParams Denormalize(
      const std::array<double, SimulationParams::kDim>& u) const;
  // Throws RangeError naming the first offending field.
  void Validate(const SimulationParams& p) const;
};

// l2 distance between two parameter vectors in normalized coordinates.
double NormalizedDistance(const ParamBox& box, const SimulationParams& a,
                          const SimulationParams& b);

// Six-dimensional slice configuration. PRB counts and MCS offsets are
// integral; transport bandwidth and CPU share are continuous.
struct ConfigAction {
  static constexpr std::size_t kDim = 6;
  static constexpr std::array<double, kDim> kMax = {50, 50, 10, 10, 100, 1.0};
  static constexpr int kMinUlPrb = 6;
  static constexpr int kMinDlPrb = 3;

  int bandwidth_ul = 0;
  int bandwidth_dl = 0;
  int mcs_offset_ul = 0;
  int mcs_offset_dl = 0;
  double backhaul_bw_mbps = 0.0;
  double cpu_ratio = 0.0;

  std::array<double, kDim> ToArray() const;
  // Integral fields are rounded to the nearest integer.
  static ConfigAction FromArray(const std::array<double, kDim>& v);
  // a / A, each coordinate in [0,1].
  std::array<double, kDim> Normalized() const;
  static ConfigAction FromNormalized(const std::array<double, kDim>& u);

  int EffectiveUlPrb() const;
  int EffectiveDlPrb() const;

  // Throws RangeError when any field is outside its range.
  void Validate() const;
  bool InRange() const;

  std::string ToString() const;
  bool operator==(const ConfigAction&) const = default;
};

struct NetworkState {
  static constexpr int kMaxTraffic = 4;
  int traffic = 1;          // concurrent frames in flight
  double distance_m = 1.0;  // UE to eNB line-of-sight distance

  void Validate() const;
};

struct LatencyBreakdown {
  double loading = 0;
  double ul_tx = 0;
  double backhaul = 0;
  double queueing = 0;
  double compute = 0;
  double dl_tx = 0;

  // Components summed in a fixed order; every frame latency is defined as
  // exactly this value.
  double Total() const {
    return loading + ul_tx + backhaul + queueing + compute + dl_tx;
  }
};

struct FrameRecord {
  std::int64_t frame_id = 0;
  double t_done_ms = 0;
  double latency_ms = 0;
  LatencyBreakdown parts;
};

struct LatencyTrace {
  std::vector<FrameRecord> frames;
  double duration_s = 0;

  std::size_t frames_completed() const { return frames.size(); }
  std::vector<double> Samples() const;
  double MeanLatency() const;
  LatencyBreakdown MeanBreakdown() const;
};

}  // namespace slicetune

#endif  // SLICETUNE_SIM_TYPES_H_
