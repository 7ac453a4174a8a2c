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

#ifndef SLICETUNE_SIM_ENGINE_H_
#define SLICETUNE_SIM_ENGINE_H_

#include <cstdint>

#include "slicetune/sim/types.h"

namespace slicetune {

// Fixed conventions of the slice engine. These are not searched; stage 1 only
// moves SimulationParams.
struct EngineConfig {
  double prb_bandwidth_hz = 180e3;
  double tx_power_dbm = 23.0;
  double noise_floor_dbm = -101.4;  // thermal noise over one PRB
  double pathloss_exponent = 3.0;
  double min_spectral_eff = 0.15;   // bits/s/Hz
  double max_spectral_eff = 5.55;
  double mcs_levels = 15.0;

  double ul_payload_mean_kb = 28.8;
  double ul_payload_std_kb = 9.9;
  double ul_payload_min_kb = 1.0;
  double dl_payload_kb = 4.0;

  double backhaul_base_delay_ms = 1.0;
  double backhaul_min_rate_mbps = 0.1;

  double compute_mean_ms = 81.0;
  double compute_std_ms = 35.0;
  double compute_min_ms = 1.0;
  double cpu_ratio_floor = 0.05;

  double loading_base_ms = 10.0;
};

// Spectral efficiency after MCS derating, bits/s/Hz.
double SpectralEfficiency(double snr_db, int mcs_offset, const EngineConfig& cfg);

// Link SNR in dB for a receiver with the given noise figure.
double LinkSnrDb(const SimulationParams& params, double noise_figure_db,
                 double distance_m, const EngineConfig& cfg);

// Uplink/downlink radio rates in bits/s after the PRB floors.
double UplinkRateBps(const SimulationParams& params, const ConfigAction& action,
                     const NetworkState& state, const EngineConfig& cfg);
double DownlinkRateBps(const SimulationParams& params, const ConfigAction& action,
                       const NetworkState& state, const EngineConfig& cfg);
double BackhaulRateMbps(const SimulationParams& params, const ConfigAction& action,
                        const EngineConfig& cfg);

// Closed-loop discrete-event run of one slice: `state.traffic` frames are in
// flight at all times, each passing loading -> UL radio -> backhaul -> FIFO
// edge compute -> DL radio. Radio, backhaul and compute stations are FIFO
// single servers. Pure function of its arguments.
LatencyTrace Simulate(const SimulationParams& params, const ConfigAction& action,
                      const NetworkState& state, double duration_s,
                      std::uint64_t seed, const EngineConfig& cfg = {});

}  // namespace slicetune

#endif  // SLICETUNE_SIM_ENGINE_H_
