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

#include "slicetune/sim/types.h"

#include <cmath>
#include <sstream>

#include "slicetune/common/errors.h"

namespace slicetune {

namespace {

constexpr std::array<const char*, SimulationParams::kDim> kParamNames = {
    "baseline_loss",       "enb_noise_figure", "ue_noise_figure",
    "backhaul_bw_extra",   "backhaul_delay_extra", "compute_time_extra",
    "loading_time_extra"};

constexpr std::array<const char*, ConfigAction::kDim> kActionNames = {
    "bandwidth_ul", "bandwidth_dl", "mcs_offset_ul",
    "mcs_offset_dl", "backhaul_bw", "cpu_ratio"};

}  // namespace

std::array<double, SimulationParams::kDim> SimulationParams::ToArray() const {
  return {baseline_loss_db,       enb_noise_figure_db,     ue_noise_figure_db,
          backhaul_bw_extra_mbps, backhaul_delay_extra_ms, compute_time_extra_ms,
          loading_time_extra_ms};
}

SimulationParams SimulationParams::FromArray(const std::array<double, kDim>& v) {
  SimulationParams p;
  p.baseline_loss_db = v[0];
  p.enb_noise_figure_db = v[1];
  p.ue_noise_figure_db = v[2];
  p.backhaul_bw_extra_mbps = v[3];
  p.backhaul_delay_extra_ms = v[4];
  p.compute_time_extra_ms = v[5];
  p.loading_time_extra_ms = v[6];
  return p;
}

SimulationParams SimulationParams::Original() { return SimulationParams{}; }

ParamBox ParamBox::Default() {
  ParamBox b;
  b.lo = {30, 0, 0, 0, 0, 0, 0};
  b.hi = {50, 13, 13, 20, 20, 20, 20};
  return b;
}

bool ParamBox::Contains(const SimulationParams& p) const {
  auto v = p.ToArray();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= lo[i] && v[i] <= hi[i])) return false;
  }
  return true;
}

void ParamBox::Validate(const SimulationParams& p) const {
  auto v = p.ToArray();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= lo[i] && v[i] <= hi[i])) {
      std::ostringstream os;
      os << "simulation parameter " << kParamNames[i] << " = " << v[i]
         << " outside [" << lo[i] << ", " << hi[i] << "]";
      throw RangeError(os.str());
    }
  }
}

std::array<double, SimulationParams::kDim> ParamBox::Normalize(
    const SimulationParams& p) const {
  auto v = p.ToArray();
  std::array<double, SimulationParams::kDim> u{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    u[i] = (v[i] - lo[i]) / (hi[i] - lo[i]);
  }
  return u;
}

SimulationParams ParamBox::Denormalize(
    const std::array<double, SimulationParams::kDim>& u) const {
  std::array<double, SimulationParams::kDim> v{};
  for (std::size_t i = 0; i < u.size(); ++i) {
    v[i] = lo[i] + u[i] * (hi[i] - lo[i]);
  }
  return SimulationParams::FromArray(v);
}

double NormalizedDistance(const ParamBox& box, const SimulationParams& a,
                          const SimulationParams& b) {
  auto ua = box.Normalize(a);
  auto ub = box.Normalize(b);
  double s = 0;
  for (std::size_t i = 0; i < ua.size(); ++i) {
    s += (ua[i] - ub[i]) * (ua[i] - ub[i]);
  }
  return std::sqrt(s);
}

std::array<double, ConfigAction::kDim> ConfigAction::ToArray() const {
  return {static_cast<double>(bandwidth_ul), static_cast<double>(bandwidth_dl),
          static_cast<double>(mcs_offset_ul), static_cast<double>(mcs_offset_dl),
          backhaul_bw_mbps, cpu_ratio};
}

ConfigAction ConfigAction::FromArray(const std::array<double, kDim>& v) {
  ConfigAction a;
  a.bandwidth_ul = static_cast<int>(std::lround(v[0]));
  a.bandwidth_dl = static_cast<int>(std::lround(v[1]));
  a.mcs_offset_ul = static_cast<int>(std::lround(v[2]));
  a.mcs_offset_dl = static_cast<int>(std::lround(v[3]));
  a.backhaul_bw_mbps = v[4];
  a.cpu_ratio = v[5];
  return a;
}

std::array<double, ConfigAction::kDim> ConfigAction::Normalized() const {
  auto v = ToArray();
  for (std::size_t i = 0; i < kDim; ++i) v[i] /= kMax[i];
  return v;
}

ConfigAction ConfigAction::FromNormalized(const std::array<double, kDim>& u) {
  std::array<double, kDim> v{};
  for (std::size_t i = 0; i < kDim; ++i) v[i] = u[i] * kMax[i];
  return FromArray(v);
}

int ConfigAction::EffectiveUlPrb() const {
  return bandwidth_ul < kMinUlPrb ? kMinUlPrb : bandwidth_ul;
}

int ConfigAction::EffectiveDlPrb() const {
  return bandwidth_dl < kMinDlPrb ? kMinDlPrb : bandwidth_dl;
}

bool ConfigAction::InRange() const {
  auto v = ToArray();
  for (std::size_t i = 0; i < kDim; ++i) {
    if (!(v[i] >= 0 && v[i] <= kMax[i])) return false;
  }
  return true;
}

void ConfigAction::Validate() const {
  auto v = ToArray();
  for (std::size_t i = 0; i < kDim; ++i) {
    if (!(v[i] >= 0 && v[i] <= kMax[i])) {
      std::ostringstream os;
      os << "action field " << kActionNames[i] << " = " << v[i]
         << " outside [0, " << kMax[i] << "]";
      throw RangeError(os.str());
    }
  }
}

std::string ConfigAction::ToString() const {
  std::ostringstream os;
  os << "[ul_prb=" << bandwidth_ul << ", dl_prb=" << bandwidth_dl
     << ", mcs_ul=" << mcs_offset_ul << ", mcs_dl=" << mcs_offset_dl
     << ", backhaul=" << backhaul_bw_mbps << "Mbps, cpu=" << cpu_ratio << "]";
  return os.str();
}

void NetworkState::Validate() const {
  if (traffic < 1) throw RangeError("network state traffic must be >= 1");
  if (!(distance_m > 0)) throw RangeError("network state distance must be > 0");
}

std::vector<double> LatencyTrace::Samples() const {
  std::vector<double> s;
  s.reserve(frames.size());
  for (const auto& f : frames) s.push_back(f.latency_ms);
  return s;
}

double LatencyTrace::MeanLatency() const {
  if (frames.empty()) return 0;
  double s = 0;
  for (const auto& f : frames) s += f.latency_ms;
  return s / static_cast<double>(frames.size());
}

LatencyBreakdown LatencyTrace::MeanBreakdown() const {
  LatencyBreakdown m;
  if (frames.empty()) return m;
  for (const auto& f : frames) {
    m.loading += f.parts.loading;
    m.ul_tx += f.parts.ul_tx;
    m.backhaul += f.parts.backhaul;
    m.queueing += f.parts.queueing;
    m.compute += f.parts.compute;
    m.dl_tx += f.parts.dl_tx;
  }
  double n = static_cast<double>(frames.size());
  m.loading /= n;
  m.ul_tx /= n;
  m.backhaul /= n;
  m.queueing /= n;
  m.compute /= n;
  m.dl_tx /= n;
  return m;
}

}  // namespace slicetune
