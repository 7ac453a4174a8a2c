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

#include "slicetune/sim/engine.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <random>
#include <vector>

#include "slicetune/common/errors.h"
#include "slicetune/common/rng.h"

namespace slicetune {

double SpectralEfficiency(double snr_db, int mcs_offset, const EngineConfig& cfg) {
  double snr = std::pow(10.0, snr_db / 10.0);
  double eff = std::clamp(std::log2(1.0 + snr), cfg.min_spectral_eff,
                          cfg.max_spectral_eff);
  // Derating is applied after the cap so the offset stays effective at high
  // SNR.
  return eff * (1.0 - static_cast<double>(mcs_offset) / cfg.mcs_levels);
}

double LinkSnrDb(const SimulationParams& params, double noise_figure_db,
                 double distance_m, const EngineConfig& cfg) {
  double pathloss = params.baseline_loss_db +
                    10.0 * cfg.pathloss_exponent *
                        std::log10(std::max(distance_m, 1.0));
  return cfg.tx_power_dbm - pathloss - cfg.noise_floor_dbm - noise_figure_db;
}

double UplinkRateBps(const SimulationParams& params, const ConfigAction& action,
                     const NetworkState& state, const EngineConfig& cfg) {
  double snr = LinkSnrDb(params, params.enb_noise_figure_db, state.distance_m, cfg);
  return action.EffectiveUlPrb() * cfg.prb_bandwidth_hz *
         SpectralEfficiency(snr, action.mcs_offset_ul, cfg);
}

double DownlinkRateBps(const SimulationParams& params, const ConfigAction& action,
                       const NetworkState& state, const EngineConfig& cfg) {
  double snr = LinkSnrDb(params, params.ue_noise_figure_db, state.distance_m, cfg);
  return action.EffectiveDlPrb() * cfg.prb_bandwidth_hz *
         SpectralEfficiency(snr, action.mcs_offset_dl, cfg);
}

double BackhaulRateMbps(const SimulationParams& params, const ConfigAction& action,
                        const EngineConfig& cfg) {
  double rate = std::min(action.backhaul_bw_mbps, 100.0) +
                params.backhaul_bw_extra_mbps;
  return std::max(rate, cfg.backhaul_min_rate_mbps);
}

namespace {

enum class EventType {
  kLoaded,
  kUlDone,
  kBackhaulSerialized,
  kComputeArrive,
  kComputeDone,
  kDlDone,
};

struct Event {
  double t;
  std::uint64_t seq;
  EventType type;
  std::int64_t frame;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) return a.t > b.t;
    return a.seq > b.seq;
  }
};

struct Frame {
  double t_gen = 0;
  double t_loaded = 0;
  double t_ul_done = 0;
  double t_compute_arrive = 0;
  double t_compute_start = 0;
  double t_compute_done = 0;
  double t_dl_done = 0;
  double ul_bits = 0;
  double compute_ms = 0;
};

// FIFO single-server bookkeeping; service durations are supplied by the caller
// at service start.
struct Station {
  bool busy = false;
  std::deque<std::int64_t> waiting;
};

class SliceRun {
 public:
  SliceRun(const SimulationParams& params, const ConfigAction& action,
           const NetworkState& state, double duration_s, std::uint64_t seed,
           const EngineConfig& cfg)
      : params_(params),
        action_(action),
        state_(state),
        horizon_ms_(duration_s * 1e3),
        cfg_(cfg),
        rng_(seed) {
    ul_rate_bps_ = UplinkRateBps(params, action, state, cfg);
    dl_rate_bps_ = DownlinkRateBps(params, action, state, cfg);
    backhaul_bps_ = BackhaulRateMbps(params, action, cfg) * 1e6;
    cpu_share_ = std::max(action.cpu_ratio, cfg.cpu_ratio_floor);
    loading_ms_ = cfg.loading_base_ms + params.loading_time_extra_ms;
    propagation_ms_ = cfg.backhaul_base_delay_ms + params.backhaul_delay_extra_ms;
  }

  LatencyTrace Run() {
    for (int i = 0; i < state_.traffic; ++i) Generate(0.0);
    while (!events_.empty()) {
      Event ev = events_.top();
      if (ev.t > horizon_ms_) break;
      events_.pop();
      Dispatch(ev);
    }
    trace_.duration_s = horizon_ms_ / 1e3;
    return std::move(trace_);
  }

 private:
  void Schedule(double t, EventType type, std::int64_t frame) {
    events_.push(Event{t, next_seq_++, type, frame});
  }

  void Generate(double t) {
    Frame f;
    f.t_gen = t;
    double payload_kb = cfg_.ul_payload_mean_kb + cfg_.ul_payload_std_kb * normal_(rng_);
    f.ul_bits = std::max(payload_kb, cfg_.ul_payload_min_kb) * 1e3;
    double work = cfg_.compute_mean_ms + cfg_.compute_std_ms * normal_(rng_);
    f.compute_ms = std::max(work, cfg_.compute_min_ms) / cpu_share_ +
                   params_.compute_time_extra_ms;
    std::int64_t id = static_cast<std::int64_t>(frames_.size());
    frames_.push_back(f);
    Schedule(t + loading_ms_, EventType::kLoaded, id);
  }

  double UlServiceMs(std::int64_t id) const {
    return frames_[id].ul_bits / ul_rate_bps_ * 1e3;
  }
  double BackhaulServiceMs(std::int64_t id) const {
    return frames_[id].ul_bits / backhaul_bps_ * 1e3;
  }
  double DlServiceMs() const { return cfg_.dl_payload_kb * 1e3 / dl_rate_bps_ * 1e3; }

  void StartUl(double t, std::int64_t id) {
    ul_.busy = true;
    Schedule(t + UlServiceMs(id), EventType::kUlDone, id);
  }
  void StartBackhaul(double t, std::int64_t id) {
    backhaul_.busy = true;
    Schedule(t + BackhaulServiceMs(id), EventType::kBackhaulSerialized, id);
  }
  void StartCompute(double t, std::int64_t id) {
    compute_.busy = true;
    frames_[id].t_compute_start = t;
    Schedule(t + frames_[id].compute_ms, EventType::kComputeDone, id);
  }
  void StartDl(double t, std::int64_t id) {
    dl_.busy = true;
    Schedule(t + DlServiceMs(), EventType::kDlDone, id);
  }

  template <typename StartFn>
  void Arrive(Station& st, double t, std::int64_t id, StartFn start) {
    if (st.busy) {
      st.waiting.push_back(id);
    } else {
      (this->*start)(t, id);
    }
  }

  template <typename StartFn>
  void Release(Station& st, double t, StartFn start) {
    st.busy = false;
    if (!st.waiting.empty()) {
      std::int64_t next = st.waiting.front();
      st.waiting.pop_front();
      (this->*start)(t, next);
    }
  }

  void Dispatch(const Event& ev) {
    Frame& f = frames_[ev.frame];
    switch (ev.type) {
      case EventType::kLoaded:
        f.t_loaded = ev.t;
        Arrive(ul_, ev.t, ev.frame, &SliceRun::StartUl);
        break;
      case EventType::kUlDone:
        f.t_ul_done = ev.t;
        Release(ul_, ev.t, &SliceRun::StartUl);
        Arrive(backhaul_, ev.t, ev.frame, &SliceRun::StartBackhaul);
        break;
      case EventType::kBackhaulSerialized:
        Release(backhaul_, ev.t, &SliceRun::StartBackhaul);
        Schedule(ev.t + propagation_ms_, EventType::kComputeArrive, ev.frame);
        break;
      case EventType::kComputeArrive:
        f.t_compute_arrive = ev.t;
        Arrive(compute_, ev.t, ev.frame, &SliceRun::StartCompute);
        break;
      case EventType::kComputeDone:
        f.t_compute_done = ev.t;
        Release(compute_, ev.t, &SliceRun::StartCompute);
        Arrive(dl_, ev.t, ev.frame, &SliceRun::StartDl);
        break;
      case EventType::kDlDone:
        f.t_dl_done = ev.t;
        Release(dl_, ev.t, &SliceRun::StartDl);
        Complete(ev.frame);
        Generate(ev.t);
        break;
    }
  }

  void Complete(std::int64_t id) {
    const Frame& f = frames_[id];
    FrameRecord rec;
    rec.frame_id = id;
    rec.t_done_ms = f.t_dl_done;
    rec.parts.loading = f.t_loaded - f.t_gen;
    rec.parts.ul_tx = f.t_ul_done - f.t_loaded;
    rec.parts.backhaul = f.t_compute_arrive - f.t_ul_done;
    rec.parts.queueing = f.t_compute_start - f.t_compute_arrive;
    rec.parts.compute = f.t_compute_done - f.t_compute_start;
    rec.parts.dl_tx = f.t_dl_done - f.t_compute_done;
    rec.latency_ms = rec.parts.Total();
    trace_.frames.push_back(rec);
  }

  SimulationParams params_;
  ConfigAction action_;
  NetworkState state_;
  double horizon_ms_;
  EngineConfig cfg_;
  Rng rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};

  double ul_rate_bps_ = 0;
  double dl_rate_bps_ = 0;
  double backhaul_bps_ = 0;
  double cpu_share_ = 1;
  double loading_ms_ = 0;
  double propagation_ms_ = 0;

  std::priority_queue<Event, std::vector<Event>, EventLater> events_;
  std::uint64_t next_seq_ = 0;
  std::vector<Frame> frames_;
  Station ul_, backhaul_, compute_, dl_;
  LatencyTrace trace_;
};

}  // namespace

LatencyTrace Simulate(const SimulationParams& params, const ConfigAction& action,
                      const NetworkState& state, double duration_s,
                      std::uint64_t seed, const EngineConfig& cfg) {
  action.Validate();
  state.Validate();
  if (!(duration_s > 0)) throw RangeError("simulation duration must be > 0");
  return SliceRun(params, action, state, duration_s, seed, cfg).Run();
}

}  // namespace slicetune
