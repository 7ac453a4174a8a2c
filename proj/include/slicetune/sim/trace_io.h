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

#ifndef SLICETUNE_SIM_TRACE_IO_H_
#define SLICETUNE_SIM_TRACE_IO_H_

#include <filesystem>
#include <iosfwd>

#include "slicetune/sim/types.h"

namespace slicetune {

// One frame per line:
//   frame_id, t_done_ms, latency_ms, loading, ul_tx, backhaul, queueing,
//   compute, dl_tx
// preceded by '#' comment lines carrying the column names and duration.
// Values are printed with 17 significant digits, so a reload is exact.
void WriteTrace(std::ostream& os, const LatencyTrace& trace);
LatencyTrace ReadTrace(std::istream& is);

void SaveTrace(const std::filesystem::path& path, const LatencyTrace& trace);
LatencyTrace LoadTrace(const std::filesystem::path& path);

}  // namespace slicetune

#endif  // SLICETUNE_SIM_TRACE_IO_H_
