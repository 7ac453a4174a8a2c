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

#include "slicetune/sim/trace_io.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "slicetune/common/errors.h"

namespace slicetune {

namespace {

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void WriteTrace(std::ostream& os, const LatencyTrace& trace) {
  os << "# frame_id, t_done_ms, latency_ms, loading, ul_tx, backhaul, queueing, "
        "compute, dl_tx\n";
  os << "# duration_s = " << FormatDouble(trace.duration_s) << "\n";
  for (const auto& f : trace.frames) {
    os << f.frame_id << ", " << FormatDouble(f.t_done_ms) << ", "
       << FormatDouble(f.latency_ms) << ", " << FormatDouble(f.parts.loading)
       << ", " << FormatDouble(f.parts.ul_tx) << ", "
       << FormatDouble(f.parts.backhaul) << ", "
       << FormatDouble(f.parts.queueing) << ", "
       << FormatDouble(f.parts.compute) << ", " << FormatDouble(f.parts.dl_tx)
       << "\n";
  }
}

LatencyTrace ReadTrace(std::istream& is) {
  LatencyTrace trace;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto pos = line.find("duration_s =");
      if (pos != std::string::npos) {
        trace.duration_s = std::stod(line.substr(pos + 12));
      }
      continue;
    }
    std::vector<double> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        cols.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw FormatError("trace line " + std::to_string(lineno) +
                          ": cannot parse '" + cell + "'");
      }
    }
    if (cols.size() != 9) {
      throw FormatError("trace line " + std::to_string(lineno) + ": expected 9 "
                        "columns, got " + std::to_string(cols.size()));
    }
    FrameRecord f;
    f.frame_id = static_cast<std::int64_t>(cols[0]);
    f.t_done_ms = cols[1];
    f.latency_ms = cols[2];
    f.parts = {cols[3], cols[4], cols[5], cols[6], cols[7], cols[8]};
    trace.frames.push_back(f);
  }
  return trace;
}

void SaveTrace(const std::filesystem::path& path, const LatencyTrace& trace) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  WriteTrace(os, trace);
}

LatencyTrace LoadTrace(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open trace " + path.string());
  return ReadTrace(is);
}

}  // namespace slicetune
