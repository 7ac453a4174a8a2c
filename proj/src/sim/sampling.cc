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

#include "slicetune/sim/sampling.h"

#include <random>
#include <stdexcept>

#include "slicetune/common/rng.h"

namespace slicetune {

std::vector<ConfigAction> SampleActions(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<ConfigAction> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, ConfigAction::kDim> u{};
    for (auto& v : u) v = uni(rng);
    out.push_back(ConfigAction::FromNormalized(u));
  }
  return out;
}

std::vector<ConfigAction> GridActions(const std::vector<double>& levels) {
  if (levels.empty()) throw std::invalid_argument("grid needs at least one level");
  for (double l : levels) {
    if (!(l >= 0 && l <= 1)) throw std::invalid_argument("grid levels must be in [0, 1]");
  }
  const std::size_t k = levels.size();
  std::size_t total = 1;
  for (std::size_t d = 0; d < ConfigAction::kDim; ++d) total *= k;
  std::vector<ConfigAction> out;
  out.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::array<double, ConfigAction::kDim> u{};
    std::size_t rem = idx;
    for (std::size_t d = ConfigAction::kDim; d-- > 0;) {
      u[d] = levels[rem % k];
      rem /= k;
    }
    out.push_back(ConfigAction::FromNormalized(u));
  }
  return out;
}

}  // namespace slicetune
