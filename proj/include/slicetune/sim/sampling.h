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

#ifndef SLICETUNE_SIM_SAMPLING_H_
#define SLICETUNE_SIM_SAMPLING_H_

#include <cstdint>
#include <vector>

#include "slicetune/sim/types.h"

namespace slicetune {

// n actions drawn uniformly over the normalized action box; integral fields
// are rounded after scaling.
std::vector<ConfigAction> SampleActions(std::size_t n, std::uint64_t seed);

// Full factorial grid with the same fractional levels on every dimension.
std::vector<ConfigAction> GridActions(const std::vector<double>& levels = {0.0, 0.3,
                                                                          0.6, 0.9});

}  // namespace slicetune

#endif  // SLICETUNE_SIM_SAMPLING_H_
