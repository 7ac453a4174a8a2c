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

#ifndef SLICETUNE_COMMON_RNG_H_
#define SLICETUNE_COMMON_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace slicetune {

// All randomness in the library flows from explicit seeds. There is no global
// generator; every stochastic call derives its own seed from the run seed and
// its position in the run.
using Rng = std::mt19937_64;

enum class Stage : std::uint64_t {
  kReference = 0,
  kStage1 = 1,
  kStage2 = 2,
  kStage3 = 3,
  kOracle = 4,
  kBaseline = 5,
  kTest = 6,
};

// splitmix64 finalizer.
std::uint64_t Mix64(std::uint64_t x);

// FNV-1a over the purpose tag, so call sites can name their stream.
std::uint64_t HashTag(std::string_view tag);

// seed = hash(run_seed, stage, iteration, worker, purpose).
std::uint64_t DeriveSeed(std::uint64_t run_seed, Stage stage,
                         std::uint64_t iteration, std::uint64_t worker,
                         std::string_view purpose);

// Child seed for sub-streams of an already derived seed.
std::uint64_t SubSeed(std::uint64_t seed, std::uint64_t index);

inline Rng MakeRng(std::uint64_t seed) { return Rng(seed); }

}  // namespace slicetune

#endif  // SLICETUNE_COMMON_RNG_H_
