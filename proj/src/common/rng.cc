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

#include "slicetune/common/rng.h"

namespace slicetune {

std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t HashTag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t DeriveSeed(std::uint64_t run_seed, Stage stage,
                         std::uint64_t iteration, std::uint64_t worker,
                         std::string_view purpose) {
  std::uint64_t h = Mix64(run_seed);
  h = Mix64(h ^ static_cast<std::uint64_t>(stage));
  h = Mix64(h ^ iteration);
  h = Mix64(h ^ worker);
  return Mix64(h ^ HashTag(purpose));
}

std::uint64_t SubSeed(std::uint64_t seed, std::uint64_t index) {
  return Mix64(Mix64(seed) ^ index);
}

}  // namespace slicetune
