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

#ifndef SLICETUNE_COMMON_PARALLEL_H_
#define SLICETUNE_COMMON_PARALLEL_H_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace slicetune {

// Runs body(i) for i in [0, n) on up to max_threads threads. Each index is
// processed exactly once; outputs must be written to per-index slots so the
// result does not depend on scheduling. The first exception is rethrown.
inline void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& body,
                        std::size_t max_threads = 0) {
  if (n == 0) return;
  std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  std::size_t threads = max_threads == 0 ? hw : std::min(max_threads, hw);
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace slicetune

#endif  // SLICETUNE_COMMON_PARALLEL_H_
