/*
 * Copyright 2026 The LMM Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "lmm/parallel.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lmm {

size_t NumChunks(size_t n, size_t chunk_size) {
  if (chunk_size == 0) chunk_size = 1;
  return (n + chunk_size - 1) / chunk_size;
}

int DefaultWorkerCount() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void ParallelForChunks(size_t n, size_t chunk_size, int workers,
                       const std::function<void(const ChunkRange&)>& fn) {
  if (chunk_size == 0) chunk_size = 1;
  const size_t chunks = NumChunks(n, chunk_size);
  if (chunks == 0) return;
  if (workers <= 0) workers = DefaultWorkerCount();
  const size_t threads = std::min<size_t>(static_cast<size_t>(workers), chunks);

  auto range = [&](size_t c) {
    return ChunkRange{c, c * chunk_size, std::min(n, (c + 1) * chunk_size)};
  };

  if (threads <= 1) {
    for (size_t c = 0; c < chunks; ++c) fn(range(c));
    return;
  }

  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        fn(range(c));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace lmm
