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

#ifndef LMM_PARALLEL_H_
#define LMM_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace lmm {

// Chunk boundaries depend only on (n, chunk_size), never on the number of
// workers. Any per-chunk result reduced in chunk order is therefore
// bit-identical for every worker count.
struct ChunkRange {
  size_t index;
  size_t begin;
  size_t end;
};

size_t NumChunks(size_t n, size_t chunk_size);

// Runs `fn` once per chunk of [0, n) on up to `workers` threads. workers <= 0
// selects DefaultWorkerCount(). The first exception thrown by any chunk is
// rethrown on the calling thread after all workers have stopped.
void ParallelForChunks(size_t n, size_t chunk_size, int workers,
                       const std::function<void(const ChunkRange&)>& fn);

int DefaultWorkerCount();

}  // namespace lmm

#endif  // LMM_PARALLEL_H_
