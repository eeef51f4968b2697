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

#ifndef LMM_MODEL_IO_H_
#define LMM_MODEL_IO_H_

#include <iosfwd>
#include <string>

#include "lmm/trainer.h"

namespace lmm {

inline constexpr uint32_t kModelVersion = 1;

struct StoredModel {
  MappingPair mappings;
  std::string vocab_path;
};

// "LMM1", u32 version, u64 d, d_x, d_y, Lx row-major f64, Ly row-major f64,
// u64 byte length + UTF-8 vocabulary path. Little-endian throughout.
void WriteModel(std::ostream& out, const MappingPair& mappings, const std::string& vocab_path);
StoredModel ReadModel(std::istream& in);
void WriteModelFile(const std::string& path, const MappingPair& mappings,
                    const std::string& vocab_path);
StoredModel ReadModelFile(const std::string& path);

}  // namespace lmm

#endif  // LMM_MODEL_IO_H_
