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

#ifndef LMM_SRC_BINARY_IO_H_
#define LMM_SRC_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "lmm/common.h"

namespace lmm::internal {

// Explicit little-endian encoding independent of host byte order.
template <typename UInt>
void WriteLittle(std::ostream& out, UInt value) {
  unsigned char bytes[sizeof(UInt)];
  for (size_t i = 0; i < sizeof(UInt); ++i) {
    bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(UInt));
}

template <typename UInt>
UInt ReadLittle(std::istream& in) {
  unsigned char bytes[sizeof(UInt)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(UInt))) {
    throw DataError("unexpected end of binary file");
  }
  UInt value = 0;
  for (size_t i = 0; i < sizeof(UInt); ++i) {
    value |= static_cast<UInt>(bytes[i]) << (8 * i);
  }
  return value;
}

inline void WriteF64(std::ostream& out, double value) {
  WriteLittle<uint64_t>(out, std::bit_cast<uint64_t>(value));
}

inline double ReadF64(std::istream& in) {
  return std::bit_cast<double>(ReadLittle<uint64_t>(in));
}

inline void WriteMagic(std::ostream& out, const char (&magic)[5]) {
  out.write(magic, 4);
}

inline void ExpectMagic(std::istream& in, const char (&magic)[5]) {
  char buf[4];
  if (!in.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
    throw DataError(std::string("bad magic, expected ") + magic);
  }
}

}  // namespace lmm::internal

#endif  // LMM_SRC_BINARY_IO_H_
