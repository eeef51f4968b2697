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

#ifndef LMM_COMMON_H_
#define LMM_COMMON_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lmm {

// Malformed or missing input data (bad files, unparsable fields).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyCorpusError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyKnowledgeError : public DataError {
 public:
  using DataError::DataError;
};

// Non-finite values or failed factorizations inside the optimizer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Warnings go to stderr unless silenced. Tests silence them.
void Warn(std::string_view message);
void SetWarningsEnabled(bool enabled);
bool WarningsEnabled();

// Whitespace split plus ASCII lowercasing. Bytes >= 0x80 pass through so
// UTF-8 terms survive intact.
std::vector<std::string> Tokenize(std::string_view text);

// Splits on a single delimiter character, keeping empty fields.
std::vector<std::string> SplitFields(std::string_view line, char delimiter);

// FNV-1a, 64 bit.
uint64_t Fnv1a64(std::string_view data);

}  // namespace lmm

#endif  // LMM_COMMON_H_
