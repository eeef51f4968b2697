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

#include "lmm/model_io.h"

#include <fstream>

#include "binary_io.h"
#include "lmm/common.h"

namespace lmm {
namespace {

constexpr uint64_t kMaxDimension = uint64_t{1} << 32;

void WriteRowMajor(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) internal::WriteF64(out, m(i, j));
}

Eigen::MatrixXd ReadRowMajor(std::istream& in, uint64_t rows, uint64_t cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = internal::ReadF64(in);
  return m;
}

}  // namespace

void WriteModel(std::ostream& out, const MappingPair& mappings, const std::string& vocab_path) {
  if (mappings.lx.rows() != mappings.ly.rows()) {
    throw std::invalid_argument("Lx and Ly latent dimensions differ");
  }
  internal::WriteMagic(out, "LMM1");
  internal::WriteLittle<uint32_t>(out, kModelVersion);
  internal::WriteLittle<uint64_t>(out, static_cast<uint64_t>(mappings.dim()));
  internal::WriteLittle<uint64_t>(out, static_cast<uint64_t>(mappings.dx()));
  internal::WriteLittle<uint64_t>(out, static_cast<uint64_t>(mappings.dy()));
  WriteRowMajor(out, mappings.lx);
  WriteRowMajor(out, mappings.ly);
  internal::WriteLittle<uint64_t>(out, vocab_path.size());
  out.write(vocab_path.data(), static_cast<std::streamsize>(vocab_path.size()));
}

StoredModel ReadModel(std::istream& in) {
  internal::ExpectMagic(in, "LMM1");
  const uint32_t version = internal::ReadLittle<uint32_t>(in);
  if (version != kModelVersion) {
    throw DataError("unsupported model version " + std::to_string(version));
  }
  const uint64_t d = internal::ReadLittle<uint64_t>(in);
  const uint64_t dx = internal::ReadLittle<uint64_t>(in);
  const uint64_t dy = internal::ReadLittle<uint64_t>(in);
  if (d == 0 || d > kMaxDimension || dx > kMaxDimension || dy > kMaxDimension) {
    throw DataError("implausible model dimensions");
  }
  StoredModel model;
  model.mappings.lx = ReadRowMajor(in, d, dx);
  model.mappings.ly = ReadRowMajor(in, d, dy);
  const uint64_t length = internal::ReadLittle<uint64_t>(in);
  if (length > (1u << 20)) throw DataError("vocabulary path length too large");
  model.vocab_path.resize(length);
  if (length > 0 && !in.read(model.vocab_path.data(), static_cast<std::streamsize>(length))) {
    throw DataError("truncated vocabulary path in model file");
  }
  if (!model.mappings.AllFinite()) throw DataError("model contains non-finite entries");
  return model;
}

void WriteModelFile(const std::string& path, const MappingPair& mappings,
                    const std::string& vocab_path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  WriteModel(out, mappings, vocab_path);
  if (!out) throw DataError("failed writing " + path);
}

StoredModel ReadModelFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return ReadModel(in);
}

}  // namespace lmm
