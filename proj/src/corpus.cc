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

#include "lmm/corpus.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "binary_io.h"
#include "lmm/common.h"
#include "lmm/parallel.h"

namespace lmm {
namespace {

void StripCarriageReturn(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

uint64_t PackKey(uint32_t u, uint32_t v) {
  return (static_cast<uint64_t>(u) << 32) | v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Vocabulary

uint32_t Vocabulary::Add(const std::string& term) {
  auto [it, inserted] = ids_.try_emplace(term, static_cast<uint32_t>(terms_.size()));
  if (inserted) terms_.push_back(term);
  return it->second;
}

std::optional<uint32_t> Vocabulary::Lookup(const std::string& term) const {
  const auto it = ids_.find(term);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::Term(uint32_t id) const {
  if (id >= terms_.size()) throw std::out_of_range("term id out of range");
  return terms_[id];
}

void Vocabulary::Save(std::ostream& out) const {
  for (const auto& term : terms_) out << term << '\n';
}

Vocabulary Vocabulary::Load(std::istream& in) {
  Vocabulary vocab;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    StripCarriageReturn(line);
    if (line.empty()) {
      throw DataError("vocabulary line " + std::to_string(line_no) + ": empty term");
    }
    if (vocab.Lookup(line)) {
      throw DataError("vocabulary line " + std::to_string(line_no) +
                      ": duplicate term '" + line + "'");
    }
    vocab.Add(line);
  }
  return vocab;
}

void Vocabulary::SaveFile(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  Save(out);
}

Vocabulary Vocabulary::LoadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return Load(in);
}

// ---------------------------------------------------------------------------
// TermVector

TermVector TermVector::FromEntries(size_t dim, std::vector<TermEntry> entries) {
  for (const TermEntry& e : entries) {
    if (e.id >= dim) throw std::invalid_argument("term id exceeds vector dim");
    if (!std::isfinite(e.weight)) throw std::invalid_argument("non-finite term weight");
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const TermEntry& a, const TermEntry& b) { return a.id < b.id; });
  TermVector v(dim);
  for (size_t i = 0; i < entries.size();) {
    const uint32_t id = entries[i].id;
    double sum = 0.0;
    for (; i < entries.size() && entries[i].id == id; ++i) sum += entries[i].weight;
    if (sum != 0.0) v.entries_.push_back({id, sum});
  }
  return v;
}

double TermVector::Dot(const TermVector& other) const {
  double sum = 0.0;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() && b != other.entries_.end()) {
    if (a->id < b->id) {
      ++a;
    } else if (b->id < a->id) {
      ++b;
    } else {
      sum += a->weight * b->weight;
      ++a;
      ++b;
    }
  }
  return sum;
}

double TermVector::Sum() const {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.weight;
  return sum;
}

TermVector TermVector::Scaled(double factor) const {
  std::vector<TermEntry> scaled(entries_.begin(), entries_.end());
  for (auto& e : scaled) e.weight *= factor;
  return FromEntries(dim_, std::move(scaled));
}

double TermVector::WeightOf(uint32_t id) const {
  const auto it = std::lower_bound(
      entries_.begin(), entries_.end(), id,
      [](const TermEntry& e, uint32_t value) { return e.id < value; });
  return (it != entries_.end() && it->id == id) ? it->weight : 0.0;
}

// ---------------------------------------------------------------------------
// Click log

ClickLog ReadClickLog(std::istream& in, const std::string& source) {
  ClickLog log;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    StripCarriageReturn(line);
    if (line.empty()) continue;
    auto fields = SplitFields(line, '\t');
    if (fields.size() < 4) {
      ++log.skipped_lines;
      Warn(source + ":" + std::to_string(line_no) + ": expected 4 tab-separated fields, got " +
           std::to_string(fields.size()) + "; skipped");
      continue;
    }
    const std::string& clicks_field = fields[3];
    int64_t clicks = 0;
    const auto [ptr, ec] =
        std::from_chars(clicks_field.data(), clicks_field.data() + clicks_field.size(), clicks);
    if (ec != std::errc() || ptr != clicks_field.data() + clicks_field.size() || clicks < 0) {
      throw DataError(source + ":" + std::to_string(line_no) + ": invalid click count '" +
                      clicks_field + "'");
    }
    log.records.push_back(
        {std::move(fields[0]), std::move(fields[1]), std::move(fields[2]), clicks});
  }
  if (log.skipped_lines > 0) {
    Warn(source + ": skipped " + std::to_string(log.skipped_lines) + " malformed line(s)");
  }
  return log;
}

ClickLog ReadClickLogFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return ReadClickLog(in, path);
}

// ---------------------------------------------------------------------------
// Vocabulary / idf / vectorizers

Vocabulary BuildVocabulary(std::span<const ClickRecord> records, int min_count) {
  if (records.empty()) throw EmptyCorpusError("click log contains no records");
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");

  std::unordered_map<std::string, int64_t> counts;
  std::vector<std::string> order;
  auto count = [&](std::string_view text) {
    for (auto& token : Tokenize(text)) {
      auto [it, inserted] = counts.try_emplace(token, 0);
      if (inserted) order.push_back(token);
      ++it->second;
    }
  };
  for (const auto& r : records) {
    count(r.query);
    count(r.doc_title);
  }

  Vocabulary vocab;
  for (const auto& term : order) {
    if (counts[term] >= min_count) vocab.Add(term);
  }
  return vocab;
}

std::vector<double> ComputeIdf(std::span<const ClickRecord> records,
                               const Vocabulary& vocab) {
  std::unordered_set<std::string> seen_docs;
  std::vector<int64_t> df(vocab.size(), 0);
  for (const auto& r : records) {
    if (!seen_docs.insert(r.doc_id).second) continue;
    std::unordered_set<uint32_t> in_title;
    for (const auto& token : Tokenize(r.doc_title)) {
      if (auto id = vocab.Lookup(token)) in_title.insert(*id);
    }
    for (uint32_t id : in_title) ++df[id];
  }
  const double n_docs = static_cast<double>(seen_docs.size());
  std::vector<double> idf(vocab.size());
  for (size_t t = 0; t < idf.size(); ++t) {
    idf[t] = std::log((n_docs + 1.0) / (static_cast<double>(df[t]) + 1.0)) + 1.0;
  }
  return idf;
}

TermVector VectorizeQuery(std::string_view text, const Vocabulary& vocab) {
  std::vector<TermEntry> entries;
  for (const auto& token : Tokenize(text)) {
    if (auto id = vocab.Lookup(token)) entries.push_back({*id, 1.0});
  }
  return TermVector::FromEntries(vocab.size(), std::move(entries));
}

TermVector VectorizeDocument(std::string_view title, const Vocabulary& vocab,
                             std::span<const double> idf) {
  if (idf.size() < vocab.size()) {
    throw std::invalid_argument("idf table smaller than vocabulary");
  }
  TermVector tf = VectorizeQuery(title, vocab);
  std::vector<TermEntry> entries(tf.entries().begin(), tf.entries().end());
  for (auto& e : entries) e.weight *= idf[e.id];
  return TermVector::FromEntries(vocab.size(), std::move(entries));
}

std::vector<WeightedPair> MakeTrainingPairs(std::span<const ClickRecord> records,
                                            const Vocabulary& vocab,
                                            std::span<const double> idf) {
  std::vector<WeightedPair> pairs;
  pairs.reserve(records.size());
  for (const auto& r : records) {
    if (r.clicks < 1) continue;
    pairs.push_back({VectorizeQuery(r.query, vocab),
                     VectorizeDocument(r.doc_title, vocab, idf),
                     static_cast<double>(r.clicks)});
  }
  return pairs;
}

// ---------------------------------------------------------------------------
// Cross-covariance

void CovarianceAccumulator::Add(const TermVector& x, const TermVector& y, double weight) {
  if (x.dim() > rows_ || y.dim() > cols_) {
    throw std::invalid_argument("term vector dim exceeds covariance shape");
  }
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw std::invalid_argument("pair weight must be positive and finite");
  }
  total_weight_ += weight;
  for (const auto& xe : x.entries()) {
    for (const auto& ye : y.entries()) {
      sums_[PackKey(xe.id, ye.id)] += weight * xe.weight * ye.weight;
    }
  }
}

void CovarianceAccumulator::Merge(const CovarianceAccumulator& other) {
  if (other.rows_ != rows_ || other.cols_ != cols_) {
    throw std::invalid_argument("merging accumulators of different shapes");
  }
  total_weight_ += other.total_weight_;
  for (const auto& [key, value] : other.sums_) sums_[key] += value;
}

CrossCovariance CovarianceAccumulator::Finalize() const {
  if (!(total_weight_ > 0.0)) throw EmptyCorpusError("no training pairs accumulated");
  std::vector<Triplet> triplets;
  triplets.reserve(sums_.size());
  for (const auto& [key, value] : sums_) {
    triplets.push_back({static_cast<uint32_t>(key >> 32),
                        static_cast<uint32_t>(key & 0xFFFFFFFFu), value / total_weight_});
  }
  SparseMatrix m = SparseMatrix::FromTriplets(rows_, cols_, std::move(triplets));
  if (!m.AllFinite()) throw NumericalError("non-finite cross-covariance entry");
  return CrossCovariance(std::move(m), total_weight_);
}

CrossCovariance BuildCrossCovariance(std::span<const WeightedPair> pairs, size_t rows,
                                     size_t cols, int workers, size_t chunk_size) {
  if (pairs.empty()) throw EmptyCorpusError("no training pairs");
  const size_t chunks = NumChunks(pairs.size(), chunk_size);
  std::vector<CovarianceAccumulator> partial(chunks, CovarianceAccumulator(rows, cols));
  ParallelForChunks(pairs.size(), chunk_size, workers, [&](const ChunkRange& range) {
    auto& acc = partial[range.index];
    for (size_t i = range.begin; i < range.end; ++i) {
      acc.Add(pairs[i].x, pairs[i].y, pairs[i].weight);
    }
  });
  CovarianceAccumulator total(rows, cols);
  for (const auto& acc : partial) total.Merge(acc);
  return total.Finalize();
}

void WriteCovarianceCache(std::ostream& out, const CrossCovariance& c) {
  internal::WriteMagic(out, "LMC1");
  internal::WriteLittle<uint64_t>(out, c.rows());
  internal::WriteLittle<uint64_t>(out, c.cols());
  internal::WriteLittle<uint64_t>(out, c.nnz());
  for (const Triplet& t : c.matrix().ToTriplets()) {
    internal::WriteLittle<uint32_t>(out, t.row);
    internal::WriteLittle<uint32_t>(out, t.col);
    internal::WriteF64(out, t.value);
  }
}

CrossCovariance ReadCovarianceCache(std::istream& in) {
  internal::ExpectMagic(in, "LMC1");
  const uint64_t rows = internal::ReadLittle<uint64_t>(in);
  const uint64_t cols = internal::ReadLittle<uint64_t>(in);
  const uint64_t nnz = internal::ReadLittle<uint64_t>(in);
  if (rows > UINT32_MAX || cols > UINT32_MAX) throw DataError("covariance cache too large");
  std::vector<Triplet> triplets;
  triplets.reserve(nnz);
  for (uint64_t i = 0; i < nnz; ++i) {
    Triplet t;
    t.row = internal::ReadLittle<uint32_t>(in);
    t.col = internal::ReadLittle<uint32_t>(in);
    t.value = internal::ReadF64(in);
    if (t.row >= rows || t.col >= cols) {
      throw DataError("covariance cache entry " + std::to_string(i) + " out of range");
    }
    if (!std::isfinite(t.value)) {
      throw DataError("covariance cache entry " + std::to_string(i) + " is not finite");
    }
    triplets.push_back(t);
  }
  return CrossCovariance(SparseMatrix::FromTriplets(rows, cols, std::move(triplets)), 0.0);
}

void WriteCovarianceCacheFile(const std::string& path, const CrossCovariance& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  WriteCovarianceCache(out, c);
}

CrossCovariance ReadCovarianceCacheFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return ReadCovarianceCache(in);
}

}  // namespace lmm
