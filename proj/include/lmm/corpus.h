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

// Click-log ingestion, the shared query/title vocabulary, term vectors and
// the empirical cross-covariance C = (1/n) sum_i x_i y_i^T.

#ifndef LMM_CORPUS_H_
#define LMM_CORPUS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lmm/sparse.h"

namespace lmm {

// Bidirectional term <-> id map. Ids are dense in [0, size()).
class Vocabulary {
 public:
  Vocabulary() = default;

  // Returns the id of `term`, appending it if it is new.
  uint32_t Add(const std::string& term);
  std::optional<uint32_t> Lookup(const std::string& term) const;
  // Throws std::out_of_range for id >= size().
  const std::string& Term(uint32_t id) const;

  size_t size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }

  // One term per line; the 0-based line number is the id.
  void Save(std::ostream& out) const;
  static Vocabulary Load(std::istream& in);
  void SaveFile(const std::string& path) const;
  static Vocabulary LoadFile(const std::string& path);

  bool operator==(const Vocabulary& other) const { return terms_ == other.terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, uint32_t> ids_;
};

struct TermEntry {
  uint32_t id;
  double weight;
};

// Sparse vector with strictly increasing ids, finite non-zero weights.
class TermVector {
 public:
  TermVector() = default;
  explicit TermVector(size_t dim) : dim_(dim) {}

  // Accepts entries in any order: duplicates are summed, zeros dropped.
  // Throws std::invalid_argument on id >= dim or a non-finite weight.
  static TermVector FromEntries(size_t dim, std::vector<TermEntry> entries);

  std::span<const TermEntry> entries() const { return entries_; }
  size_t dim() const { return dim_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  double Dot(const TermVector& other) const;
  double Sum() const;
  TermVector Scaled(double factor) const;
  double WeightOf(uint32_t id) const;

 private:
  size_t dim_ = 0;
  std::vector<TermEntry> entries_;
};

struct ClickRecord {
  std::string query;
  std::string doc_id;
  std::string doc_title;
  int64_t clicks = 0;
};

struct ClickLog {
  std::vector<ClickRecord> records;
  size_t skipped_lines = 0;
};

// Parses `query\tdoc_id\tdoc_title\tclicks` lines. Lines with fewer than four
// fields are skipped with a counted warning; a malformed click count is a
// DataError carrying `source:line`.
ClickLog ReadClickLog(std::istream& in, const std::string& source = "<stream>");
ClickLog ReadClickLogFile(const std::string& path);

// Every term occurring at least `min_count` times across queries and titles,
// ids in first-occurrence order. Throws EmptyCorpusError on no records.
Vocabulary BuildVocabulary(std::span<const ClickRecord> records, int min_count);

// idf(t) = ln((N + 1) / (df_t + 1)) + 1 over the N distinct documents.
// Indexed by term id; terms found in no title still get a (maximal) value.
std::vector<double> ComputeIdf(std::span<const ClickRecord> records,
                               const Vocabulary& vocab);

// Raw term counts over the tokenized text; out-of-vocabulary terms dropped.
TermVector VectorizeQuery(std::string_view text, const Vocabulary& vocab);
// tf(t) * idf(t) over the tokenized title.
TermVector VectorizeDocument(std::string_view title, const Vocabulary& vocab,
                             std::span<const double> idf);

struct WeightedPair {
  TermVector x;
  TermVector y;
  double weight = 1.0;
};

// Query/title pairs from records with clicks >= 1, weighted by click count.
std::vector<WeightedPair> MakeTrainingPairs(std::span<const ClickRecord> records,
                                            const Vocabulary& vocab,
                                            std::span<const double> idf);

class CrossCovariance {
 public:
  CrossCovariance() = default;
  CrossCovariance(SparseMatrix matrix, double total_weight)
      : matrix_(std::move(matrix)), total_weight_(total_weight) {}

  size_t rows() const { return matrix_.rows(); }
  size_t cols() const { return matrix_.cols(); }
  size_t nnz() const { return matrix_.nnz(); }
  const SparseMatrix& matrix() const { return matrix_; }
  // Weighted pair count n; zero when loaded from a cache file.
  double total_weight() const { return total_weight_; }
  double Get(size_t u, size_t v) const { return matrix_.Get(u, v); }

  CrossCovariance Resized(size_t rows, size_t cols) const {
    return CrossCovariance(matrix_.Resized(rows, cols), total_weight_);
  }

 private:
  SparseMatrix matrix_;
  double total_weight_ = 0.0;
};

// Unnormalized running sum of weighted outer products.
class CovarianceAccumulator {
 public:
  CovarianceAccumulator(size_t rows, size_t cols) : rows_(rows), cols_(cols) {}

  void Add(const TermVector& x, const TermVector& y, double weight = 1.0);
  // Adds the partial sums of another accumulator of the same shape.
  void Merge(const CovarianceAccumulator& other);
  double total_weight() const { return total_weight_; }
  // Throws EmptyCorpusError when nothing was accumulated.
  CrossCovariance Finalize() const;

 private:
  size_t rows_;
  size_t cols_;
  double total_weight_ = 0.0;
  std::unordered_map<uint64_t, double> sums_;
};

// Accumulates over fixed chunks of `pairs` on `workers` threads and merges
// the chunk sums in chunk order. Throws EmptyCorpusError on zero pairs.
CrossCovariance BuildCrossCovariance(std::span<const WeightedPair> pairs,
                                     size_t rows, size_t cols, int workers = 1,
                                     size_t chunk_size = 4096);

// Binary cache: "LMC1", u64 rows, cols, nnz, then (u32 u, u32 v, f64 value)
// triples, all little-endian.
void WriteCovarianceCache(std::ostream& out, const CrossCovariance& c);
CrossCovariance ReadCovarianceCache(std::istream& in);
void WriteCovarianceCacheFile(const std::string& path, const CrossCovariance& c);
CrossCovariance ReadCovarianceCacheFile(const std::string& path);

}  // namespace lmm

#endif  // LMM_CORPUS_H_
