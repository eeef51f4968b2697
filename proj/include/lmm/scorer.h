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

#ifndef LMM_SCORER_H_
#define LMM_SCORER_H_

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lmm/corpus.h"
#include "lmm/trainer.h"

namespace lmm {

// A trained mapping pair over a shared vocabulary (d_x = d_y = V).
class Model {
 public:
  Model(MappingPair mappings, Vocabulary vocab);

  const MappingPair& mappings() const { return mappings_; }
  const Vocabulary& vocab() const { return vocab_; }

  Eigen::VectorXd ProjectQuery(const TermVector& x) const;
  Eigen::VectorXd ProjectDocument(const TermVector& y) const;

 private:
  MappingPair mappings_;
  Vocabulary vocab_;
};

// <Lx x, Ly y>.
double LatentMatch(const Model& model, const TermVector& x, const TermVector& y);
// LatentMatch(x, y) + x^T y.
double ScoreIR(const Model& model, const TermVector& x, const TermVector& y);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct CollectionStats {
  size_t num_docs = 0;
  double avg_length = 0.0;
  std::vector<int64_t> doc_freq;  // by term id

  // doc_tf: raw term-frequency vectors of all documents.
  static CollectionStats FromTermFrequencies(const std::vector<TermVector>& doc_tf,
                                             size_t vocab_size);
};

// Okapi BM25 with idf = ln((N - df + 0.5) / (df + 0.5) + 1). Each distinct
// query term contributes once; the document length is the sum of doc_tf.
double Bm25Score(const CollectionStats& stats, const TermVector& query,
                 const TermVector& doc_tf, const Bm25Params& params = {});

struct Document {
  std::string id;
  TermVector tfidf;
  TermVector tf;
};

class DocumentCollection {
 public:
  // (doc_id, title) pairs; a repeated doc_id keeps its first title. The idf
  // table and BM25 statistics are computed from these documents.
  static DocumentCollection Build(const std::vector<std::pair<std::string, std::string>>& docs,
                                  const Vocabulary& vocab);
  static DocumentCollection FromRecords(std::span<const ClickRecord> records,
                                        const Vocabulary& vocab);

  const std::vector<Document>& documents() const { return documents_; }
  const CollectionStats& stats() const { return stats_; }
  const std::vector<double>& idf() const { return idf_; }
  size_t size() const { return documents_.size(); }
  // Index of doc_id, or documents().size() if absent.
  size_t IndexOf(const std::string& doc_id) const;

 private:
  std::vector<Document> documents_;
  std::map<std::string, size_t> index_;
  std::vector<double> idf_;
  CollectionStats stats_;
};

enum class ScoreMode { kLatent, kCombined, kBm25 };

std::string ScoreModeName(ScoreMode mode);
ScoreMode ParseScoreMode(const std::string& name);

struct RankedItem {
  std::string doc_id;
  double score;
};

// Scores non-increasing, ties by ascending doc_id.
struct RankedList {
  std::string query;
  std::vector<RankedItem> items;
};

struct RankOptions {
  ScoreMode mode = ScoreMode::kCombined;
  Bm25Params bm25;
  // bm25 mode only: skip documents sharing no term with the query.
  bool bm25_term_filter = false;
  int workers = 1;
};

// Scores every document (or only `candidates`, as indices into the
// collection) and returns the best k. Throws std::invalid_argument on k <= 0.
RankedList RankTopK(const Model& model, const std::string& query,
                    const DocumentCollection& collection, int k, const RankOptions& options = {},
                    const std::vector<size_t>* candidates = nullptr);

// query \t rank \t doc_id \t score (6 decimals), ranks starting at 1.
void WriteRankings(std::ostream& out, const std::vector<RankedList>& rankings);
std::vector<RankedList> ReadRankings(std::istream& in, const std::string& source = "<stream>");

// Candidate pools: query \t doc_id \t doc_title, in file order per query.
struct CandidateSet {
  std::vector<std::string> queries;  // first-appearance order
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> docs_by_query;
};
CandidateSet ReadCandidates(std::istream& in, const std::string& source = "<stream>");

}  // namespace lmm

#endif  // LMM_SCORER_H_
