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

// Semantic knowledge: synonym pairs mined from the click bipartite graph,
// tag-term pairs mined from tagged documents, and the symmetric knowledge
// covariance matrices built from weighted object pairs.

#ifndef LMM_KNOWLEDGE_H_
#define LMM_KNOWLEDGE_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lmm/corpus.h"
#include "lmm/sparse.h"

namespace lmm {

inline constexpr char kTagPrefix[] = "tag:";

// Query with the token at `position` replaced by '*', joined by single
// spaces. Throws std::out_of_range when position >= tokens.size().
std::string ExtractContext(std::span<const std::string> tokens, size_t position);

// 1 / (1 + exp(-support / scale)).
double LogisticWeight(double support, double scale = 1.0);

// Documents and the distinct queries that clicked them. Both sides are kept
// sorted so that mining is independent of log order.
class ClickGraph {
 public:
  void AddClick(const std::string& query, const std::string& doc_id);
  // Records with clicks >= 1 become edges.
  static ClickGraph FromRecords(std::span<const ClickRecord> records);

  const std::map<std::string, std::set<std::string>>& queries_by_doc() const {
    return queries_by_doc_;
  }
  bool empty() const { return queries_by_doc_.empty(); }

 private:
  std::map<std::string, std::set<std::string>> queries_by_doc_;
};

struct SynonymPair {
  std::string term1;  // term1 < term2
  std::string term2;
  int64_t support = 0;
  double weight = 0.0;

  bool operator==(const SynonymPair&) const = default;
};

struct SynonymMiningOptions {
  size_t top_k = 1000;
  double logistic_scale = 1.0;
  // Candidates with support below this are discarded before ranking.
  int64_t min_support = 1;
  int workers = 1;
};

// For every document: collect the (term, context) pairs of its queries, pair
// up distinct terms sharing a context, and count each distinct
// (pair, context) once per document. Returns the top_k pairs by support
// (ties lexicographic on term1, term2).
std::vector<SynonymPair> MineSynonyms(const ClickGraph& graph,
                                      const SynonymMiningOptions& options = {});

struct TagTermPair {
  std::string tag;
  std::string term;
  double weight = 0.0;

  bool operator==(const TagTermPair&) const = default;
};

// tag -> tf-idf title vectors of the documents carrying that tag.
using TagCorpus = std::map<std::string, std::vector<TermVector>>;

// Builds a TagCorpus from `doc_id\ttag1,tag2,...` assignments and the
// per-document tf-idf vectors.
TagCorpus BuildTagCorpus(const std::map<std::string, std::vector<std::string>>& tags_by_doc,
                         const std::map<std::string, TermVector>& tfidf_by_doc);

// For each tag, averages its documents' vectors and keeps the top k terms by
// average weight (ties by lower term id). Tags with no documents are skipped
// with a warning.
std::vector<TagTermPair> MineTagTerms(const TagCorpus& corpus, const Vocabulary& vocab,
                                      size_t k);

// Appends "tag:<name>" for every tag so tag knowledge lives in the shared
// term space. Returns the number of terms added.
size_t InjectTags(Vocabulary& vocab, const std::vector<TagTermPair>& pairs);

struct KnowledgePair {
  std::string first;
  std::string second;
  double weight = 0.0;
};

std::vector<KnowledgePair> ToKnowledgePairs(const std::vector<SynonymPair>& pairs);
// The tag side is looked up with the "tag:" prefix.
std::vector<KnowledgePair> ToKnowledgePairs(const std::vector<TagTermPair>& pairs);

// R = (1/m) sum_i s_i (w1 w2^T + w2 w1^T) / 2, exactly symmetric.
class KnowledgeMatrix {
 public:
  KnowledgeMatrix() = default;
  KnowledgeMatrix(SparseMatrix matrix, size_t pair_count, size_t dropped)
      : matrix_(std::move(matrix)), pair_count_(pair_count), dropped_(dropped) {}

  size_t dim() const { return matrix_.rows(); }
  const SparseMatrix& matrix() const { return matrix_; }
  size_t pair_count() const { return pair_count_; }
  size_t dropped() const { return dropped_; }
  double Get(size_t u, size_t v) const { return matrix_.Get(u, v); }

  KnowledgeMatrix Resized(size_t dim) const {
    return KnowledgeMatrix(matrix_.Resized(dim, dim), pair_count_, dropped_);
  }

 private:
  SparseMatrix matrix_;
  size_t pair_count_ = 0;
  size_t dropped_ = 0;
};

// Pairs with a member missing from `vocab` are dropped and counted. Throws
// EmptyKnowledgeError when nothing is retained.
KnowledgeMatrix BuildKnowledgeMatrix(std::span<const KnowledgePair> pairs,
                                     const Vocabulary& vocab);

// File formats, all TSV.
//   synonyms:  term1  term2  support  weight   (support descending)
//   tags:      doc_id  tag1,tag2,...
//   tag-terms: tag  term  weight
void WriteSynonyms(std::ostream& out, const std::vector<SynonymPair>& pairs);
std::vector<SynonymPair> ReadSynonyms(std::istream& in, const std::string& source = "<stream>");
std::map<std::string, std::vector<std::string>> ReadTagAssignments(
    std::istream& in, const std::string& source = "<stream>");
void WriteTagTerms(std::ostream& out, const std::vector<TagTermPair>& pairs);
std::vector<TagTermPair> ReadTagTerms(std::istream& in, const std::string& source = "<stream>");

}  // namespace lmm

#endif  // LMM_KNOWLEDGE_H_
