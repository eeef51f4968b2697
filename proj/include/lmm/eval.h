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

// Graded-relevance evaluation: NDCG@k with gain 2^label - 1 and discount
// log2(rank + 1), macro-averaged over queries and over head/tail splits.

#ifndef LMM_EVAL_H_
#define LMM_EVAL_H_

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lmm/corpus.h"
#include "lmm/scorer.h"

namespace lmm {

// 0 = Bad, 1 = Fair, 2 = Good, 3 = Excellent.
struct Judgment {
  std::string query;
  std::string doc_id;
  int label = 0;
};

class JudgmentSet {
 public:
  // Throws DataError on a duplicate (query, doc_id) or a label outside 0..3.
  void Add(const Judgment& judgment);

  // Unjudged documents are Bad.
  int Label(const std::string& query, const std::string& doc_id) const;
  bool HasQuery(const std::string& query) const;
  std::vector<int> LabelsFor(const std::string& query) const;
  size_t size() const { return count_; }

 private:
  std::map<std::string, std::map<std::string, int>> labels_;
  size_t count_ = 0;
};

JudgmentSet ReadJudgments(std::istream& in, const std::string& source = "<stream>");

// Ideal DCG from `ranked_labels` sorted descending. Returns 0 when the ideal
// DCG is 0, and 0 with a warning on an empty list. Throws
// std::invalid_argument on k < 1 or a label outside 0..3.
double NdcgAtK(std::span<const int> ranked_labels, int k);
// Same, with the ideal ordering taken from `ideal_labels` (e.g. all judged
// labels of the query).
double NdcgAtK(std::span<const int> ranked_labels, std::span<const int> ideal_labels, int k);

struct HeadTailSplit {
  std::vector<std::string> head;
  std::vector<std::string> tail;
};

// Sorted by frequency descending (ties lexicographic); the first ceil(n/2)
// queries are head. Missing frequencies count as 0.
HeadTailSplit SplitHeadTail(std::vector<std::string> queries,
                            const std::map<std::string, double>& frequency);

// Total clicks per query.
std::map<std::string, double> QueryFrequencies(std::span<const ClickRecord> records);

inline const std::vector<int> kDefaultCutoffs = {1, 3, 5, 10};

struct EvalReport {
  std::vector<int> cutoffs;
  // "all", "head", "tail" -> mean NDCG per cutoff.
  std::map<std::string, std::vector<double>> mean_ndcg;
  std::map<std::string, size_t> query_count;
  // Evaluated query -> NDCG per cutoff.
  std::map<std::string, std::vector<double>> per_query;
  size_t excluded_queries = 0;

  void WriteTable(std::ostream& out) const;
  // split,cutoff,ndcg,n_queries
  void WriteCsv(std::ostream& out) const;
};

// Queries without any judgment are excluded with a counted warning. The head
// / tail split is taken over the evaluated queries.
EvalReport EvaluateRun(const std::vector<RankedList>& rankings, const JudgmentSet& judgments,
                       const std::map<std::string, double>& frequency,
                       const std::vector<int>& cutoffs = kDefaultCutoffs);

struct TTestResult {
  double t = 0.0;
  double p_value = 1.0;
  size_t n = 0;
};

// Two-sided paired t-test on per-query scores. Returns p = 1 when the
// differences have zero variance and zero mean.
TTestResult PairedTTest(std::span<const double> a, std::span<const double> b);

}  // namespace lmm

#endif  // LMM_EVAL_H_
