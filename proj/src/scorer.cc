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

#include "lmm/scorer.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "lmm/common.h"
#include "lmm/parallel.h"

namespace lmm {
namespace {

Eigen::VectorXd Project(const Eigen::MatrixXd& mapping, const TermVector& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mapping.rows());
  for (const auto& e : v.entries()) {
    if (e.id >= mapping.cols()) throw std::invalid_argument("term id exceeds mapping width");
    out.noalias() += e.weight * mapping.col(e.id);
  }
  return out;
}

bool SharesTerm(const TermVector& a, const TermVector& b) {
  auto x = a.entries().begin();
  auto y = b.entries().begin();
  while (x != a.entries().end() && y != b.entries().end()) {
    if (x->id == y->id) return true;
    if (x->id < y->id) ++x; else ++y;
  }
  return false;
}

}  // namespace

Model::Model(MappingPair mappings, Vocabulary vocab)
    : mappings_(std::move(mappings)), vocab_(std::move(vocab)) {
  const auto v = static_cast<Eigen::Index>(vocab_.size());
  if (mappings_.dx() != v || mappings_.dy() != v) {
    throw DataError("model dimensions (" + std::to_string(mappings_.dx()) + ", " +
                    std::to_string(mappings_.dy()) + ") do not match vocabulary size " +
                    std::to_string(vocab_.size()));
  }
}

Eigen::VectorXd Model::ProjectQuery(const TermVector& x) const { return Project(mappings_.lx, x); }

Eigen::VectorXd Model::ProjectDocument(const TermVector& y) const {
  return Project(mappings_.ly, y);
}

double LatentMatch(const Model& model, const TermVector& x, const TermVector& y) {
  if (x.empty() || y.empty()) return 0.0;
  return model.ProjectQuery(x).dot(model.ProjectDocument(y));
}

double ScoreIR(const Model& model, const TermVector& x, const TermVector& y) {
  return LatentMatch(model, x, y) + x.Dot(y);
}

CollectionStats CollectionStats::FromTermFrequencies(const std::vector<TermVector>& doc_tf,
                                                     size_t vocab_size) {
  CollectionStats stats;
  stats.num_docs = doc_tf.size();
  stats.doc_freq.assign(vocab_size, 0);
  double total_length = 0.0;
  for (const auto& tf : doc_tf) {
    total_length += tf.Sum();
    for (const auto& e : tf.entries()) {
      if (e.id < vocab_size) ++stats.doc_freq[e.id];
    }
  }
  stats.avg_length = doc_tf.empty() ? 0.0 : total_length / static_cast<double>(doc_tf.size());
  return stats;
}

double Bm25Score(const CollectionStats& stats, const TermVector& query, const TermVector& doc_tf,
                 const Bm25Params& params) {
  const double n = static_cast<double>(stats.num_docs);
  const double length = doc_tf.Sum();
  const double norm = stats.avg_length > 0.0 ? length / stats.avg_length : 0.0;
  double score = 0.0;
  for (const auto& q : query.entries()) {
    const double tf = doc_tf.WeightOf(q.id);
    if (tf == 0.0) continue;
    const double df =
        q.id < stats.doc_freq.size() ? static_cast<double>(stats.doc_freq[q.id]) : 0.0;
    const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
    score += idf * tf * (params.k1 + 1.0) /
             (tf + params.k1 * (1.0 - params.b + params.b * norm));
  }
  return score;
}

DocumentCollection DocumentCollection::Build(
    const std::vector<std::pair<std::string, std::string>>& docs, const Vocabulary& vocab) {
  DocumentCollection collection;
  std::vector<std::pair<std::string, std::string>> unique;
  for (const auto& [id, title] : docs) {
    if (collection.index_.emplace(id, unique.size()).second) unique.emplace_back(id, title);
  }
  std::vector<TermVector> tfs;
  tfs.reserve(unique.size());
  for (const auto& [id, title] : unique) tfs.push_back(VectorizeQuery(title, vocab));

  collection.stats_ = CollectionStats::FromTermFrequencies(tfs, vocab.size());
  const double n = static_cast<double>(unique.size());
  collection.idf_.resize(vocab.size());
  for (size_t t = 0; t < vocab.size(); ++t) {
    collection.idf_[t] =
        std::log((n + 1.0) / (static_cast<double>(collection.stats_.doc_freq[t]) + 1.0)) + 1.0;
  }
  for (size_t i = 0; i < unique.size(); ++i) {
    collection.documents_.push_back(
        {unique[i].first, VectorizeDocument(unique[i].second, vocab, collection.idf_),
         std::move(tfs[i])});
  }
  return collection;
}

DocumentCollection DocumentCollection::FromRecords(std::span<const ClickRecord> records,
                                                   const Vocabulary& vocab) {
  std::vector<std::pair<std::string, std::string>> docs;
  docs.reserve(records.size());
  for (const auto& r : records) docs.emplace_back(r.doc_id, r.doc_title);
  return Build(docs, vocab);
}

size_t DocumentCollection::IndexOf(const std::string& doc_id) const {
  const auto it = index_.find(doc_id);
  return it == index_.end() ? documents_.size() : it->second;
}

std::string ScoreModeName(ScoreMode mode) {
  switch (mode) {
    case ScoreMode::kLatent: return "latent";
    case ScoreMode::kCombined: return "combined";
    case ScoreMode::kBm25: return "bm25";
  }
  return "combined";
}

ScoreMode ParseScoreMode(const std::string& name) {
  if (name == "latent") return ScoreMode::kLatent;
  if (name == "combined") return ScoreMode::kCombined;
  if (name == "bm25") return ScoreMode::kBm25;
  throw std::invalid_argument("unknown scoring mode '" + name +
                              "' (expected latent, combined or bm25)");
}

RankedList RankTopK(const Model& model, const std::string& query,
                    const DocumentCollection& collection, int k, const RankOptions& options,
                    const std::vector<size_t>* candidates) {
  if (k <= 0) throw std::invalid_argument("k must be positive");
  const TermVector x = VectorizeQuery(query, model.vocab());
  const Eigen::VectorXd projected = model.ProjectQuery(x);
  const auto& docs = collection.documents();

  std::vector<size_t> pool;
  if (candidates) {
    pool = *candidates;
    for (size_t i : pool) {
      if (i >= docs.size()) throw std::out_of_range("candidate index outside collection");
    }
  } else {
    pool.resize(docs.size());
    for (size_t i = 0; i < docs.size(); ++i) pool[i] = i;
  }

  std::vector<double> scores(pool.size(), 0.0);
  std::vector<char> keep(pool.size(), 1);
  ParallelForChunks(pool.size(), 256, options.workers, [&](const ChunkRange& range) {
    for (size_t j = range.begin; j < range.end; ++j) {
      const Document& doc = docs[pool[j]];
      switch (options.mode) {
        case ScoreMode::kLatent:
          scores[j] = x.empty() ? 0.0 : projected.dot(model.ProjectDocument(doc.tfidf));
          break;
        case ScoreMode::kCombined:
          scores[j] = (x.empty() ? 0.0 : projected.dot(model.ProjectDocument(doc.tfidf))) +
                      x.Dot(doc.tfidf);
          break;
        case ScoreMode::kBm25:
          if (options.bm25_term_filter && !SharesTerm(x, doc.tf)) {
            keep[j] = 0;
          } else {
            scores[j] = Bm25Score(collection.stats(), x, doc.tf, options.bm25);
          }
          break;
      }
    }
  });

  RankedList list{query, {}};
  for (size_t j = 0; j < pool.size(); ++j) {
    if (keep[j]) list.items.push_back({docs[pool[j]].id, scores[j]});
  }
  // Duplicate candidate ids collapse to one entry.
  std::sort(list.items.begin(), list.items.end(), [](const RankedItem& a, const RankedItem& b) {
    return a.doc_id < b.doc_id;
  });
  list.items.erase(std::unique(list.items.begin(), list.items.end(),
                               [](const RankedItem& a, const RankedItem& b) {
                                 return a.doc_id == b.doc_id;
                               }),
                   list.items.end());
  const size_t top = std::min(static_cast<size_t>(k), list.items.size());
  std::partial_sort(list.items.begin(), list.items.begin() + static_cast<std::ptrdiff_t>(top),
                    list.items.end(), [](const RankedItem& a, const RankedItem& b) {
                      return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
                    });
  list.items.resize(top);
  return list;
}

void WriteRankings(std::ostream& out, const std::vector<RankedList>& rankings) {
  char buf[64];
  for (const auto& list : rankings) {
    for (size_t i = 0; i < list.items.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.6f", list.items[i].score);
      out << list.query << '\t' << (i + 1) << '\t' << list.items[i].doc_id << '\t' << buf << '\n';
    }
  }
}

std::vector<RankedList> ReadRankings(std::istream& in, const std::string& source) {
  std::vector<RankedList> rankings;
  std::map<std::string, size_t> index;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = SplitFields(line, '\t');
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (f.size() != 4) throw DataError(where + "expected query, rank, doc_id, score");
    double score = 0.0;
    const auto [ptr, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), score);
    if (ec != std::errc() || ptr != f[3].data() + f[3].size()) {
      throw DataError(where + "invalid score '" + f[3] + "'");
    }
    auto [it, inserted] = index.try_emplace(f[0], rankings.size());
    if (inserted) rankings.push_back({f[0], {}});
    // Rows are taken in file order; the rank column is informational.
    rankings[it->second].items.push_back({f[2], score});
  }
  return rankings;
}

CandidateSet ReadCandidates(std::istream& in, const std::string& source) {
  CandidateSet set;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = SplitFields(line, '\t');
    if (f.size() != 3) {
      throw DataError(source + ":" + std::to_string(line_no) +
                      ": expected query, doc_id, doc_title");
    }
    auto [it, inserted] = set.docs_by_query.try_emplace(f[0]);
    if (inserted) set.queries.push_back(f[0]);
    it->second.emplace_back(f[1], f[2]);
  }
  return set;
}

}  // namespace lmm
