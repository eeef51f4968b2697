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

#include "lmm/knowledge.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "lmm/common.h"
#include "lmm/parallel.h"

namespace lmm {
namespace {

using PairKey = std::pair<std::string, std::string>;

std::string FormatDouble(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string Where(const std::string& source, size_t line_no) {
  return source + ":" + std::to_string(line_no) + ": ";
}

double ParseDouble(const std::string& field, const std::string& where) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw DataError(where + "invalid number '" + field + "'");
  }
  return value;
}

int64_t ParseInt(const std::string& field, const std::string& where) {
  int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DataError(where + "invalid integer '" + field + "'");
  }
  return value;
}

std::string Trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

// Counts the distinct (pair, context) candidates of one document.
void CountDocumentCandidates(const std::set<std::string>& queries,
                             std::map<PairKey, int64_t>& counts) {
  std::map<std::string, std::set<std::string>> terms_by_context;
  for (const auto& query : queries) {
    const auto tokens = Tokenize(query);
    for (size_t i = 0; i < tokens.size(); ++i) {
      terms_by_context[ExtractContext(tokens, i)].insert(tokens[i]);
    }
  }
  for (const auto& [context, terms] : terms_by_context) {
    if (terms.size() < 2) continue;
    for (auto a = terms.begin(); a != terms.end(); ++a) {
      for (auto b = std::next(a); b != terms.end(); ++b) ++counts[{*a, *b}];
    }
  }
}

}  // namespace

std::string ExtractContext(std::span<const std::string> tokens, size_t position) {
  if (position >= tokens.size()) {
    throw std::out_of_range("context position " + std::to_string(position) +
                            " outside query of length " + std::to_string(tokens.size()));
  }
  std::string context;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) context.push_back(' ');
    context += (i == position) ? std::string("*") : tokens[i];
  }
  return context;
}

double LogisticWeight(double support, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("logistic scale must be positive");
  return 1.0 / (1.0 + std::exp(-support / scale));
}

void ClickGraph::AddClick(const std::string& query, const std::string& doc_id) {
  queries_by_doc_[doc_id].insert(query);
}

ClickGraph ClickGraph::FromRecords(std::span<const ClickRecord> records) {
  ClickGraph graph;
  for (const auto& r : records) {
    if (r.clicks >= 1) graph.AddClick(r.query, r.doc_id);
  }
  return graph;
}

std::vector<SynonymPair> MineSynonyms(const ClickGraph& graph,
                                      const SynonymMiningOptions& options) {
  if (graph.empty()) return {};
  std::vector<const std::set<std::string>*> docs;
  docs.reserve(graph.queries_by_doc().size());
  for (const auto& [doc, queries] : graph.queries_by_doc()) docs.push_back(&queries);

  constexpr size_t kDocsPerChunk = 256;
  std::vector<std::map<PairKey, int64_t>> partial(NumChunks(docs.size(), kDocsPerChunk));
  ParallelForChunks(docs.size(), kDocsPerChunk, options.workers, [&](const ChunkRange& range) {
    for (size_t i = range.begin; i < range.end; ++i) {
      CountDocumentCandidates(*docs[i], partial[range.index]);
    }
  });
  std::map<PairKey, int64_t> support;
  for (const auto& counts : partial) {
    for (const auto& [key, count] : counts) support[key] += count;
  }

  std::vector<SynonymPair> pairs;
  for (const auto& [key, count] : support) {
    if (count < options.min_support) continue;
    pairs.push_back({key.first, key.second, count,
                     LogisticWeight(static_cast<double>(count), options.logistic_scale)});
  }
  std::sort(pairs.begin(), pairs.end(), [](const SynonymPair& a, const SynonymPair& b) {
    if (a.support != b.support) return a.support > b.support;
    if (a.term1 != b.term1) return a.term1 < b.term1;
    return a.term2 < b.term2;
  });
  if (pairs.size() > options.top_k) pairs.resize(options.top_k);
  return pairs;
}

TagCorpus BuildTagCorpus(const std::map<std::string, std::vector<std::string>>& tags_by_doc,
                         const std::map<std::string, TermVector>& tfidf_by_doc) {
  TagCorpus corpus;
  size_t missing = 0;
  for (const auto& [doc, tags] : tags_by_doc) {
    const auto it = tfidf_by_doc.find(doc);
    for (const auto& tag : tags) {
      auto& docs = corpus[tag];
      if (it != tfidf_by_doc.end()) docs.push_back(it->second);
    }
    if (it == tfidf_by_doc.end()) ++missing;
  }
  if (missing > 0) {
    Warn(std::to_string(missing) + " tagged document(s) not found in the click log");
  }
  return corpus;
}

std::vector<TagTermPair> MineTagTerms(const TagCorpus& corpus, const Vocabulary& vocab,
                                      size_t k) {
  std::vector<TagTermPair> out;
  for (const auto& [tag, docs] : corpus) {
    if (docs.empty()) {
      Warn("tag '" + tag + "' has no documents; skipped");
      continue;
    }
    std::map<uint32_t, double> sum;
    for (const auto& v : docs) {
      for (const auto& e : v.entries()) sum[e.id] += e.weight;
    }
    std::vector<TermEntry> avg;
    avg.reserve(sum.size());
    const double count = static_cast<double>(docs.size());
    for (const auto& [id, total] : sum) avg.push_back({id, total / count});
    std::stable_sort(avg.begin(), avg.end(), [](const TermEntry& a, const TermEntry& b) {
      return a.weight != b.weight ? a.weight > b.weight : a.id < b.id;
    });
    for (size_t i = 0; i < std::min(k, avg.size()); ++i) {
      out.push_back({tag, vocab.Term(avg[i].id), avg[i].weight});
    }
  }
  return out;
}

size_t InjectTags(Vocabulary& vocab, const std::vector<TagTermPair>& pairs) {
  const size_t before = vocab.size();
  for (const auto& p : pairs) vocab.Add(kTagPrefix + p.tag);
  return vocab.size() - before;
}

std::vector<KnowledgePair> ToKnowledgePairs(const std::vector<SynonymPair>& pairs) {
  std::vector<KnowledgePair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({p.term1, p.term2, p.weight});
  return out;
}

std::vector<KnowledgePair> ToKnowledgePairs(const std::vector<TagTermPair>& pairs) {
  std::vector<KnowledgePair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({kTagPrefix + p.tag, p.term, p.weight});
  return out;
}

KnowledgeMatrix BuildKnowledgeMatrix(std::span<const KnowledgePair> pairs,
                                     const Vocabulary& vocab) {
  // Accumulate on the upper triangle, then mirror, so r(u,v) == r(v,u) bit
  // for bit.
  std::map<std::pair<uint32_t, uint32_t>, double> upper;
  size_t kept = 0;
  size_t dropped = 0;
  for (const auto& p : pairs) {
    const auto a = vocab.Lookup(p.first);
    const auto b = vocab.Lookup(p.second);
    if (!a || !b) {
      ++dropped;
      continue;
    }
    if (!std::isfinite(p.weight)) throw DataError("non-finite knowledge weight");
    ++kept;
    const uint32_t u = std::min(*a, *b);
    const uint32_t v = std::max(*a, *b);
    upper[{u, v}] += (u == v) ? p.weight : 0.5 * p.weight;
  }
  if (dropped > 0) {
    Warn(std::to_string(dropped) + " knowledge pair(s) not in vocabulary; dropped");
  }
  if (kept == 0) throw EmptyKnowledgeError("no knowledge pairs resolvable in vocabulary");

  std::vector<Triplet> triplets;
  const double m = static_cast<double>(kept);
  for (const auto& [key, value] : upper) {
    const double r = value / m;
    triplets.push_back({key.first, key.second, r});
    if (key.first != key.second) triplets.push_back({key.second, key.first, r});
  }
  return KnowledgeMatrix(SparseMatrix::FromTriplets(vocab.size(), vocab.size(), triplets),
                         kept, dropped);
}

void WriteSynonyms(std::ostream& out, const std::vector<SynonymPair>& pairs) {
  for (const auto& p : pairs) {
    out << p.term1 << '\t' << p.term2 << '\t' << p.support << '\t' << FormatDouble(p.weight)
        << '\n';
  }
}

std::vector<SynonymPair> ReadSynonyms(std::istream& in, const std::string& source) {
  std::vector<SynonymPair> pairs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = SplitFields(line, '\t');
    const std::string where = Where(source, line_no);
    if (fields.size() != 4) throw DataError(where + "expected 4 fields");
    SynonymPair p{fields[0], fields[1], ParseInt(fields[2], where), ParseDouble(fields[3], where)};
    if (p.support < 1) throw DataError(where + "support must be >= 1");
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::map<std::string, std::vector<std::string>> ReadTagAssignments(std::istream& in,
                                                                   const std::string& source) {
  std::map<std::string, std::vector<std::string>> tags_by_doc;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = SplitFields(line, '\t');
    if (fields.size() != 2) throw DataError(Where(source, line_no) + "expected 2 fields");
    auto& tags = tags_by_doc[fields[0]];
    for (const auto& raw : SplitFields(fields[1], ',')) {
      std::string tag = Trim(raw);
      if (!tag.empty() && std::find(tags.begin(), tags.end(), tag) == tags.end()) {
        tags.push_back(std::move(tag));
      }
    }
  }
  return tags_by_doc;
}

void WriteTagTerms(std::ostream& out, const std::vector<TagTermPair>& pairs) {
  for (const auto& p : pairs) {
    out << p.tag << '\t' << p.term << '\t' << FormatDouble(p.weight) << '\n';
  }
}

std::vector<TagTermPair> ReadTagTerms(std::istream& in, const std::string& source) {
  std::vector<TagTermPair> pairs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = SplitFields(line, '\t');
    const std::string where = Where(source, line_no);
    if (fields.size() != 3) throw DataError(where + "expected 3 fields");
    const double weight = ParseDouble(fields[2], where);
    if (weight < 0.0) throw DataError(where + "tag-term weight must be >= 0");
    pairs.push_back({fields[0], fields[1], weight});
  }
  return pairs;
}

}  // namespace lmm
