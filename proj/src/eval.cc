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

#include "lmm/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "lmm/common.h"

namespace lmm {
namespace {

void CheckLabel(int label) {
  if (label < 0 || label > 3) throw std::invalid_argument("label outside 0..3");
}

double Dcg(std::span<const int> labels, int k) {
  double dcg = 0.0;
  const size_t n = std::min(labels.size(), static_cast<size_t>(k));
  for (size_t i = 0; i < n; ++i) {
    dcg += (std::exp2(labels[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg;
}

const char* const kSplits[] = {"all", "head", "tail"};

}  // namespace

void JudgmentSet::Add(const Judgment& j) {
  if (j.label < 0 || j.label > 3) {
    throw DataError("label " + std::to_string(j.label) + " outside 0..3");
  }
  auto& docs = labels_[j.query];
  if (!docs.emplace(j.doc_id, j.label).second) {
    throw DataError("duplicate judgment for (" + j.query + ", " + j.doc_id + ")");
  }
  ++count_;
}

int JudgmentSet::Label(const std::string& query, const std::string& doc_id) const {
  const auto q = labels_.find(query);
  if (q == labels_.end()) return 0;
  const auto d = q->second.find(doc_id);
  return d == q->second.end() ? 0 : d->second;
}

bool JudgmentSet::HasQuery(const std::string& query) const { return labels_.count(query) > 0; }

std::vector<int> JudgmentSet::LabelsFor(const std::string& query) const {
  std::vector<int> out;
  const auto q = labels_.find(query);
  if (q == labels_.end()) return out;
  for (const auto& [doc, label] : q->second) out.push_back(label);
  return out;
}

JudgmentSet ReadJudgments(std::istream& in, const std::string& source) {
  JudgmentSet set;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = SplitFields(line, '\t');
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (f.size() != 3) throw DataError(where + "expected query, doc_id, label");
    if (f[2].size() != 1 || f[2][0] < '0' || f[2][0] > '3') {
      throw DataError(where + "label must be 0, 1, 2 or 3, got '" + f[2] + "'");
    }
    try {
      set.Add({f[0], f[1], f[2][0] - '0'});
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
  }
  return set;
}

double NdcgAtK(std::span<const int> ranked_labels, int k) {
  return NdcgAtK(ranked_labels, ranked_labels, k);
}

double NdcgAtK(std::span<const int> ranked_labels, std::span<const int> ideal_labels, int k) {
  if (k < 1) throw std::invalid_argument("NDCG cutoff must be >= 1");
  for (int l : ranked_labels) CheckLabel(l);
  for (int l : ideal_labels) CheckLabel(l);
  if (ranked_labels.empty()) {
    Warn("NDCG of an empty ranking is 0");
    return 0.0;
  }
  std::vector<int> ideal(ideal_labels.begin(), ideal_labels.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<int>());
  const double idcg = Dcg(ideal, k);
  if (idcg == 0.0) return 0.0;
  return Dcg(ranked_labels, k) / idcg;
}

HeadTailSplit SplitHeadTail(std::vector<std::string> queries,
                            const std::map<std::string, double>& frequency) {
  auto freq = [&](const std::string& q) {
    const auto it = frequency.find(q);
    return it == frequency.end() ? 0.0 : it->second;
  };
  std::sort(queries.begin(), queries.end(), [&](const std::string& a, const std::string& b) {
    const double fa = freq(a);
    const double fb = freq(b);
    return fa != fb ? fa > fb : a < b;
  });
  queries.erase(std::unique(queries.begin(), queries.end()), queries.end());
  HeadTailSplit split;
  const size_t head = (queries.size() + 1) / 2;
  split.head.assign(queries.begin(), queries.begin() + static_cast<std::ptrdiff_t>(head));
  split.tail.assign(queries.begin() + static_cast<std::ptrdiff_t>(head), queries.end());
  return split;
}

std::map<std::string, double> QueryFrequencies(std::span<const ClickRecord> records) {
  std::map<std::string, double> freq;
  for (const auto& r : records) freq[r.query] += static_cast<double>(r.clicks);
  return freq;
}

EvalReport EvaluateRun(const std::vector<RankedList>& rankings, const JudgmentSet& judgments,
                       const std::map<std::string, double>& frequency,
                       const std::vector<int>& cutoffs) {
  EvalReport report;
  report.cutoffs = cutoffs;
  for (const auto& list : rankings) {
    if (!judgments.HasQuery(list.query)) {
      ++report.excluded_queries;
      continue;
    }
    if (report.per_query.count(list.query)) {
      throw DataError("query '" + list.query + "' ranked more than once");
    }
    std::vector<int> ranked;
    ranked.reserve(list.items.size());
    for (const auto& item : list.items) ranked.push_back(judgments.Label(list.query, item.doc_id));
    const std::vector<int> ideal = judgments.LabelsFor(list.query);
    std::vector<double> values;
    for (int k : cutoffs) values.push_back(NdcgAtK(ranked, ideal, k));
    report.per_query[list.query] = std::move(values);
  }
  if (report.excluded_queries > 0) {
    Warn(std::to_string(report.excluded_queries) + " ranked query(ies) without judgments excluded");
  }

  std::vector<std::string> evaluated;
  for (const auto& [q, v] : report.per_query) evaluated.push_back(q);
  const HeadTailSplit split = SplitHeadTail(evaluated, frequency);
  const std::map<std::string, const std::vector<std::string>*> members = {
      {"all", &evaluated}, {"head", &split.head}, {"tail", &split.tail}};

  for (const char* name : kSplits) {
    const auto& queries = *members.at(name);
    std::vector<double> mean(cutoffs.size(), 0.0);
    for (const auto& q : queries) {
      const auto& v = report.per_query.at(q);
      for (size_t c = 0; c < cutoffs.size(); ++c) mean[c] += v[c];
    }
    if (!queries.empty()) {
      for (double& m : mean) m /= static_cast<double>(queries.size());
    }
    report.mean_ndcg[name] = std::move(mean);
    report.query_count[name] = queries.size();
  }
  return report;
}

void EvalReport::WriteTable(std::ostream& out) const {
  char buf[64];
  out << "split  queries";
  for (int k : cutoffs) {
    std::snprintf(buf, sizeof(buf), "  NDCG@%-3d", k);
    out << buf;
  }
  out << '\n';
  for (const char* name : kSplits) {
    std::snprintf(buf, sizeof(buf), "%-5s  %7zu", name, query_count.at(name));
    out << buf;
    for (double v : mean_ndcg.at(name)) {
      std::snprintf(buf, sizeof(buf), "  %8.4f", v);
      out << buf;
    }
    out << '\n';
  }
}

void EvalReport::WriteCsv(std::ostream& out) const {
  char buf[64];
  out << "split,cutoff,ndcg,n_queries\n";
  for (const char* name : kSplits) {
    const auto& values = mean_ndcg.at(name);
    for (size_t c = 0; c < cutoffs.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.6f", values[c]);
      out << name << ',' << cutoffs[c] << ',' << buf << ',' << query_count.at(name) << '\n';
    }
  }
}

TTestResult PairedTTest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired samples differ in length");
  TTestResult result;
  result.n = a.size();
  if (a.size() < 2) throw std::invalid_argument("paired t-test needs at least 2 samples");
  std::vector<double> diff(a.size());
  for (size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const double n = static_cast<double>(diff.size());
  const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / n;
  double ss = 0.0;
  for (double d : diff) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) {
    result.t = mean == 0.0 ? 0.0 : std::copysign(INFINITY, mean);
    result.p_value = mean == 0.0 ? 1.0 : 0.0;
    return result;
  }
  result.t = mean / (sd / std::sqrt(n));
  const boost::math::students_t dist(n - 1.0);
  result.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(result.t)));
  return result;
}

}  // namespace lmm
