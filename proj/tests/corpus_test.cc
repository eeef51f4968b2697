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

#include <atomic>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "lmm/common.h"
#include "lmm/corpus.h"
#include "lmm/parallel.h"
#include "lmm/sparse.h"
#include "testing.h"

namespace lmm {
namespace {

TEST(TokenizeTest, SplitsAndLowercases) {
  EXPECT_EQ(Tokenize("  Download\t2048  APK "),
            (std::vector<std::string>{"download", "2048", "apk"}));
  EXPECT_TRUE(Tokenize("").empty());
}

TEST(SplitFieldsTest, KeepsEmptyFields) {
  EXPECT_EQ(SplitFields("a\t\tb\t", '\t'), (std::vector<std::string>{"a", "", "b", ""}));
}

TEST(FnvTest, KnownVectors) {
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(ParallelTest, ChunksCoverRangeOnceForAnyWorkerCount) {
  for (int workers : {1, 2, 4, 7}) {
    std::vector<std::atomic<int>> hits(1000);
    ParallelForChunks(hits.size(), 64, workers, [&](const ChunkRange& r) {
      EXPECT_EQ(r.begin, r.index * 64);
      for (size_t i = r.begin; i < r.end; ++i) ++hits[i];
    });
    for (const auto& h : hits) ASSERT_EQ(h.load(), 1);
  }
  EXPECT_EQ(NumChunks(1000, 64), 16u);
  EXPECT_EQ(NumChunks(0, 64), 0u);
}

TEST(ParallelTest, RethrowsChunkException) {
  EXPECT_THROW(ParallelForChunks(100, 10, 3,
                                 [](const ChunkRange& r) {
                                   if (r.index == 5) throw std::runtime_error("boom");
                                 }),
               std::runtime_error);
}

TEST(SparseTest, FromTripletsSumsDuplicatesAndDropsZeros) {
  const auto m = SparseMatrix::FromTriplets(2, 3, {{1, 2, 1.5}, {0, 0, 1.0}, {1, 2, 0.5},
                                                   {0, 1, 2.0}, {0, 1, -2.0}});
  EXPECT_EQ(m.nnz(), 2u);
  EXPECT_EQ(m.Get(1, 2), 2.0);
  EXPECT_EQ(m.Get(0, 0), 1.0);
  EXPECT_EQ(m.Get(0, 1), 0.0);
}

TEST(SparseTest, TransposeAndDenseAgree) {
  std::mt19937_64 rng(3);
  const auto m = testing::RandomSparse(rng, 7, 5, 0.4);
  const Eigen::MatrixXd dense = m.ToDense();
  EXPECT_EQ(m.Transposed().ToDense(), dense.transpose());
  const auto grown = m.Resized(9, 6).ToDense();
  EXPECT_EQ(grown.topLeftCorner(7, 5), dense);
  EXPECT_EQ(grown.rightCols(1).cwiseAbs().sum() + grown.bottomRows(2).cwiseAbs().sum(), 0.0);
}

// ---------------------------------------------------------------------------

std::vector<ClickRecord> OneRecord() { return {{"a b", "d1", "a c", 1}}; }

TEST(VocabularyTest, MinCountOne) {
  const auto records = OneRecord();
  const Vocabulary v = BuildVocabulary(records, 1);
  EXPECT_EQ(v.terms(), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(VocabularyTest, MinCountTwoKeepsRepeatedTerm) {
  const auto records = OneRecord();
  const Vocabulary v = BuildVocabulary(records, 2);
  EXPECT_EQ(v.terms(), (std::vector<std::string>{"a"}));
}

TEST(VocabularyTest, EmptyInput) {
  std::vector<ClickRecord> none;
  EXPECT_THROW(BuildVocabulary(none, 1), EmptyCorpusError);
  std::istringstream empty("");
  EXPECT_THROW(BuildVocabulary(ReadClickLog(empty).records, 1), EmptyCorpusError);
}

TEST(VocabularyTest, SaveLoadRoundTrip) {
  Vocabulary v;
  v.Add("alpha");
  v.Add("beta");
  v.Add("tag:racing");
  std::stringstream io;
  v.Save(io);
  EXPECT_EQ(Vocabulary::Load(io), v);
  EXPECT_EQ(*v.Lookup("beta"), 1u);
  EXPECT_FALSE(v.Lookup("gamma").has_value());
  EXPECT_THROW(v.Term(3), std::out_of_range);
}

TEST(VocabularyTest, DuplicateLineIsDataError) {
  std::istringstream in("a\nb\na\n");
  EXPECT_THROW(Vocabulary::Load(in), DataError);
}

TEST(ClickLogTest, SkipsShortLinesAndRejectsBadCounts) {
  std::istringstream in("q\td\tt\t2\nshort\tline\nq2\td2\tt2\t0\n");
  const ClickLog log = ReadClickLog(in);
  EXPECT_EQ(log.records.size(), 2u);
  EXPECT_EQ(log.skipped_lines, 1u);
  EXPECT_EQ(log.records[0].clicks, 2);

  std::istringstream bad("q\td\tt\t1\nq\td\tt\tmany\n");
  try {
    ReadClickLog(bad, "log.tsv");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("log.tsv:2"), std::string::npos);
  }
  std::istringstream negative("q\td\tt\t-1\n");
  EXPECT_THROW(ReadClickLog(negative), DataError);
}

TEST(IdfTest, SingleDocument) {
  const std::vector<ClickRecord> records = {{"q", "d1", "t", 1}};
  Vocabulary v;
  v.Add("t");
  EXPECT_DOUBLE_EQ(ComputeIdf(records, v)[0], 1.0);
}

TEST(IdfTest, ThreeDocuments) {
  const std::vector<ClickRecord> records = {
      {"q", "d1", "t x", 1}, {"q", "d2", "x", 1}, {"q", "d3", "x", 1}, {"q", "d1", "t x", 4}};
  Vocabulary v;
  v.Add("t");
  v.Add("missing");
  const auto idf = ComputeIdf(records, v);
  EXPECT_NEAR(idf[0], std::log(4.0 / 2.0) + 1.0, 1e-15);
  EXPECT_NEAR(idf[0], 1.6931, 1e-4);
  EXPECT_NEAR(idf[1], std::log(4.0) + 1.0, 1e-15);
}

std::vector<std::pair<uint32_t, double>> Dump(const TermVector& v) {
  std::vector<std::pair<uint32_t, double>> out;
  for (const auto& e : v.entries()) out.emplace_back(e.id, e.weight);
  return out;
}

TEST(VectorizeTest, QueryCounts) {
  Vocabulary v;
  v.Add("a");
  v.Add("b");
  EXPECT_EQ(Dump(VectorizeQuery("a a b", v)), (std::vector<std::pair<uint32_t, double>>{
                                                   {0, 2.0}, {1, 1.0}}));
  Vocabulary only_a;
  only_a.Add("a");
  EXPECT_TRUE(VectorizeQuery("z", only_a).empty());
  EXPECT_TRUE(VectorizeQuery("", only_a).empty());
}

TEST(VectorizeTest, QueryWeightEqualsInVocabularyTokenCount) {
  Vocabulary v;
  v.Add("a");
  v.Add("b");
  EXPECT_EQ(VectorizeQuery("a b a", v).Sum(), 3.0);
  EXPECT_EQ(VectorizeQuery("a b zz a", v).Sum(), 3.0);
}

TEST(VectorizeTest, DocumentTfIdf) {
  Vocabulary v;
  v.Add("a");
  v.Add("b");
  const std::vector<double> idf = {1.0, 2.0};
  EXPECT_EQ(Dump(VectorizeDocument("a", v, idf)),
            (std::vector<std::pair<uint32_t, double>>{{0, 1.0}}));
  EXPECT_EQ(Dump(VectorizeDocument("a a b", v, idf)),
            (std::vector<std::pair<uint32_t, double>>{{0, 2.0}, {1, 2.0}}));
  EXPECT_TRUE(VectorizeDocument("q r", v, idf).empty());
}

TEST(TermVectorTest, FromEntriesNormalizes) {
  const auto v = TermVector::FromEntries(5, {{3, 1.0}, {1, 2.0}, {3, 0.5}, {2, 0.0}});
  EXPECT_EQ(Dump(v), (std::vector<std::pair<uint32_t, double>>{{1, 2.0}, {3, 1.5}}));
  EXPECT_THROW(TermVector::FromEntries(2, {{2, 1.0}}), std::invalid_argument);
  EXPECT_THROW(TermVector::FromEntries(2, {{0, NAN}}), std::invalid_argument);
}

TermVector Unit(size_t dim, uint32_t id) { return TermVector::FromEntries(dim, {{id, 1.0}}); }

TEST(CovarianceTest, SinglePair) {
  const std::vector<WeightedPair> pairs = {{Unit(2, 0), Unit(2, 1), 1.0}};
  const auto c = BuildCrossCovariance(pairs, 2, 2);
  EXPECT_EQ(c.nnz(), 1u);
  EXPECT_EQ(c.Get(0, 1), 1.0);
}

TEST(CovarianceTest, TwoPairsAverage) {
  const std::vector<WeightedPair> pairs = {{Unit(2, 0), Unit(2, 0), 1.0},
                                           {Unit(2, 0), Unit(2, 1), 1.0}};
  const auto c = BuildCrossCovariance(pairs, 2, 2);
  EXPECT_EQ(c.Get(0, 0), 0.5);
  EXPECT_EQ(c.Get(0, 1), 0.5);
  EXPECT_EQ(c.total_weight(), 2.0);
}

TEST(CovarianceTest, EmptyIsError) {
  EXPECT_THROW(BuildCrossCovariance({}, 2, 2), EmptyCorpusError);
}

std::vector<WeightedPair> RandomPairs(std::mt19937_64& rng, size_t n, size_t dx, size_t dy) {
  std::uniform_int_distribution<uint32_t> nterms(0, 4);
  std::uniform_int_distribution<uint32_t> wx(0, uint32_t(dx - 1));
  std::uniform_int_distribution<uint32_t> wy(0, uint32_t(dy - 1));
  std::uniform_real_distribution<double> val(0.1, 3.0);
  std::uniform_int_distribution<int> clicks(1, 5);
  std::vector<WeightedPair> pairs;
  for (size_t i = 0; i < n; ++i) {
    std::vector<TermEntry> x, y;
    for (uint32_t k = nterms(rng); k > 0; --k) x.push_back({wx(rng), val(rng)});
    for (uint32_t k = nterms(rng); k > 0; --k) y.push_back({wy(rng), val(rng)});
    pairs.push_back({TermVector::FromEntries(dx, x), TermVector::FromEntries(dy, y),
                     double(clicks(rng))});
  }
  return pairs;
}

Eigen::VectorXd Dense(const TermVector& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(Eigen::Index(v.dim()));
  for (const auto& e : v.entries()) out(e.id) = e.weight;
  return out;
}

TEST(CovarianceTest, MatchesDenseOracle) {
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    std::mt19937_64 rng(seed);
    const size_t dx = 1 + rng() % 20;
    const size_t dy = 1 + rng() % 20;
    const auto pairs = RandomPairs(rng, 1 + rng() % 50, dx, dy);
    Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(Eigen::Index(dx), Eigen::Index(dy));
    double n = 0.0;
    for (const auto& p : pairs) {
      oracle += p.weight * Dense(p.x) * Dense(p.y).transpose();
      n += p.weight;
    }
    oracle /= n;
    const auto c = BuildCrossCovariance(pairs, dx, dy);
    ASSERT_LE((c.matrix().ToDense() - oracle).cwiseAbs().maxCoeff(), 1e-12) << "seed " << seed;
  }
}

TEST(CovarianceTest, PartitionInvariance) {
  std::mt19937_64 rng(11);
  const auto pairs = RandomPairs(rng, 500, 30, 25);
  const Eigen::MatrixXd single = BuildCrossCovariance(pairs, 30, 25, 1, pairs.size())
                                     .matrix().ToDense();
  for (size_t chunk : {1, 2, 7, 64, 250}) {
    for (int workers : {1, 3}) {
      const auto c = BuildCrossCovariance(pairs, 30, 25, workers, chunk);
      ASSERT_LE((c.matrix().ToDense() - single).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
  // Two explicit halves merged in order.
  CovarianceAccumulator first(30, 25), second(30, 25);
  for (size_t i = 0; i < pairs.size(); ++i) {
    (i < 200 ? first : second).Add(pairs[i].x, pairs[i].y, pairs[i].weight);
  }
  first.Merge(second);
  EXPECT_LE((first.Finalize().matrix().ToDense() - single).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CovarianceTest, WorkerCountIsBitIdentical) {
  std::mt19937_64 rng(5);
  const auto pairs = RandomPairs(rng, 3000, 40, 40);
  const auto one = BuildCrossCovariance(pairs, 40, 40, 1, 128).matrix().ToTriplets();
  for (int workers : {2, 4}) {
    const auto many = BuildCrossCovariance(pairs, 40, 40, workers, 128).matrix().ToTriplets();
    ASSERT_EQ(one.size(), many.size());
    for (size_t i = 0; i < one.size(); ++i) {
      ASSERT_EQ(one[i].row, many[i].row);
      ASSERT_EQ(one[i].col, many[i].col);
      ASSERT_EQ(one[i].value, many[i].value);
    }
  }
}

TEST(CovarianceTest, CacheRoundTrip) {
  std::mt19937_64 rng(2);
  const auto pairs = RandomPairs(rng, 40, 6, 9);
  const auto c = BuildCrossCovariance(pairs, 6, 9);
  std::stringstream io;
  WriteCovarianceCache(io, c);
  const auto back = ReadCovarianceCache(io);
  EXPECT_EQ(back.rows(), 6u);
  EXPECT_EQ(back.cols(), 9u);
  EXPECT_EQ(back.matrix().ToDense(), c.matrix().ToDense());

  std::istringstream junk("LMX1garbage");
  EXPECT_THROW(ReadCovarianceCache(junk), DataError);
  std::string truncated = io.str();
  std::stringstream again;
  WriteCovarianceCache(again, c);
  truncated = again.str().substr(0, again.str().size() - 3);
  std::istringstream short_in(truncated);
  EXPECT_THROW(ReadCovarianceCache(short_in), DataError);
}

TEST(TrainingPairsTest, SkipsZeroClickRecords) {
  const std::vector<ClickRecord> records = {{"a", "d1", "b", 3}, {"a", "d2", "b", 0}};
  const Vocabulary v = BuildVocabulary(records, 1);
  const auto idf = ComputeIdf(records, v);
  const auto pairs = MakeTrainingPairs(records, v, idf);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].weight, 3.0);
}

}  // namespace
}  // namespace lmm
