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

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.h"
#include "json.hpp"

namespace lmm::cli {
namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Trace rows without the timing column.
std::vector<std::string> Objectives(const std::string& trace) {
  std::vector<std::string> rows;
  std::istringstream in(trace);
  for (std::string line; std::getline(in, line);) rows.push_back(line.substr(0, line.rfind(',')));
  return rows;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lmm_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::mt19937_64 rng(1);
    std::ofstream clicks(Path("clicks.tsv"));
    for (int topic = 0; topic < 3; ++topic) {
      for (int i = 0; i < 20; ++i) {
        const std::string t = "w" + std::to_string(topic) + "_";
        const int doc = int(rng() % 4);
        clicks << t << rng() % 4 << " app\td" << topic << doc << '\t' << t << doc << ' ' << t
               << (doc + 1) % 4 << " app\t" << 1 + rng() % 3 << '\n';
      }
    }
    clicks << "download alpha apk\td00\tw0_0 w0_1 app\t1\n";
    clicks << "download beta apk\td00\tw0_0 w0_1 app\t1\n";
    std::ofstream judgments(Path("judgments.tsv"));
    for (int topic = 0; topic < 3; ++topic) {
      for (int doc = 0; doc < 4; ++doc) {
        judgments << "w" << topic << "_0 app\td" << topic << doc << '\t' << (doc == 0 ? 3 : 1)
                  << '\n';
      }
    }
    std::ofstream tags(Path("tags.tsv"));
    tags << "d00\tgreen\nd10\tblue,green\n";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  int Call(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return lmm::cli::Run(args, out_, err_);
  }

  int Train(const std::string& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> args = {"train", "--clicks", Path("clicks.tsv"), "--dim", "4",
                                     "--out", Path(out), "--quiet"};
    args.insert(args.end(), extra.begin(), extra.end());
    return Call(args);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(Call({}), kUsageError);
  EXPECT_EQ(Call({"bogus"}), kUsageError);
  EXPECT_EQ(Call({"train", "--dim", "3"}), kUsageError);
  EXPECT_EQ(Call({"rank", "--mode", "magic", "--out", Path("r.tsv")}), kUsageError);
  for (const char* sub : {"build-corpus", "mine-synonyms", "mine-tags", "train", "rank",
                          "evaluate"}) {
    EXPECT_EQ(Call({sub, "--help"}), kOk) << sub;
    EXPECT_NE(out_.str().find("--threads"), std::string::npos) << sub;
  }
  EXPECT_EQ(Call({"--version"}), kOk);
  EXPECT_NE(out_.str().find(kToolVersion), std::string::npos);
}

TEST_F(CliTest, DataErrorsCarryLineNumbers) {
  std::ofstream(Path("bad.tsv")) << "q\td\tt\t1\nq\td\tt\tlots\n";
  EXPECT_EQ(Call({"train", "--clicks", Path("bad.tsv"), "--out", Path("m.lmm")}), kDataError);
  EXPECT_NE(err_.str().find("bad.tsv:2"), std::string::npos);
  EXPECT_FALSE(fs::exists(Path("m.lmm")));
  EXPECT_EQ(Call({"build-corpus", "--clicks", Path("missing.tsv"), "--vocab-out", Path("v")}),
            kDataError);
  std::ofstream(Path("badsyn.tsv")) << "a\tb\t1\n";
  EXPECT_EQ(Train("m.lmm", {"--synonyms", Path("badsyn.tsv"), "--alpha", "0.1"}), kDataError);
  EXPECT_NE(err_.str().find("badsyn.tsv:1"), std::string::npos);
}

TEST_F(CliTest, DivergenceIsNumericalError) {
  EXPECT_EQ(Train("m.lmm", {"--method", "gd", "--gamma", "1000"}), kNumericalError);
}

TEST_F(CliTest, FullPipeline) {
  ASSERT_EQ(Call({"build-corpus", "--clicks", Path("clicks.tsv"), "--vocab-out", Path("v.txt"),
                  "--cov-out", Path("c.lmc")}),
            kOk)
      << err_.str();
  ASSERT_EQ(Call({"mine-synonyms", "--clicks", Path("clicks.tsv"), "--out", Path("syn.tsv")}),
            kOk);
  EXPECT_NE(Slurp(Path("syn.tsv")).find("alpha\tbeta\t1\t"), std::string::npos);
  ASSERT_EQ(Call({"mine-tags", "--clicks", Path("clicks.tsv"), "--tags", Path("tags.tsv"),
                  "--top-k", "2", "--out", Path("tt.tsv")}),
            kOk);

  ASSERT_EQ(Call({"train", "--cov", Path("c.lmc"), "--vocab", Path("v.txt"), "--dim", "4",
                  "--out", Path("m.lmm"), "--manifest", Path("train.json")}),
            kOk)
      << err_.str();
  EXPECT_NE(err_.str().find("iter    1  objective"), std::string::npos);
  const std::string trace = Slurp(Path("m.lmm.trace.csv"));
  EXPECT_EQ(trace.rfind("iteration,objective,seconds\n0,", 0), 0u);

  const auto manifest = nlohmann::json::parse(Slurp(Path("train.json")));
  EXPECT_EQ(manifest["tool_version"], kToolVersion);
  const std::string hash = manifest["config_hash"];
  EXPECT_EQ(hash.size(), 16u);
  for (const char* key : {"model", "vocab", "trace", "covariance"}) {
    EXPECT_EQ(manifest["outputs"][key]["config_hash"], hash) << key;
  }
  EXPECT_EQ(manifest["inputs"]["covariance"], Path("c.lmc"));

  // Knowledge-augmented continuation without data flags reuses the cached
  // covariance next to the warm-start model.
  ASSERT_EQ(Call({"train", "--synonyms", Path("syn.tsv"), "--alpha", "0.05", "--tag-terms",
                  Path("tt.tsv"), "--beta", "0.05", "--warm-start", Path("m.lmm"), "--out",
                  Path("m2.lmm"), "--quiet"}),
            kOk)
      << err_.str();

  ASSERT_EQ(Call({"rank", "--model", Path("m2.lmm"), "--clicks", Path("clicks.tsv"),
                  "--queries", Path("q.txt"), "--out", Path("r.tsv")}),
            kDataError);
  std::ofstream(Path("q.txt")) << "w0_0 app\nw1_2 app\n";
  ASSERT_EQ(Call({"rank", "--model", Path("m2.lmm"), "--clicks", Path("clicks.tsv"),
                  "--queries", Path("q.txt"), "--k", "3", "--out", Path("r.tsv")}),
            kOk)
      << err_.str();
  std::istringstream ranking(Slurp(Path("r.tsv")));
  int lines = 0;
  for (std::string line; std::getline(ranking, line);) ++lines;
  EXPECT_EQ(lines, 6);

  ASSERT_EQ(Call({"evaluate", "--ranking", Path("r.tsv"), "--judgments", Path("judgments.tsv"),
                  "--clicks", Path("clicks.tsv"), "--csv", Path("report.csv")}),
            kOk)
      << err_.str();
  EXPECT_NE(out_.str().find("NDCG@10"), std::string::npos);
  EXPECT_EQ(Slurp(Path("report.csv")).rfind("split,cutoff,ndcg,n_queries\nall,1,", 0), 0u);
}

TEST_F(CliTest, EvaluateFromCandidates) {
  ASSERT_EQ(Train("m.lmm"), kOk) << err_.str();
  std::ofstream(Path("cand.tsv")) << "w0_0 app\td00\tw0_0 w0_1 app\n"
                                  << "w0_0 app\td01\tw0_1 w0_2 app\n"
                                  << "w0_0 app\td10\tw1_0 w1_1 app\n";
  ASSERT_EQ(Call({"evaluate", "--model", Path("m.lmm"), "--judgments", Path("judgments.tsv"),
                  "--candidates", Path("cand.tsv")}),
            kOk)
      << err_.str();
  EXPECT_NE(out_.str().find("all          1"), std::string::npos) << out_.str();
  EXPECT_EQ(Call({"evaluate", "--model", Path("m.lmm"), "--judgments", Path("judgments.tsv"),
                  "--candidates", Path("cand.tsv"), "--mode", "bm25"}),
            kOk);
}

TEST_F(CliTest, DeterministicAcrossThreadCounts) {
  for (const char* threads : {"1", "2", "4"}) {
    ASSERT_EQ(Train(std::string("m") + threads + ".lmm",
                    {"--threads", threads, "--vocab-out", Path("shared.vocab"), "--theta2",
                     "0.05"}),
              kOk);
    ASSERT_EQ(Call({"evaluate", "--model", Path(std::string("m") + threads + ".lmm"),
                    "--judgments", Path("judgments.tsv"), "--clicks", Path("clicks.tsv"),
                    "--threads", threads, "--csv", Path(std::string("r") + threads + ".csv")}),
              kOk);
  }
  EXPECT_EQ(Slurp(Path("m1.lmm")), Slurp(Path("m2.lmm")));
  EXPECT_EQ(Slurp(Path("m1.lmm")), Slurp(Path("m4.lmm")));
  EXPECT_EQ(Slurp(Path("r1.csv")), Slurp(Path("r4.csv")));
  EXPECT_EQ(Objectives(Slurp(Path("m1.lmm.trace.csv"))),
            Objectives(Slurp(Path("m4.lmm.trace.csv"))));
}

TEST_F(CliTest, FlagsOverrideConfigFile) {
  std::ofstream(Path("cfg.txt")) << "dim=7\ntheta2=0.2\nmaxIters=3\n";
  ASSERT_EQ(Call({"train", "--clicks", Path("clicks.tsv"), "--config", Path("cfg.txt"), "--dim",
                  "2", "--out", Path("m.lmm"), "--quiet", "--manifest", Path("man.json")}),
            kOk)
      << err_.str();
  const auto manifest = nlohmann::json::parse(Slurp(Path("man.json")));
  const std::string config = manifest["config"];
  EXPECT_NE(config.find("dim=2\n"), std::string::npos);
  EXPECT_NE(config.find("theta2=0.20000000000000001\n"), std::string::npos) << config;
  EXPECT_NE(config.find("maxIters=3\n"), std::string::npos);

  std::ofstream(Path("l1.txt")) << "lambda1=0.5\n";
  EXPECT_EQ(Call({"train", "--clicks", Path("clicks.tsv"), "--config", Path("l1.txt"), "--out",
                  Path("m.lmm")}),
            kUsageError);
}

TEST_F(CliTest, ConfigHashTracksSettings) {
  auto hash_of = [&](std::vector<std::string> extra) {
    extra.insert(extra.end(), {"--manifest", Path("h.json")});
    EXPECT_EQ(Train("m.lmm", extra), kOk);
    return nlohmann::json::parse(Slurp(Path("h.json")))["config_hash"].get<std::string>();
  };
  const std::string base = hash_of({});
  EXPECT_EQ(base, hash_of({"--threads", "3"}));
  EXPECT_NE(base, hash_of({"--seed", "2"}));
}

}  // namespace
}  // namespace lmm::cli
