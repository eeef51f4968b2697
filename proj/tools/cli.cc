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

#include "cli.h"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lmm/common.h"
#include "lmm/corpus.h"
#include "lmm/eval.h"
#include "lmm/knowledge.h"
#include "lmm/model_io.h"
#include "lmm/scorer.h"
#include "lmm/trainer.h"

namespace lmm::cli {
namespace {

std::string IsoTimestamp(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string Hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Input/output bookkeeping for --manifest.
struct Manifest {
  std::string subcommand;
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;
  std::string config_text;
  std::chrono::system_clock::time_point started = std::chrono::system_clock::now();

  std::string ConfigHash() const { return Hex64(Fnv1a64(subcommand + "\n" + config_text)); }

  void Write(const std::string& path) const {
    nlohmann::ordered_json j;
    j["tool"] = "lmm";
    j["tool_version"] = kToolVersion;
    j["subcommand"] = subcommand;
    j["config_hash"] = ConfigHash();
    j["config"] = config_text;
    j["inputs"] = inputs;
    // Every output maps to the hash of the configuration that produced it.
    nlohmann::ordered_json outs = nlohmann::ordered_json::object();
    for (const auto& [name, file] : outputs) {
      outs[name] = {{"path", file}, {"config_hash", ConfigHash()}};
    }
    j["outputs"] = outs;
    j["started"] = IsoTimestamp(started);
    j["finished"] = IsoTimestamp(std::chrono::system_clock::now());
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(2) << '\n';
  }
};

std::ifstream OpenInput(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

std::ofstream OpenOutput(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

// Canonical "name=value" listing of the options a subcommand was given,
// excluding ones that cannot change outputs.
std::string OptionSummary(const CLI::App& sub) {
  static const std::set<std::string> kIgnored = {"--manifest", "--threads", "--help", "--quiet"};
  std::ostringstream text;
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name();
    if (kIgnored.count(name) || opt->count() == 0) continue;
    text << name << '=';
    for (const auto& r : opt->results()) text << r << ';';
    text << '\n';
  }
  return text.str();
}

// Shared by subcommands that build a document collection.
std::vector<std::pair<std::string, std::string>> ReadDocs(const std::string& path) {
  auto in = OpenInput(path);
  std::vector<std::pair<std::string, std::string>> docs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = SplitFields(line, '\t');
    if (f.size() != 2) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected doc_id, doc_title");
    }
    docs.emplace_back(std::move(f[0]), std::move(f[1]));
  }
  return docs;
}

std::vector<std::string> ReadLines(const std::string& path) {
  auto in = OpenInput(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::map<std::string, double> ReadQueryFrequencies(const std::string& path) {
  auto in = OpenInput(path);
  std::map<std::string, double> freq;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = SplitFields(line, '\t');
    const std::string where = path + ":" + std::to_string(line_no) + ": ";
    if (f.size() != 2) throw DataError(where + "expected query, count");
    try {
      size_t used = 0;
      freq[f[0]] = std::stod(f[1], &used);
      if (used != f[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError(where + "invalid count '" + f[1] + "'");
    }
  }
  return freq;
}

// Pads a warm start with zero columns for terms appended to the vocabulary
// after it was trained (e.g. injected tags).
MappingPair ExtendWarmStart(MappingPair warm, size_t vocab_size) {
  const auto v = static_cast<Eigen::Index>(vocab_size);
  if (warm.dx() > v || warm.dy() > v) {
    throw DataError("warm-start model is wider than the training vocabulary");
  }
  auto pad = [&](Eigen::MatrixXd& m) {
    const Eigen::Index old = m.cols();
    if (old == v) return;
    m.conservativeResize(Eigen::NoChange, v);
    m.rightCols(v - old).setZero();
  };
  pad(warm.lx);
  pad(warm.ly);
  return warm;
}

// Recorded vocabulary paths are relative to the directory training ran in;
// falls back to a file of the same name next to the model.
std::string ResolveVocabPath(const std::string& model_path, const std::string& recorded) {
  if (std::filesystem::exists(recorded)) return recorded;
  const auto sibling = std::filesystem::path(model_path).parent_path() /
                       std::filesystem::path(recorded).filename();
  return std::filesystem::exists(sibling) ? sibling.string() : recorded;
}

Model LoadModel(const std::string& model_path, const std::string& vocab_override,
                Manifest& manifest) {
  StoredModel stored = ReadModelFile(model_path);
  manifest.inputs["model"] = model_path;
  const std::string vocab_path =
      vocab_override.empty() ? ResolveVocabPath(model_path, stored.vocab_path) : vocab_override;
  manifest.inputs["vocab"] = vocab_path;
  return Model(std::move(stored.mappings), Vocabulary::LoadFile(vocab_path));
}

// ---------------------------------------------------------------------------

struct CommonFlags {
  int threads = 0;
  std::string manifest;
};

void AddCommon(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--threads", flags.threads, "Worker threads (default: available cores)");
  sub->add_option("--manifest", flags.manifest, "Write a JSON pipeline manifest");
}

struct BuildCorpusFlags {
  std::string clicks, vocab_out, cov_out;
  int min_count = 1;
};

void RunBuildCorpus(const BuildCorpusFlags& f, const CommonFlags& common, Manifest& manifest,
                    std::ostream& err) {
  const ClickLog log = ReadClickLogFile(f.clicks);
  manifest.inputs["clicks"] = f.clicks;
  const Vocabulary vocab = BuildVocabulary(log.records, f.min_count);
  const auto idf = ComputeIdf(log.records, vocab);
  vocab.SaveFile(f.vocab_out);
  manifest.outputs["vocab"] = f.vocab_out;
  err << "vocabulary: " << vocab.size() << " terms from " << log.records.size() << " records\n";
  if (!f.cov_out.empty()) {
    const auto pairs = MakeTrainingPairs(log.records, vocab, idf);
    const auto c = BuildCrossCovariance(pairs, vocab.size(), vocab.size(), common.threads);
    WriteCovarianceCacheFile(f.cov_out, c);
    manifest.outputs["covariance"] = f.cov_out;
    err << "cross-covariance: " << c.nnz() << " non-zeros, n=" << c.total_weight() << '\n';
  }
}

struct MineSynonymsFlags {
  std::string clicks, out;
  size_t top_k = 1000;
  double scale = 1.0;
  int64_t min_support = 1;
};

void RunMineSynonyms(const MineSynonymsFlags& f, const CommonFlags& common, Manifest& manifest,
                     std::ostream& err) {
  const ClickLog log = ReadClickLogFile(f.clicks);
  manifest.inputs["clicks"] = f.clicks;
  SynonymMiningOptions options;
  options.top_k = f.top_k;
  options.logistic_scale = f.scale;
  options.min_support = f.min_support;
  options.workers = common.threads;
  const auto pairs = MineSynonyms(ClickGraph::FromRecords(log.records), options);
  auto out = OpenOutput(f.out);
  WriteSynonyms(out, pairs);
  manifest.outputs["synonyms"] = f.out;
  err << "synonyms: " << pairs.size() << " pairs\n";
}

struct MineTagsFlags {
  std::string clicks, tags, out;
  size_t top_k = 10;
  int min_count = 1;
};

void RunMineTags(const MineTagsFlags& f, Manifest& manifest, std::ostream& err) {
  const ClickLog log = ReadClickLogFile(f.clicks);
  auto tag_in = OpenInput(f.tags);
  const auto tags_by_doc = ReadTagAssignments(tag_in, f.tags);
  manifest.inputs["clicks"] = f.clicks;
  manifest.inputs["tags"] = f.tags;
  const Vocabulary vocab = BuildVocabulary(log.records, f.min_count);
  const auto idf = ComputeIdf(log.records, vocab);
  std::map<std::string, TermVector> tfidf_by_doc;
  for (const auto& r : log.records) {
    if (!tfidf_by_doc.count(r.doc_id)) {
      tfidf_by_doc.emplace(r.doc_id, VectorizeDocument(r.doc_title, vocab, idf));
    }
  }
  const auto pairs = MineTagTerms(BuildTagCorpus(tags_by_doc, tfidf_by_doc), vocab, f.top_k);
  auto out = OpenOutput(f.out);
  WriteTagTerms(out, pairs);
  manifest.outputs["tag_terms"] = f.out;
  err << "tag-terms: " << pairs.size() << " pairs\n";
}

struct TrainFlags {
  std::string clicks, cov, vocab, config, synonyms, tag_terms, warm_start, out, trace, vocab_out,
      cov_out;
  int min_count = 1;
  TrainConfig cfg;
  std::string method = "cd";
  std::string sweep = "gauss-seidel";
  bool quiet = false;
};

void RunTrain(TrainFlags& f, const CLI::App& sub, const CommonFlags& common, Manifest& manifest,
              std::ostream& err) {
  // Defaults, then the config file, then explicit flags.
  TrainConfig cfg;
  if (!f.warm_start.empty()) cfg.max_iters = 20;
  if (!f.config.empty()) {
    cfg = LoadTrainConfigFile(f.config, cfg);
    manifest.inputs["config"] = f.config;
  }
  auto given = [&](const char* name) { return sub.get_option(name)->count() > 0; };
  if (given("--dim")) cfg.dim = f.cfg.dim;
  if (given("--theta2")) cfg.theta2 = f.cfg.theta2;
  if (given("--lambda2")) cfg.lambda2 = f.cfg.lambda2;
  if (given("--rho2")) cfg.rho2 = f.cfg.rho2;
  if (given("--alpha")) cfg.alpha = f.cfg.alpha;
  if (given("--beta")) cfg.beta = f.cfg.beta;
  if (given("--gamma")) cfg.gamma = f.cfg.gamma;
  if (given("--max-iters")) cfg.max_iters = f.cfg.max_iters;
  if (given("--tol")) cfg.tol = f.cfg.tol;
  if (given("--seed")) cfg.seed = f.cfg.seed;
  if (given("--method")) cfg.method = ParseMethod(f.method);
  if (given("--sweep")) cfg.sweep = ParseSweepOrder(f.sweep);
  cfg.workers = common.threads;
  cfg.Validate();

  // Without explicit data a warm start reuses the covariance and vocabulary
  // its own training run left behind.
  std::string cov_path = f.cov;
  std::string vocab_path = f.vocab;
  if (f.clicks.empty() && f.cov.empty()) {
    if (f.warm_start.empty()) throw std::invalid_argument("train needs --clicks or --cov");
    cov_path = f.warm_start + ".cov";
    if (!std::filesystem::exists(cov_path)) {
      throw DataError("no --clicks or --cov given and " + cov_path + " does not exist");
    }
  }

  // Validate every input file before any heavy work.
  std::optional<ClickLog> log;
  if (!f.clicks.empty()) {
    log = ReadClickLogFile(f.clicks);
    manifest.inputs["clicks"] = f.clicks;
  }
  std::optional<StoredModel> warm;
  if (!f.warm_start.empty()) {
    warm = ReadModelFile(f.warm_start);
    manifest.inputs["warm_start"] = f.warm_start;
    if (vocab_path.empty() && f.clicks.empty()) {
      vocab_path = ResolveVocabPath(f.warm_start, warm->vocab_path);
    }
  }
  std::vector<SynonymPair> synonyms;
  if (!f.synonyms.empty()) {
    auto in = OpenInput(f.synonyms);
    synonyms = ReadSynonyms(in, f.synonyms);
    manifest.inputs["synonyms"] = f.synonyms;
  }
  std::vector<TagTermPair> tag_terms;
  if (!f.tag_terms.empty()) {
    auto in = OpenInput(f.tag_terms);
    tag_terms = ReadTagTerms(in, f.tag_terms);
    manifest.inputs["tag_terms"] = f.tag_terms;
  }
  if (cfg.alpha > 0.0 && synonyms.empty()) Warn("--alpha has no effect without --synonyms");
  if (cfg.beta > 0.0 && tag_terms.empty()) Warn("--beta has no effect without --tag-terms");

  Vocabulary vocab;
  if (!vocab_path.empty()) {
    vocab = Vocabulary::LoadFile(vocab_path);
    manifest.inputs["vocab"] = vocab_path;
  } else if (log) {
    vocab = BuildVocabulary(log->records, f.min_count);
  } else {
    throw std::invalid_argument("--cov needs --vocab");
  }
  const size_t base_size = vocab.size();
  InjectTags(vocab, tag_terms);

  CrossCovariance c;
  if (!cov_path.empty()) {
    c = ReadCovarianceCacheFile(cov_path);
    manifest.inputs["covariance"] = cov_path;
    if (c.rows() > base_size || c.cols() > base_size) {
      throw DataError("covariance cache is wider than the vocabulary");
    }
  } else {
    std::vector<ClickRecord> records = log->records;
    const auto idf = ComputeIdf(records, vocab);
    c = BuildCrossCovariance(MakeTrainingPairs(records, vocab, idf), vocab.size(), vocab.size(),
                             common.threads);
  }
  c = c.Resized(vocab.size(), vocab.size());

  std::optional<KnowledgeMatrix> rx;
  std::optional<KnowledgeMatrix> ry;
  if (!synonyms.empty()) {
    const auto pairs = ToKnowledgePairs(synonyms);
    rx = BuildKnowledgeMatrix(pairs, vocab);
  }
  if (!tag_terms.empty()) {
    const auto pairs = ToKnowledgePairs(tag_terms);
    ry = BuildKnowledgeMatrix(pairs, vocab);
  }

  std::optional<MappingPair> init;
  // A warm start fixes d unless --dim says otherwise (which then fails the
  // shape check).
  if (warm && !given("--dim")) cfg.dim = static_cast<int>(warm->mappings.dim());
  if (warm) init = ExtendWarmStart(std::move(warm->mappings), vocab.size());

  const std::string vocab_out = f.vocab_out.empty() ? f.out + ".vocab" : f.vocab_out;
  const std::string trace_path = f.trace.empty() ? f.out + ".trace.csv" : f.trace;
  const std::string cov_out = f.cov_out.empty() ? f.out + ".cov" : f.cov_out;
  manifest.config_text = FormatTrainConfig(cfg) + OptionSummary(sub);

  const TrainingProblem problem(c, rx ? &*rx : nullptr, ry ? &*ry : nullptr);
  const bool quiet = f.quiet;
  const TrainResult result = Train(problem, cfg, init, [&](int t, double obj, double sec) {
    if (quiet) return;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "iter %4d  objective %.10g  (%.3fs)\n", t, obj, sec);
    err << buf;
  });

  vocab.SaveFile(vocab_out);
  WriteModelFile(f.out, result.mappings, vocab_out);
  WriteCovarianceCacheFile(cov_out, c);
  {
    auto trace = OpenOutput(trace_path);
    trace << "iteration,objective,seconds\n";
    char buf[96];
    for (size_t t = 0; t < result.report.objective_trace.size(); ++t) {
      const double sec = t == 0 ? 0.0 : result.report.seconds_per_iter[t - 1];
      std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.6f\n", t, result.report.objective_trace[t],
                    sec);
      trace << buf;
    }
  }
  manifest.outputs["model"] = f.out;
  manifest.outputs["vocab"] = vocab_out;
  manifest.outputs["trace"] = trace_path;
  manifest.outputs["covariance"] = cov_out;
  err << "trained " << result.report.iterations << " iteration(s), "
      << (result.report.converged ? "converged" : "not converged") << ", final objective "
      << result.report.objective_trace.back() << '\n';
}

struct RankFlags {
  std::string model, vocab, queries, candidates, clicks, docs, out;
  std::string mode = "combined";
  int k = 20;
  double k1 = 1.2, b = 0.75;
  bool bm25_filter = false;
};

// Loads the model (or a zero model over a vocabulary for bm25) and ranks
// according to the candidate or collection inputs.
std::vector<RankedList> ProduceRankings(const RankFlags& f, const CommonFlags& common,
                                        const std::vector<std::string>& default_queries,
                                        Manifest& manifest) {
  RankOptions options;
  options.mode = ParseScoreMode(f.mode);
  options.bm25 = {f.k1, f.b};
  options.bm25_term_filter = f.bm25_filter;
  options.workers = common.threads;

  std::optional<CandidateSet> candidates;
  if (!f.candidates.empty()) {
    auto in = OpenInput(f.candidates);
    candidates = ReadCandidates(in, f.candidates);
    manifest.inputs["candidates"] = f.candidates;
  }
  std::optional<ClickLog> log;
  if (!f.clicks.empty()) {
    log = ReadClickLogFile(f.clicks);
    manifest.inputs["clicks"] = f.clicks;
  }

  std::optional<Model> model;
  if (!f.model.empty()) {
    model.emplace(LoadModel(f.model, f.vocab, manifest));
  } else if (options.mode == ScoreMode::kBm25) {
    Vocabulary vocab;
    if (!f.vocab.empty()) {
      vocab = Vocabulary::LoadFile(f.vocab);
      manifest.inputs["vocab"] = f.vocab;
    } else if (log) {
      vocab = BuildVocabulary(log->records, 1);
    } else {
      throw std::invalid_argument("bm25 without --model needs --vocab or --clicks");
    }
    const auto v = static_cast<Eigen::Index>(vocab.size());
    model.emplace(MappingPair{Eigen::MatrixXd::Zero(1, v), Eigen::MatrixXd::Zero(1, v)},
                  std::move(vocab));
  } else {
    throw std::invalid_argument("--model is required for latent and combined modes");
  }

  std::vector<RankedList> rankings;
  if (candidates) {
    std::vector<std::pair<std::string, std::string>> all;
    for (const auto& q : candidates->queries) {
      for (const auto& d : candidates->docs_by_query.at(q)) all.push_back(d);
    }
    const auto collection = DocumentCollection::Build(all, model->vocab());
    for (const auto& q : candidates->queries) {
      std::vector<size_t> pool;
      for (const auto& d : candidates->docs_by_query.at(q)) {
        pool.push_back(collection.IndexOf(d.first));
      }
      rankings.push_back(RankTopK(*model, q, collection, f.k, options, &pool));
    }
    return rankings;
  }

  DocumentCollection collection;
  if (!f.docs.empty()) {
    collection = DocumentCollection::Build(ReadDocs(f.docs), model->vocab());
    manifest.inputs["docs"] = f.docs;
  } else if (log) {
    collection = DocumentCollection::FromRecords(log->records, model->vocab());
  } else {
    throw std::invalid_argument("ranking needs --candidates, --docs or --clicks");
  }
  std::vector<std::string> queries = default_queries;
  if (!f.queries.empty()) {
    queries = ReadLines(f.queries);
    manifest.inputs["queries"] = f.queries;
  }
  if (queries.empty()) throw std::invalid_argument("no queries to rank (use --queries)");
  for (const auto& q : queries) rankings.push_back(RankTopK(*model, q, collection, f.k, options));
  return rankings;
}

void AddRankOptions(CLI::App* sub, RankFlags& f) {
  sub->add_option("--model", f.model, "Model file (LMM1)");
  sub->add_option("--vocab", f.vocab, "Vocabulary file (overrides the model's recorded path)");
  sub->add_option("--queries", f.queries, "Queries, one per line");
  sub->add_option("--candidates", f.candidates, "Candidate pools: query, doc_id, doc_title");
  sub->add_option("--clicks", f.clicks, "Click log supplying the document collection");
  sub->add_option("--docs", f.docs, "Document collection: doc_id, doc_title");
  sub->add_option("--mode", f.mode, "latent | combined | bm25")
      ->check(CLI::IsMember({"latent", "combined", "bm25"}));
  sub->add_option("--k", f.k, "Documents per query")->check(CLI::PositiveNumber);
  sub->add_option("--k1", f.k1, "BM25 k1");
  sub->add_option("--b", f.b, "BM25 b");
  sub->add_flag("--bm25-filter", f.bm25_filter, "bm25: skip documents sharing no query term");
}

struct EvaluateFlags {
  RankFlags rank;
  std::string judgments, ranking, query_freq, csv;
};

void RunEvaluate(EvaluateFlags& f, const CommonFlags& common, Manifest& manifest,
                 std::ostream& out) {
  auto jin = OpenInput(f.judgments);
  const JudgmentSet judgments = ReadJudgments(jin, f.judgments);
  manifest.inputs["judgments"] = f.judgments;

  std::vector<RankedList> rankings;
  if (!f.ranking.empty()) {
    auto rin = OpenInput(f.ranking);
    rankings = ReadRankings(rin, f.ranking);
    manifest.inputs["ranking"] = f.ranking;
  } else {
    std::vector<std::string> judged;
    {
      auto again = OpenInput(f.judgments);
      std::string line;
      std::set<std::string> seen;
      while (std::getline(again, line)) {
        const auto fields = SplitFields(line, '\t');
        if (!fields.empty() && !fields[0].empty() && seen.insert(fields[0]).second) {
          judged.push_back(fields[0]);
        }
      }
    }
    rankings = ProduceRankings(f.rank, common, judged, manifest);
  }

  std::map<std::string, double> freq;
  if (!f.query_freq.empty()) {
    freq = ReadQueryFrequencies(f.query_freq);
    manifest.inputs["query_freq"] = f.query_freq;
  } else if (!f.rank.clicks.empty()) {
    freq = QueryFrequencies(ReadClickLogFile(f.rank.clicks).records);
  }

  const EvalReport report = EvaluateRun(rankings, judgments, freq);
  report.WriteTable(out);
  if (!f.csv.empty()) {
    auto csv = OpenOutput(f.csv);
    report.WriteCsv(csv);
    manifest.outputs["report_csv"] = f.csv;
  }
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent matching models for search: corpus building, knowledge mining, "
               "training, ranking and NDCG evaluation."};
  app.name("lmm");
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  CommonFlags common;

  BuildCorpusFlags bc;
  auto* build = app.add_subcommand("build-corpus", "Build the vocabulary and cross-covariance");
  build->add_option("--clicks", bc.clicks, "Click log TSV")->required();
  build->add_option("--min-count", bc.min_count, "Minimum term occurrences")
      ->check(CLI::PositiveNumber);
  build->add_option("--vocab-out", bc.vocab_out, "Vocabulary output")->required();
  build->add_option("--cov-out", bc.cov_out, "Cross-covariance cache output (LMC1)");
  AddCommon(build, common);

  MineSynonymsFlags ms;
  auto* syn = app.add_subcommand("mine-synonyms", "Mine synonym pairs from the click graph");
  syn->add_option("--clicks", ms.clicks, "Click log TSV")->required();
  syn->add_option("--top-k", ms.top_k, "Number of pairs to keep");
  syn->add_option("--scale", ms.scale, "Logistic scale for support weights")
      ->check(CLI::PositiveNumber);
  syn->add_option("--min-support", ms.min_support, "Minimum support");
  syn->add_option("--out", ms.out, "Synonym TSV output")->required();
  AddCommon(syn, common);

  MineTagsFlags mt;
  auto* tags = app.add_subcommand("mine-tags", "Mine tag-term pairs from tagged documents");
  tags->add_option("--clicks", mt.clicks, "Click log TSV (document titles)")->required();
  tags->add_option("--tags", mt.tags, "Tag file: doc_id, tag1,tag2,...")->required();
  tags->add_option("--top-k", mt.top_k, "Terms per tag");
  tags->add_option("--min-count", mt.min_count, "Minimum term occurrences")
      ->check(CLI::PositiveNumber);
  tags->add_option("--out", mt.out, "Tag-term TSV output")->required();
  AddCommon(tags, common);

  TrainFlags tr;
  auto* train = app.add_subcommand("train", "Train a latent matching model");
  train->add_option("--clicks", tr.clicks, "Click log TSV");
  train->add_option("--cov", tr.cov, "Cross-covariance cache (needs --vocab)");
  train->add_option("--vocab", tr.vocab, "Vocabulary file");
  train->add_option("--min-count", tr.min_count, "Minimum term occurrences")
      ->check(CLI::PositiveNumber);
  train->add_option("--config", tr.config, "key=value training config");
  train->add_option("--dim", tr.cfg.dim, "Latent dimension d (default 100, or that of --warm-start)");
  train->add_option("--theta2", tr.cfg.theta2, "Matching-matrix l2 penalty");
  train->add_option("--lambda2", tr.cfg.lambda2, "Lx l2 penalty");
  train->add_option("--rho2", tr.cfg.rho2, "Ly l2 penalty");
  train->add_option("--alpha", tr.cfg.alpha, "Weight of query-side (synonym) knowledge");
  train->add_option("--beta", tr.cfg.beta, "Weight of document-side (tag) knowledge");
  train->add_option("--gamma", tr.cfg.gamma, "Gradient-descent learning rate");
  train->add_option("--max-iters", tr.cfg.max_iters, "Iteration cap T");
  train->add_option("--tol", tr.cfg.tol, "Relative objective-change tolerance");
  train->add_option("--seed", tr.cfg.seed, "Initialization seed");
  train->add_option("--method", tr.method, "cd | gd")->check(CLI::IsMember({"cd", "gd"}));
  train->add_option("--sweep", tr.sweep, "Coordinate-descent order: gauss-seidel | jacobi")
      ->check(CLI::IsMember({"gauss-seidel", "jacobi"}));
  train->add_option("--synonyms", tr.synonyms, "Synonym TSV (query-side knowledge)");
  train->add_option("--tag-terms", tr.tag_terms, "Tag-term TSV (document-side knowledge)");
  train->add_option("--warm-start", tr.warm_start, "Initialize from this model");
  train->add_option("--out", tr.out, "Model output (LMM1)")->required();
  train->add_option("--trace", tr.trace, "Objective trace CSV (default <out>.trace.csv)");
  train->add_option("--vocab-out", tr.vocab_out, "Vocabulary output (default <out>.vocab)");
  train->add_option("--cov-out", tr.cov_out, "Covariance cache output (default <out>.cov)");
  train->add_flag("--quiet", tr.quiet, "No per-iteration logging");
  AddCommon(train, common);

  RankFlags rk;
  auto* rank = app.add_subcommand("rank", "Rank documents for queries");
  AddRankOptions(rank, rk);
  rank->add_option("--out", rk.out, "Ranking TSV output")->required();
  AddCommon(rank, common);

  EvaluateFlags ev;
  auto* evaluate = app.add_subcommand("evaluate", "NDCG@{1,3,5,10} over judged queries");
  AddRankOptions(evaluate, ev.rank);
  evaluate->add_option("--judgments", ev.judgments, "Judgments TSV: query, doc_id, label")
      ->required();
  evaluate->add_option("--ranking", ev.ranking, "Evaluate a ranking TSV instead of a model");
  evaluate->add_option("--query-freq", ev.query_freq, "Query frequencies: query, count");
  evaluate->add_option("--csv", ev.csv, "CSV report output");
  AddCommon(evaluate, common);

  std::vector<const char*> argv = {"lmm"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  Manifest manifest;
  try {
    if (build->parsed()) {
      manifest.subcommand = "build-corpus";
      manifest.config_text = OptionSummary(*build);
      RunBuildCorpus(bc, common, manifest, err);
    } else if (syn->parsed()) {
      manifest.subcommand = "mine-synonyms";
      manifest.config_text = OptionSummary(*syn);
      RunMineSynonyms(ms, common, manifest, err);
    } else if (tags->parsed()) {
      manifest.subcommand = "mine-tags";
      manifest.config_text = OptionSummary(*tags);
      RunMineTags(mt, manifest, err);
    } else if (train->parsed()) {
      manifest.subcommand = "train";
      RunTrain(tr, *train, common, manifest, err);
    } else if (rank->parsed()) {
      manifest.subcommand = "rank";
      manifest.config_text = OptionSummary(*rank);
      const auto rankings = ProduceRankings(rk, common, {}, manifest);
      auto file = OpenOutput(rk.out);
      WriteRankings(file, rankings);
      manifest.outputs["ranking"] = rk.out;
    } else if (evaluate->parsed()) {
      manifest.subcommand = "evaluate";
      manifest.config_text = OptionSummary(*evaluate);
      RunEvaluate(ev, common, manifest, out);
    }
    if (!common.manifest.empty()) manifest.Write(common.manifest);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}

}  // namespace lmm::cli
