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

#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cli.h"
#include "lmm/common.h"
#include "lmm/corpus.h"
#include "lmm/eval.h"
#include "lmm/knowledge.h"
#include "lmm/model_io.h"
#include "lmm/scorer.h"
#include "lmm/trainer.h"

namespace py = pybind11;

namespace lmm {
namespace {

using Entries = std::vector<std::pair<uint32_t, double>>;
using Docs = std::vector<std::pair<std::string, std::string>>;

Entries ToEntries(const TermVector& v) {
  Entries out;
  for (const auto& e : v.entries()) out.emplace_back(e.id, e.weight);
  return out;
}

TermVector FromEntries(size_t dim, const Entries& entries) {
  std::vector<TermEntry> e;
  for (const auto& [id, w] : entries) e.push_back({id, w});
  return TermVector::FromEntries(dim, std::move(e));
}

CrossCovariance CovarianceFromRecords(const std::vector<ClickRecord>& records,
                                      const Vocabulary& vocab, int workers) {
  const auto idf = ComputeIdf(records, vocab);
  return BuildCrossCovariance(MakeTrainingPairs(records, vocab, idf), vocab.size(),
                              vocab.size(), workers);
}

CrossCovariance CovarianceFromDense(const Eigen::MatrixXd& dense) {
  std::vector<Triplet> t;
  for (Eigen::Index r = 0; r < dense.rows(); ++r) {
    for (Eigen::Index c = 0; c < dense.cols(); ++c) {
      if (dense(r, c) != 0.0) t.push_back({uint32_t(r), uint32_t(c), dense(r, c)});
    }
  }
  return CrossCovariance(SparseMatrix::FromTriplets(size_t(dense.rows()), size_t(dense.cols()),
                                                    std::move(t)),
                         1.0);
}

KnowledgeMatrix KnowledgeFromTuples(
    const std::vector<std::tuple<std::string, std::string, double>>& pairs,
    const Vocabulary& vocab) {
  std::vector<KnowledgePair> kp;
  for (const auto& [a, b, w] : pairs) kp.push_back({a, b, w});
  return BuildKnowledgeMatrix(kp, vocab);
}

py::dict ReportDict(const TrainReport& r) {
  py::dict d;
  d["objective_trace"] = r.objective_trace;
  d["seconds_per_iter"] = r.seconds_per_iter;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  return d;
}

std::optional<MappingPair> Warm(const std::optional<std::pair<Eigen::MatrixXd,
                                                              Eigen::MatrixXd>>& warm) {
  if (!warm) return std::nullopt;
  return MappingPair{warm->first, warm->second};
}

}  // namespace
}  // namespace lmm

PYBIND11_MODULE(_core, m) {
  using namespace lmm;
  m.doc() = "Latent matching models for search.";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("set_warnings_enabled", &SetWarningsEnabled);
  m.def("tokenize", &Tokenize);

  // Corpus.
  py::class_<Vocabulary>(m, "Vocabulary")
      .def(py::init<>())
      .def(py::init([](const std::vector<std::string>& terms) {
        Vocabulary v;
        for (const auto& t : terms) v.Add(t);
        return v;
      }))
      .def("add", &Vocabulary::Add)
      .def("lookup", &Vocabulary::Lookup)
      .def("term", &Vocabulary::Term)
      .def_property_readonly("terms", &Vocabulary::terms)
      .def("__len__", &Vocabulary::size)
      .def("save", &Vocabulary::SaveFile)
      .def_static("load", &Vocabulary::LoadFile);

  py::class_<ClickRecord>(m, "ClickRecord")
      .def(py::init<std::string, std::string, std::string, int64_t>(), py::arg("query"),
           py::arg("doc_id"), py::arg("doc_title"), py::arg("clicks"))
      .def_readwrite("query", &ClickRecord::query)
      .def_readwrite("doc_id", &ClickRecord::doc_id)
      .def_readwrite("doc_title", &ClickRecord::doc_title)
      .def_readwrite("clicks", &ClickRecord::clicks);

  m.def("read_click_log", [](const std::string& path) { return ReadClickLogFile(path).records; });
  m.def("build_vocabulary",
        [](const std::vector<ClickRecord>& r, int min_count) { return BuildVocabulary(r, min_count); },
        py::arg("records"), py::arg("min_count") = 1);
  m.def("compute_idf", [](const std::vector<ClickRecord>& r, const Vocabulary& v) {
    return ComputeIdf(r, v);
  });
  m.def("vectorize_query", [](const std::string& text, const Vocabulary& v) {
    return ToEntries(VectorizeQuery(text, v));
  });
  m.def("vectorize_document",
        [](const std::string& title, const Vocabulary& v, const std::vector<double>& idf) {
          return ToEntries(VectorizeDocument(title, v, idf));
        });

  py::class_<CrossCovariance>(m, "CrossCovariance")
      .def_property_readonly("shape", [](const CrossCovariance& c) {
        return std::make_pair(c.rows(), c.cols());
      })
      .def_property_readonly("nnz", &CrossCovariance::nnz)
      .def_property_readonly("total_weight", &CrossCovariance::total_weight)
      .def("get", &CrossCovariance::Get)
      .def("to_dense", [](const CrossCovariance& c) { return c.matrix().ToDense(); })
      .def("save", &WriteCovarianceCacheFile)
      .def_static("load", &ReadCovarianceCacheFile)
      .def_static("from_dense", &CovarianceFromDense);
  m.def("build_cross_covariance", &CovarianceFromRecords, py::arg("records"), py::arg("vocab"),
        py::arg("workers") = 1);

  // Knowledge.
  m.def("extract_context", [](const std::vector<std::string>& tokens, size_t position) {
    return ExtractContext(tokens, position);
  });
  m.def("logistic_weight", &LogisticWeight, py::arg("support"), py::arg("scale") = 1.0);

  py::class_<SynonymPair>(m, "SynonymPair")
      .def_readonly("term1", &SynonymPair::term1)
      .def_readonly("term2", &SynonymPair::term2)
      .def_readonly("support", &SynonymPair::support)
      .def_readonly("weight", &SynonymPair::weight)
      .def("__repr__", [](const SynonymPair& p) {
        return "SynonymPair(" + p.term1 + ", " + p.term2 + ", " + std::to_string(p.support) + ")";
      });
  m.def(
      "mine_synonyms",
      [](const std::vector<ClickRecord>& records, size_t top_k, double scale,
         int64_t min_support, int workers) {
        SynonymMiningOptions options{top_k, scale, min_support, workers};
        return MineSynonyms(ClickGraph::FromRecords(records), options);
      },
      py::arg("records"), py::arg("top_k") = 1000, py::arg("scale") = 1.0,
      py::arg("min_support") = 1, py::arg("workers") = 1);
  m.def(
      "mine_tag_terms",
      [](const std::map<std::string, std::vector<Entries>>& tagged, const Vocabulary& vocab,
         size_t k) {
        TagCorpus corpus;
        for (const auto& [tag, docs] : tagged) {
          auto& vectors = corpus[tag];
          for (const auto& d : docs) vectors.push_back(FromEntries(vocab.size(), d));
        }
        std::vector<std::tuple<std::string, std::string, double>> out;
        for (const auto& p : MineTagTerms(corpus, vocab, k)) out.emplace_back(p.tag, p.term, p.weight);
        return out;
      },
      py::arg("tagged_docs"), py::arg("vocab"), py::arg("k"));

  py::class_<KnowledgeMatrix>(m, "KnowledgeMatrix")
      .def_property_readonly("dim", &KnowledgeMatrix::dim)
      .def_property_readonly("pair_count", &KnowledgeMatrix::pair_count)
      .def_property_readonly("dropped", &KnowledgeMatrix::dropped)
      .def("get", &KnowledgeMatrix::Get)
      .def("to_dense", [](const KnowledgeMatrix& r) { return r.matrix().ToDense(); });
  m.def("build_knowledge_matrix", &KnowledgeFromTuples, py::arg("pairs"), py::arg("vocab"));

  // Trainer.
  py::enum_<Method>(m, "Method")
      .value("CD", Method::kCoordinate)
      .value("GD", Method::kGradient);
  py::enum_<SweepOrder>(m, "SweepOrder")
      .value("JACOBI", SweepOrder::kJacobi)
      .value("GAUSS_SEIDEL", SweepOrder::kGaussSeidel);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("dim", &TrainConfig::dim)
      .def_readwrite("theta2", &TrainConfig::theta2)
      .def_readwrite("lambda2", &TrainConfig::lambda2)
      .def_readwrite("rho2", &TrainConfig::rho2)
      .def_readwrite("alpha", &TrainConfig::alpha)
      .def_readwrite("beta", &TrainConfig::beta)
      .def_readwrite("gamma", &TrainConfig::gamma)
      .def_readwrite("max_iters", &TrainConfig::max_iters)
      .def_readwrite("tol", &TrainConfig::tol)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("method", &TrainConfig::method)
      .def_readwrite("sweep", &TrainConfig::sweep)
      .def_readwrite("workers", &TrainConfig::workers)
      .def("validate", &TrainConfig::Validate)
      .def("__repr__", &FormatTrainConfig);

  using Pair = std::pair<Eigen::MatrixXd, Eigen::MatrixXd>;
  const auto problem_args = [](const CrossCovariance& c, const KnowledgeMatrix* rx,
                               const KnowledgeMatrix* ry) { return TrainingProblem(c, rx, ry); };

  m.def(
      "train",
      [problem_args](const CrossCovariance& c, const TrainConfig& cfg, const KnowledgeMatrix* rx,
                     const KnowledgeMatrix* ry, const std::optional<Pair>& warm_start) {
        const TrainingProblem p = problem_args(c, rx, ry);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = Train(p, cfg, Warm(warm_start));
        }
        return py::make_tuple(r.mappings.lx, r.mappings.ly, ReportDict(r.report));
      },
      py::arg("cov"), py::arg("config"), py::arg("rx") = nullptr, py::arg("ry") = nullptr,
      py::arg("warm_start") = std::nullopt);
  m.def(
      "init_mappings",
      [](const TrainConfig& cfg, size_t dx, size_t dy) {
        const MappingPair mp = InitMappings(cfg, dx, dy);
        return Pair(mp.lx, mp.ly);
      });
  m.def(
      "objective",
      [problem_args](const Eigen::MatrixXd& lx, const Eigen::MatrixXd& ly,
                     const CrossCovariance& c, const TrainConfig& cfg, const KnowledgeMatrix* rx,
                     const KnowledgeMatrix* ry) {
        return Objective({lx, ly}, problem_args(c, rx, ry), cfg);
      },
      py::arg("lx"), py::arg("ly"), py::arg("cov"), py::arg("config"), py::arg("rx") = nullptr,
      py::arg("ry") = nullptr);
  m.def(
      "gradient",
      [problem_args](const Eigen::MatrixXd& lx, const Eigen::MatrixXd& ly,
                     const CrossCovariance& c, const TrainConfig& cfg, const KnowledgeMatrix* rx,
                     const KnowledgeMatrix* ry) {
        const MappingPair g = Gradient({lx, ly}, problem_args(c, rx, ry), cfg);
        return Pair(g.lx, g.ly);
      },
      py::arg("lx"), py::arg("ly"), py::arg("cov"), py::arg("config"), py::arg("rx") = nullptr,
      py::arg("ry") = nullptr);
  m.def(
      "cd_sweep",
      [problem_args](const Eigen::MatrixXd& lx, const Eigen::MatrixXd& ly,
                     const CrossCovariance& c, const TrainConfig& cfg, const KnowledgeMatrix* rx,
                     const KnowledgeMatrix* ry) {
        const MappingPair n = CdSweep({lx, ly}, problem_args(c, rx, ry), cfg);
        return Pair(n.lx, n.ly);
      },
      py::arg("lx"), py::arg("ly"), py::arg("cov"), py::arg("config"), py::arg("rx") = nullptr,
      py::arg("ry") = nullptr);
  m.def("solve_spd", &SolveSpdMultiRhs, py::arg("a"), py::arg("b"), py::arg("workers") = 1);

  m.def("write_model", [](const std::string& path, const Eigen::MatrixXd& lx,
                          const Eigen::MatrixXd& ly, const std::string& vocab_path) {
    WriteModelFile(path, {lx, ly}, vocab_path);
  });
  m.def("read_model", [](const std::string& path) {
    StoredModel s = ReadModelFile(path);
    return py::make_tuple(s.mappings.lx, s.mappings.ly, s.vocab_path);
  });

  // Scorer.
  py::class_<Model>(m, "Model")
      .def(py::init([](const Eigen::MatrixXd& lx, const Eigen::MatrixXd& ly, Vocabulary vocab) {
        return Model({lx, ly}, std::move(vocab));
      }))
      .def_property_readonly("vocab", &Model::vocab)
      .def("latent_match",
           [](const Model& model, const Entries& x, const Entries& y) {
             const size_t v = model.vocab().size();
             return LatentMatch(model, FromEntries(v, x), FromEntries(v, y));
           })
      .def("score_ir", [](const Model& model, const Entries& x, const Entries& y) {
        const size_t v = model.vocab().size();
        return ScoreIR(model, FromEntries(v, x), FromEntries(v, y));
      });
  m.def(
      "rank",
      [](const Model& model, const std::string& query, const Docs& docs, int k,
         const std::string& mode, int workers) {
        RankOptions options;
        options.mode = ParseScoreMode(mode);
        options.workers = workers;
        const auto collection = DocumentCollection::Build(docs, model.vocab());
        std::vector<std::pair<std::string, double>> out;
        for (const auto& item : RankTopK(model, query, collection, k, options).items) {
          out.emplace_back(item.doc_id, item.score);
        }
        return out;
      },
      py::arg("model"), py::arg("query"), py::arg("docs"), py::arg("k") = 20,
      py::arg("mode") = "combined", py::arg("workers") = 1);

  // Evaluation.
  m.def(
      "ndcg_at_k",
      [](const std::vector<int>& ranked, int k, const std::optional<std::vector<int>>& ideal) {
        return ideal ? NdcgAtK(ranked, *ideal, k) : NdcgAtK(ranked, k);
      },
      py::arg("ranked_labels"), py::arg("k"), py::arg("ideal_labels") = std::nullopt);
  m.def("split_head_tail",
        [](const std::vector<std::string>& queries, const std::map<std::string, double>& freq) {
          const HeadTailSplit s = SplitHeadTail(queries, freq);
          return std::make_pair(s.head, s.tail);
        });
  m.def("paired_t_test", [](const std::vector<double>& a, const std::vector<double>& b) {
    const TTestResult r = PairedTTest(a, b);
    return std::make_pair(r.t, r.p_value);
  });

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::Run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      "Runs the lmm command line in-process; returns (exit code, stdout, stderr).");

  m.attr("__version__") = cli::kToolVersion;
}
