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

// Random instances and dense reference computations shared by the unit and
// acceptance tests. Nothing here calls into the code under test beyond
// constructing its input types.

#ifndef LMM_TESTS_TESTING_H_
#define LMM_TESTS_TESTING_H_

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "lmm/common.h"
#include "lmm/corpus.h"
#include "lmm/knowledge.h"
#include "lmm/sparse.h"
#include "lmm/trainer.h"

namespace lmm::testing {

inline SparseMatrix RandomSparse(std::mt19937_64& rng, size_t rows, size_t cols, double density,
                                 double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_real_distribution<double> value(lo, hi);
  std::vector<Triplet> t;
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) {
      if (coin(rng) < density) t.push_back({uint32_t(r), uint32_t(c), value(rng)});
    }
  }
  return SparseMatrix::FromTriplets(rows, cols, std::move(t));
}

inline SparseMatrix FromDense(const Eigen::MatrixXd& m) {
  std::vector<Triplet> t;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (m(r, c) != 0.0) t.push_back({uint32_t(r), uint32_t(c), m(r, c)});
    }
  }
  return SparseMatrix::FromTriplets(size_t(m.rows()), size_t(m.cols()), std::move(t));
}

// Symmetric, from a handful of random weighted pairs.
inline KnowledgeMatrix RandomKnowledge(std::mt19937_64& rng, size_t dim, int pairs) {
  std::uniform_int_distribution<size_t> term(0, dim - 1);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(Eigen::Index(dim), Eigen::Index(dim));
  for (int i = 0; i < pairs; ++i) {
    const auto a = Eigen::Index(term(rng));
    const auto b = Eigen::Index(term(rng));
    const double s = weight(rng) / pairs;
    r(a, b) += s / 2;
    r(b, a) += s / 2;
  }
  return KnowledgeMatrix(FromDense(r), size_t(pairs), 0);
}

struct Instance {
  CrossCovariance c;
  std::optional<KnowledgeMatrix> rx;
  std::optional<KnowledgeMatrix> ry;

  const KnowledgeMatrix* rx_ptr() const { return rx ? &*rx : nullptr; }
  const KnowledgeMatrix* ry_ptr() const { return ry ? &*ry : nullptr; }
};

inline Instance RandomInstance(std::mt19937_64& rng, size_t dx, size_t dy, bool knowledge) {
  Instance inst;
  inst.c = CrossCovariance(RandomSparse(rng, dx, dy, 0.5), 1.0);
  if (knowledge) {
    inst.rx = RandomKnowledge(rng, dx, 4);
    inst.ry = RandomKnowledge(rng, dy, 4);
  }
  return inst;
}

inline MappingPair RandomMappings(std::mt19937_64& rng, int d, size_t dx, size_t dy) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MappingPair m{Eigen::MatrixXd(d, Eigen::Index(dx)), Eigen::MatrixXd(d, Eigen::Index(dy))};
  for (Eigen::Index i = 0; i < m.lx.size(); ++i) m.lx.data()[i] = u(rng);
  for (Eigen::Index i = 0; i < m.ly.size(); ++i) m.ly.data()[i] = u(rng);
  return m;
}

// F = -<C, Lx^T Ly> - a/2 <Rx, Lx^T Lx> - b/2 <Ry, Ly^T Ly>
//     + t/2 |Lx^T Ly|^2 + l/2 |Lx|^2 + r/2 |Ly|^2, all dense.
inline double DenseObjective(const MappingPair& m, const Instance& inst, const TrainConfig& cfg) {
  const Eigen::MatrixXd match = m.lx.transpose() * m.ly;
  double f = -(inst.c.matrix().ToDense().array() * match.array()).sum();
  if (inst.rx) {
    f -= cfg.alpha / 2 *
         (inst.rx->matrix().ToDense().array() * (m.lx.transpose() * m.lx).array()).sum();
  }
  if (inst.ry) {
    f -= cfg.beta / 2 *
         (inst.ry->matrix().ToDense().array() * (m.ly.transpose() * m.ly).array()).sum();
  }
  f += cfg.theta2 / 2 * match.squaredNorm();
  f += cfg.lambda2 / 2 * m.lx.squaredNorm() + cfg.rho2 / 2 * m.ly.squaredNorm();
  return f;
}

// Central differences of DenseObjective.
inline MappingPair FiniteDifferenceGradient(const MappingPair& m, const Instance& inst,
                                            const TrainConfig& cfg, double h = 1e-5) {
  MappingPair g{Eigen::MatrixXd::Zero(m.lx.rows(), m.lx.cols()),
                Eigen::MatrixXd::Zero(m.ly.rows(), m.ly.cols())};
  auto probe = [&](Eigen::MatrixXd MappingPair::*block, Eigen::MatrixXd& out) {
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      MappingPair plus = m;
      MappingPair minus = m;
      (plus.*block).data()[i] += h;
      (minus.*block).data()[i] -= h;
      out.data()[i] =
          (DenseObjective(plus, inst, cfg) - DenseObjective(minus, inst, cfg)) / (2 * h);
    }
  };
  probe(&MappingPair::lx, g.lx);
  probe(&MappingPair::ly, g.ly);
  return g;
}

inline double MaxRelativeError(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), 1e-8});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline double SingularValueRatio(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  return s.size() < 2 || s(0) == 0.0 ? 0.0 : s(1) / s(0);
}

inline double Cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double n = a.norm() * b.norm();
  return n == 0.0 ? 0.0 : a.dot(b) / n;
}

// Support counts by direct enumeration of (document, query pair, position
// pair): two queries of equal length that agree everywhere except at one
// position back the pair of differing terms under that context. Each
// (pair, context) counts once per document.
inline std::map<std::pair<std::string, std::string>, int64_t> BruteForceSupport(
    const std::map<std::string, std::set<std::string>>& queries_by_doc) {
  std::map<std::pair<std::string, std::string>, int64_t> support;
  for (const auto& [doc, query_set] : queries_by_doc) {
    std::vector<std::vector<std::string>> queries;
    for (const auto& q : query_set) queries.push_back(Tokenize(q));
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (size_t a = 0; a < queries.size(); ++a) {
      for (size_t b = 0; b < queries.size(); ++b) {
        const auto& qa = queries[a];
        const auto& qb = queries[b];
        if (qa.size() != qb.size()) continue;
        for (size_t i = 0; i < qa.size(); ++i) {
          if (qa[i] == qb[i]) continue;
          bool rest_equal = true;
          std::string context;
          for (size_t j = 0; j < qa.size(); ++j) {
            if (j != i && qa[j] != qb[j]) rest_equal = false;
            if (j) context += ' ';
            context += j == i ? "*" : qa[j];
          }
          if (!rest_equal) continue;
          const auto lo = std::min(qa[i], qb[i]);
          const auto hi = std::max(qa[i], qb[i]);
          if (seen.insert({lo, hi, context}).second) ++support[{lo, hi}];
        }
      }
    }
  }
  return support;
}

}  // namespace lmm::testing

#endif  // LMM_TESTS_TESTING_H_
