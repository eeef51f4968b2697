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

// Learning the mapping pair (Lx, Ly) of a latent matching model.
//
// The objective, for the symmetric knowledge matrices Rx and Ry, is
//
//   F = - sum_{u,v} c_uv <l_xu, l_yv>
//       - (alpha/2) <Rx, Lx^T Lx> - (beta/2) <Ry, Ly^T Ly>
//       + (theta2/2) ||Lx^T Ly||_F^2 + (lambda2/2) ||Lx||_F^2
//       + (rho2/2) ||Ly||_F^2
//
// whose column gradients are exactly the update directions used by both the
// coordinate-descent and the gradient-descent solvers:
//
//   dF/dl_xu = (theta2 Ly Ly^T + lambda2 I) l_xu - (sum_v c_uv l_yv + alpha sum_v rx_uv l_xv)
//   dF/dl_yv = (theta2 Lx Lx^T + rho2 I) l_yv - (sum_u c_uv l_xu + beta sum_u ry_uv l_yu)
//
// Coordinate descent sets each column to the root of its gradient while the
// other block (and the knowledge right-hand side) is held at an earlier
// snapshot. All reductions run over fixed column chunks and are combined in
// chunk order, so every result is bit-identical for any worker count.

#ifndef LMM_TRAINER_H_
#define LMM_TRAINER_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lmm/corpus.h"
#include "lmm/knowledge.h"
#include "lmm/sparse.h"

namespace lmm {

enum class Method { kCoordinate, kGradient };

// kJacobi updates both blocks from the same iteration-start snapshot.
// kGaussSeidel updates Lx first and builds the Ly system from the new Lx.
enum class SweepOrder { kJacobi, kGaussSeidel };

struct TrainConfig {
  int dim = 100;
  double theta2 = 0.01;
  double lambda2 = 0.1;
  double rho2 = 0.1;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 1e-3;
  int max_iters = 100;
  double tol = 1e-5;
  uint64_t seed = 1;
  Method method = Method::kCoordinate;
  SweepOrder sweep = SweepOrder::kGaussSeidel;
  // <= 0 selects the number of available cores.
  int workers = 0;

  // Throws std::invalid_argument describing the first violated constraint.
  void Validate() const;
};

// `key=value` lines mirroring the TrainConfig field names (dim, theta2,
// lambda2, rho2, alpha, beta, gamma, maxIters, tol, seed, method, sweep,
// workers). '#' starts a comment. Non-zero theta1/lambda1/rho1 are rejected.
TrainConfig ParseTrainConfig(std::istream& in, const std::string& source = "<stream>",
                             TrainConfig base = {});
TrainConfig LoadTrainConfigFile(const std::string& path, TrainConfig base = {});
// Canonical text form; always parses back to the same config.
std::string FormatTrainConfig(const TrainConfig& config);

std::string MethodName(Method method);
std::string SweepOrderName(SweepOrder order);
Method ParseMethod(const std::string& name);
SweepOrder ParseSweepOrder(const std::string& name);

// Column u of lx is the latent vector of query-space term u; column v of ly
// the latent vector of document-space term v.
struct MappingPair {
  Eigen::MatrixXd lx;  // d x d_x
  Eigen::MatrixXd ly;  // d x d_y

  Eigen::Index dim() const { return lx.rows(); }
  Eigen::Index dx() const { return lx.cols(); }
  Eigen::Index dy() const { return ly.cols(); }
  bool AllFinite() const { return lx.allFinite() && ly.allFinite(); }
};

// Immutable training inputs. Holds a reference to `c` and the knowledge
// matrices, which must outlive it, plus a transposed copy of C.
class TrainingProblem {
 public:
  TrainingProblem(const CrossCovariance& c, const KnowledgeMatrix* rx = nullptr,
                  const KnowledgeMatrix* ry = nullptr);

  size_t dx() const { return c_->rows(); }
  size_t dy() const { return c_->cols(); }
  const SparseMatrix& c() const { return c_->matrix(); }
  const SparseMatrix& ct() const { return ct_; }
  const SparseMatrix* rx() const { return rx_ ? &rx_->matrix() : nullptr; }
  const SparseMatrix* ry() const { return ry_ ? &ry_->matrix() : nullptr; }

 private:
  const CrossCovariance* c_;
  SparseMatrix ct_;
  const KnowledgeMatrix* rx_;
  const KnowledgeMatrix* ry_;
};

// Without a warm start: i.i.d. uniform entries on [-1/sqrt(d), 1/sqrt(d)]
// from a generator seeded with config.seed. With a warm start: a copy, after
// checking its shape.
MappingPair InitMappings(const TrainConfig& config, size_t dx, size_t dy,
                         const std::optional<MappingPair>& warm_start = std::nullopt);

double Objective(const MappingPair& mappings, const TrainingProblem& problem,
                 const TrainConfig& config);

// dF/dLx and dF/dLy, column by column.
MappingPair Gradient(const MappingPair& mappings, const TrainingProblem& problem,
                     const TrainConfig& config);

// One coordinate-descent sweep in config.sweep order.
MappingPair CdSweep(const MappingPair& mappings, const TrainingProblem& problem,
                    const TrainConfig& config);

// L' = L - gamma * gradient, both blocks from the same snapshot. Throws
// DivergenceError when |F(L')| exceeds 1e12 or is not finite.
MappingPair GdStep(const MappingPair& mappings, const TrainingProblem& problem,
                   const TrainConfig& config);

// X with A X = B, A symmetric positive definite. One Cholesky factorization
// is shared by all column chunks of B. Throws NumericalError on non-finite
// input or a failed factorization.
Eigen::MatrixXd SolveSpdMultiRhs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 int workers = 1);

// L L^T, reduced over fixed column chunks in chunk order.
Eigen::MatrixXd GramMatrix(const Eigen::MatrixXd& l, int workers = 1);

struct TrainReport {
  // objective_trace[0] is the objective of the initial mappings;
  // objective_trace[t] the objective after iteration t.
  std::vector<double> objective_trace;
  std::vector<double> seconds_per_iter;
  int iterations = 0;
  bool converged = false;

  double MeanSecondsPerIter() const;
};

struct TrainResult {
  MappingPair mappings;
  TrainReport report;
};

using IterationCallback = std::function<void(int iteration, double objective, double seconds)>;

// Iterates CdSweep or GdStep until
//   |F_t - F_{t-1}| / max(|F_{t-1}|, 1e-12) < tol
// or max_iters iterations have run.
TrainResult Train(const TrainingProblem& problem, const TrainConfig& config,
                  const std::optional<MappingPair>& warm_start = std::nullopt,
                  const IterationCallback& on_iteration = {});

}  // namespace lmm

#endif  // LMM_TRAINER_H_
