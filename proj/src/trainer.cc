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

#include "lmm/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "lmm/common.h"
#include "lmm/parallel.h"

namespace lmm {
namespace {

// Columns per work unit. Fixed so chunk boundaries never depend on workers.
constexpr size_t kColumnChunk = 64;

constexpr double kDivergenceLimit = 1e12;

using Eigen::Index;
using Eigen::MatrixXd;

void CheckFinite(double value, const char* what) {
  if (!std::isfinite(value)) throw NumericalError(std::string("non-finite ") + what);
}

void CheckFinite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string("non-finite entries in ") + what);
}

// Sum over all stored (u, v) of weight(u, v) * <a_u, b_v>.
double SparseBilinear(const SparseMatrix& weights, const MatrixXd& a, const MatrixXd& b,
                      int workers) {
  std::vector<double> partial(NumChunks(weights.rows(), kColumnChunk), 0.0);
  ParallelForChunks(weights.rows(), kColumnChunk, workers, [&](const ChunkRange& range) {
    double sum = 0.0;
    for (size_t u = range.begin; u < range.end; ++u) {
      const auto idx = weights.RowIndices(u);
      const auto val = weights.RowValues(u);
      for (size_t k = 0; k < idx.size(); ++k) {
        sum += val[k] * a.col(static_cast<Index>(u)).dot(b.col(idx[k]));
      }
    }
    partial[range.index] = sum;
  });
  return std::accumulate(partial.begin(), partial.end(), 0.0);
}

// Column u of the result: sum_v primary(u, v) * partner_v
//                        + coef * sum_v knowledge(u, v) * self_v.
MatrixXd RightHandSide(const SparseMatrix& primary, const MatrixXd& partner,
                       const SparseMatrix* knowledge, double coef, const MatrixXd& self,
                       int workers) {
  const Index d = partner.rows();
  MatrixXd rhs = MatrixXd::Zero(d, static_cast<Index>(primary.rows()));
  const bool use_knowledge = knowledge != nullptr && coef != 0.0;
  ParallelForChunks(primary.rows(), kColumnChunk, workers, [&](const ChunkRange& range) {
    for (size_t u = range.begin; u < range.end; ++u) {
      auto out = rhs.col(static_cast<Index>(u));
      const auto idx = primary.RowIndices(u);
      const auto val = primary.RowValues(u);
      for (size_t k = 0; k < idx.size(); ++k) out.noalias() += val[k] * partner.col(idx[k]);
      if (use_knowledge) {
        const auto kidx = knowledge->RowIndices(u);
        const auto kval = knowledge->RowValues(u);
        for (size_t k = 0; k < kidx.size(); ++k) {
          out.noalias() += (coef * kval[k]) * self.col(kidx[k]);
        }
      }
    }
  });
  return rhs;
}

// theta2 * G + shift * I.
MatrixXd SystemMatrix(const MatrixXd& gram, double theta2, double shift) {
  MatrixXd a = theta2 * gram;
  a.diagonal().array() += shift;
  return a;
}

// A * L - rhs, chunked over columns.
MatrixXd Residual(const MatrixXd& a, const MatrixXd& l, const MatrixXd& rhs, int workers) {
  MatrixXd out(l.rows(), l.cols());
  ParallelForChunks(static_cast<size_t>(l.cols()), kColumnChunk, workers,
                    [&](const ChunkRange& range) {
                      const Index b = static_cast<Index>(range.begin);
                      const Index n = static_cast<Index>(range.end - range.begin);
                      out.middleCols(b, n).noalias() = a * l.middleCols(b, n);
                      out.middleCols(b, n) -= rhs.middleCols(b, n);
                    });
  return out;
}

struct GdOutcome {
  MappingPair mappings;
  double objective;
};

GdOutcome GdStepWithObjective(const MappingPair& mappings, const TrainingProblem& problem,
                              const TrainConfig& config) {
  const MappingPair grad = Gradient(mappings, problem, config);
  MappingPair next{mappings.lx - config.gamma * grad.lx, mappings.ly - config.gamma * grad.ly};
  double objective = 0.0;
  try {
    objective = Objective(next, problem, config);
  } catch (const NumericalError&) {
    objective = std::numeric_limits<double>::infinity();
  }
  if (!std::isfinite(objective) || std::abs(objective) > kDivergenceLimit) {
    throw DivergenceError("gradient descent diverged (objective " + std::to_string(objective) +
                          "); lower gamma (currently " + std::to_string(config.gamma) + ")");
  }
  return {std::move(next), objective};
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

void TrainConfig::Validate() const {
  auto require = [](bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
  };
  require(dim >= 1, "dim must be >= 1");
  require(std::isfinite(theta2) && theta2 >= 0.0, "theta2 must be finite and >= 0");
  require(std::isfinite(lambda2) && lambda2 > 0.0, "lambda2 must be finite and > 0");
  require(std::isfinite(rho2) && rho2 > 0.0, "rho2 must be finite and > 0");
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be finite and >= 0");
  require(std::isfinite(beta) && beta >= 0.0, "beta must be finite and >= 0");
  require(std::isfinite(gamma) && gamma >= 0.0, "gamma must be finite and >= 0");
  require(method != Method::kGradient || gamma > 0.0, "gradient descent needs gamma > 0");
  require(max_iters >= 0, "maxIters must be >= 0");
  require(std::isfinite(tol) && tol >= 0.0, "tol must be finite and >= 0");
}

std::string MethodName(Method method) { return method == Method::kCoordinate ? "cd" : "gd"; }

std::string SweepOrderName(SweepOrder order) {
  return order == SweepOrder::kJacobi ? "jacobi" : "gauss-seidel";
}

Method ParseMethod(const std::string& name) {
  if (name == "cd" || name == "coordinate") return Method::kCoordinate;
  if (name == "gd" || name == "gradient") return Method::kGradient;
  throw std::invalid_argument("unknown method '" + name + "' (expected cd or gd)");
}

SweepOrder ParseSweepOrder(const std::string& name) {
  if (name == "jacobi") return SweepOrder::kJacobi;
  if (name == "gauss-seidel" || name == "gs") return SweepOrder::kGaussSeidel;
  throw std::invalid_argument("unknown sweep '" + name + "' (expected jacobi or gauss-seidel)");
}

TrainConfig ParseTrainConfig(std::istream& in, const std::string& source, TrainConfig config) {
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(where + "expected key=value");
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    try {
      size_t used = 0;
      auto as_double = [&]() {
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        return v;
      };
      auto as_int = [&]() {
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        return v;
      };
      if (key == "dim" || key == "d") {
        config.dim = static_cast<int>(as_int());
      } else if (key == "theta2") {
        config.theta2 = as_double();
      } else if (key == "lambda2") {
        config.lambda2 = as_double();
      } else if (key == "rho2") {
        config.rho2 = as_double();
      } else if (key == "alpha") {
        config.alpha = as_double();
      } else if (key == "beta") {
        config.beta = as_double();
      } else if (key == "gamma") {
        config.gamma = as_double();
      } else if (key == "maxIters") {
        config.max_iters = static_cast<int>(as_int());
      } else if (key == "tol") {
        config.tol = as_double();
      } else if (key == "seed") {
        config.seed = static_cast<uint64_t>(as_int());
      } else if (key == "method") {
        config.method = ParseMethod(value);
      } else if (key == "sweep") {
        config.sweep = ParseSweepOrder(value);
      } else if (key == "workers" || key == "threads") {
        config.workers = static_cast<int>(as_int());
      } else if (key == "theta1" || key == "lambda1" || key == "rho1") {
        if (as_double() != 0.0) {
          throw std::invalid_argument(key +
                                      " must be 0: only l2 regularization is supported");
        }
      } else {
        throw std::invalid_argument("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + e.what());
    } catch (const std::out_of_range&) {
      throw std::invalid_argument(where + "value out of range for '" + key + "'");
    }
  }
  return config;
}

TrainConfig LoadTrainConfigFile(const std::string& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return ParseTrainConfig(in, path, base);
}

std::string FormatTrainConfig(const TrainConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "dim=" << c.dim << '\n'
      << "theta2=" << c.theta2 << '\n'
      << "lambda2=" << c.lambda2 << '\n'
      << "rho2=" << c.rho2 << '\n'
      << "alpha=" << c.alpha << '\n'
      << "beta=" << c.beta << '\n'
      << "gamma=" << c.gamma << '\n'
      << "maxIters=" << c.max_iters << '\n'
      << "tol=" << c.tol << '\n'
      << "seed=" << c.seed << '\n'
      << "method=" << MethodName(c.method) << '\n'
      << "sweep=" << SweepOrderName(c.sweep) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Problem / init

TrainingProblem::TrainingProblem(const CrossCovariance& c, const KnowledgeMatrix* rx,
                                 const KnowledgeMatrix* ry)
    : c_(&c), ct_(c.matrix().Transposed()), rx_(rx), ry_(ry) {
  if (rx_ && rx_->dim() != c.rows()) {
    throw std::invalid_argument("Rx dimension " + std::to_string(rx_->dim()) +
                                " does not match C rows " + std::to_string(c.rows()));
  }
  if (ry_ && ry_->dim() != c.cols()) {
    throw std::invalid_argument("Ry dimension " + std::to_string(ry_->dim()) +
                                " does not match C cols " + std::to_string(c.cols()));
  }
}

MappingPair InitMappings(const TrainConfig& config, size_t dx, size_t dy,
                         const std::optional<MappingPair>& warm_start) {
  if (config.dim < 1) throw std::invalid_argument("latent dimension must be >= 1");
  const Index d = config.dim;
  if (warm_start) {
    if (warm_start->dim() != d || warm_start->dx() != static_cast<Index>(dx) ||
        warm_start->dy() != static_cast<Index>(dy)) {
      throw std::invalid_argument("warm start shape does not match (d, d_x, d_y)");
    }
    return *warm_start;
  }
  std::mt19937_64 rng(config.seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  auto draw = [&]() {
    // 53 random bits -> [0, 1), mapped to [-scale, scale).
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return (2.0 * unit - 1.0) * scale;
  };
  MappingPair m{MatrixXd(d, static_cast<Index>(dx)), MatrixXd(d, static_cast<Index>(dy))};
  for (Index j = 0; j < m.lx.cols(); ++j)
    for (Index i = 0; i < d; ++i) m.lx(i, j) = draw();
  for (Index j = 0; j < m.ly.cols(); ++j)
    for (Index i = 0; i < d; ++i) m.ly(i, j) = draw();
  return m;
}

// ---------------------------------------------------------------------------
// Linear algebra

MatrixXd GramMatrix(const MatrixXd& l, int workers) {
  const size_t cols = static_cast<size_t>(l.cols());
  std::vector<MatrixXd> partial(NumChunks(cols, kColumnChunk));
  ParallelForChunks(cols, kColumnChunk, workers, [&](const ChunkRange& range) {
    const auto block = l.middleCols(static_cast<Index>(range.begin),
                                    static_cast<Index>(range.end - range.begin));
    partial[range.index].noalias() = block * block.transpose();
  });
  MatrixXd gram = MatrixXd::Zero(l.rows(), l.rows());
  for (const auto& p : partial) gram += p;
  return gram;
}

MatrixXd SolveSpdMultiRhs(const MatrixXd& a, const MatrixXd& b, int workers) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw std::invalid_argument("SolveSpdMultiRhs: shape mismatch");
  }
  CheckFinite(a, "system matrix");
  CheckFinite(b, "right-hand side");
  const Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Cholesky factorization failed: matrix not positive definite");
  }
  MatrixXd x(b.rows(), b.cols());
  ParallelForChunks(static_cast<size_t>(b.cols()), kColumnChunk, workers,
                    [&](const ChunkRange& range) {
                      const Index begin = static_cast<Index>(range.begin);
                      const Index n = static_cast<Index>(range.end - range.begin);
                      x.middleCols(begin, n) = llt.solve(b.middleCols(begin, n));
                    });
  CheckFinite(x, "solution");
  return x;
}

// ---------------------------------------------------------------------------
// Objective / gradient / updates

double Objective(const MappingPair& m, const TrainingProblem& problem,
                 const TrainConfig& config) {
  if (static_cast<size_t>(m.dx()) != problem.dx() ||
      static_cast<size_t>(m.dy()) != problem.dy() || m.lx.rows() != m.ly.rows()) {
    throw std::invalid_argument("mapping shape does not match the training problem");
  }
  const int w = config.workers;
  const double match = SparseBilinear(problem.c(), m.lx, m.ly, w);
  double knowledge_x = 0.0;
  double knowledge_y = 0.0;
  if (problem.rx() && config.alpha != 0.0) {
    knowledge_x = SparseBilinear(*problem.rx(), m.lx, m.lx, w);
  }
  if (problem.ry() && config.beta != 0.0) {
    knowledge_y = SparseBilinear(*problem.ry(), m.ly, m.ly, w);
  }
  const MatrixXd gx = GramMatrix(m.lx, w);
  const MatrixXd gy = GramMatrix(m.ly, w);
  // ||Lx^T Ly||_F^2 = tr(Lx Lx^T Ly Ly^T) = <Gx, Gy>.
  const double matching_norm = config.theta2 != 0.0 ? (gx.array() * gy.array()).sum() : 0.0;
  const double value = -match - 0.5 * config.alpha * knowledge_x -
                       0.5 * config.beta * knowledge_y + 0.5 * config.theta2 * matching_norm +
                       0.5 * config.lambda2 * gx.trace() + 0.5 * config.rho2 * gy.trace();
  CheckFinite(value, "objective");
  return value;
}

MappingPair Gradient(const MappingPair& m, const TrainingProblem& problem,
                     const TrainConfig& config) {
  const int w = config.workers;
  const MatrixXd a_for_x = SystemMatrix(GramMatrix(m.ly, w), config.theta2, config.lambda2);
  const MatrixXd a_for_y = SystemMatrix(GramMatrix(m.lx, w), config.theta2, config.rho2);
  const MatrixXd rhs_x = RightHandSide(problem.c(), m.ly, problem.rx(), config.alpha, m.lx, w);
  const MatrixXd rhs_y = RightHandSide(problem.ct(), m.lx, problem.ry(), config.beta, m.ly, w);
  return {Residual(a_for_x, m.lx, rhs_x, w), Residual(a_for_y, m.ly, rhs_y, w)};
}

MappingPair CdSweep(const MappingPair& m, const TrainingProblem& problem,
                    const TrainConfig& config) {
  if (!(config.lambda2 > 0.0) || !(config.rho2 > 0.0)) {
    throw std::invalid_argument("coordinate descent needs lambda2 > 0 and rho2 > 0");
  }
  const int w = config.workers;
  const MatrixXd a_for_x = SystemMatrix(GramMatrix(m.ly, w), config.theta2, config.lambda2);
  const MatrixXd rhs_x = RightHandSide(problem.c(), m.ly, problem.rx(), config.alpha, m.lx, w);

  if (config.sweep == SweepOrder::kJacobi) {
    const MatrixXd a_for_y = SystemMatrix(GramMatrix(m.lx, w), config.theta2, config.rho2);
    const MatrixXd rhs_y =
        RightHandSide(problem.ct(), m.lx, problem.ry(), config.beta, m.ly, w);
    return {SolveSpdMultiRhs(a_for_x, rhs_x, w), SolveSpdMultiRhs(a_for_y, rhs_y, w)};
  }

  MatrixXd lx = SolveSpdMultiRhs(a_for_x, rhs_x, w);
  const MatrixXd a_for_y = SystemMatrix(GramMatrix(lx, w), config.theta2, config.rho2);
  const MatrixXd rhs_y = RightHandSide(problem.ct(), lx, problem.ry(), config.beta, m.ly, w);
  return {std::move(lx), SolveSpdMultiRhs(a_for_y, rhs_y, w)};
}

MappingPair GdStep(const MappingPair& m, const TrainingProblem& problem,
                   const TrainConfig& config) {
  return GdStepWithObjective(m, problem, config).mappings;
}

// ---------------------------------------------------------------------------
// Outer loop

double TrainReport::MeanSecondsPerIter() const {
  if (seconds_per_iter.empty()) return 0.0;
  return std::accumulate(seconds_per_iter.begin(), seconds_per_iter.end(), 0.0) /
         static_cast<double>(seconds_per_iter.size());
}

TrainResult Train(const TrainingProblem& problem, const TrainConfig& config,
                  const std::optional<MappingPair>& warm_start,
                  const IterationCallback& on_iteration) {
  config.Validate();
  TrainResult result{InitMappings(config, problem.dx(), problem.dy(), warm_start), {}};
  TrainReport& report = result.report;
  double previous = Objective(result.mappings, problem, config);
  report.objective_trace.push_back(previous);

  for (int t = 1; t <= config.max_iters; ++t) {
    const auto start = std::chrono::steady_clock::now();
    double current = 0.0;
    if (config.method == Method::kCoordinate) {
      result.mappings = CdSweep(result.mappings, problem, config);
      current = Objective(result.mappings, problem, config);
    } else {
      auto outcome = GdStepWithObjective(result.mappings, problem, config);
      result.mappings = std::move(outcome.mappings);
      current = outcome.objective;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!result.mappings.AllFinite()) {
      throw NumericalError("non-finite mapping entries after iteration " + std::to_string(t));
    }
    report.objective_trace.push_back(current);
    report.seconds_per_iter.push_back(seconds);
    report.iterations = t;
    if (on_iteration) on_iteration(t, current, seconds);

    const double change = std::abs(current - previous) / std::max(std::abs(previous), 1e-12);
    previous = current;
    if (change < config.tol) {
      report.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace lmm
