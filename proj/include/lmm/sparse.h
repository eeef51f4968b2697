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

#ifndef LMM_SPARSE_H_
#define LMM_SPARSE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lmm {

struct Triplet {
  uint32_t row;
  uint32_t col;
  double value;
};

// Immutable compressed-sparse-row matrix of doubles.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(size_t rows, size_t cols);

  // Duplicate coordinates are summed in input order; exact zeros are dropped.
  static SparseMatrix FromTriplets(size_t rows, size_t cols,
                                   std::vector<Triplet> triplets);

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  size_t nnz() const { return values_.size(); }

  std::span<const uint32_t> RowIndices(size_t row) const {
    return {col_idx_.data() + row_ptr_[row], row_ptr_[row + 1] - row_ptr_[row]};
  }
  std::span<const double> RowValues(size_t row) const {
    return {values_.data() + row_ptr_[row], row_ptr_[row + 1] - row_ptr_[row]};
  }

  double Get(size_t row, size_t col) const;

  SparseMatrix Transposed() const;
  // Same entries, larger shape. Used when terms are appended to a vocabulary.
  SparseMatrix Resized(size_t rows, size_t cols) const;

  std::vector<Triplet> ToTriplets() const;
  Eigen::MatrixXd ToDense() const;

  bool AllFinite() const;

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<size_t> row_ptr_{0};
  std::vector<uint32_t> col_idx_;
  std::vector<double> values_;
};

}  // namespace lmm

#endif  // LMM_SPARSE_H_
