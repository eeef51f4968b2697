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

#include "lmm/sparse.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lmm {

SparseMatrix::SparseMatrix(size_t rows, size_t cols)
    : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

SparseMatrix SparseMatrix::FromTriplets(size_t rows, size_t cols,
                                        std::vector<Triplet> triplets) {
  for (const Triplet& t : triplets) {
    if (t.row >= rows || t.col >= cols) {
      throw std::out_of_range("sparse triplet outside matrix shape");
    }
  }
  // Stable sort keeps the input order among duplicates, so the summation
  // order below is the caller's order.
  std::stable_sort(triplets.begin(), triplets.end(),
                   [](const Triplet& a, const Triplet& b) {
                     return a.row != b.row ? a.row < b.row : a.col < b.col;
                   });
  SparseMatrix m(rows, cols);
  m.col_idx_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  std::vector<size_t> counts(rows, 0);
  size_t i = 0;
  while (i < triplets.size()) {
    const uint32_t r = triplets[i].row;
    const uint32_t c = triplets[i].col;
    double sum = 0.0;
    while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
      sum += triplets[i].value;
      ++i;
    }
    if (sum != 0.0) {
      m.col_idx_.push_back(c);
      m.values_.push_back(sum);
      ++counts[r];
    }
  }
  for (size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] = m.row_ptr_[r] + counts[r];
  return m;
}

double SparseMatrix::Get(size_t row, size_t col) const {
  if (row >= rows_ || col >= cols_) throw std::out_of_range("SparseMatrix::Get");
  const auto idx = RowIndices(row);
  const auto it = std::lower_bound(idx.begin(), idx.end(), col);
  if (it == idx.end() || *it != col) return 0.0;
  return RowValues(row)[static_cast<size_t>(it - idx.begin())];
}

SparseMatrix SparseMatrix::Transposed() const {
  SparseMatrix t(cols_, rows_);
  std::vector<size_t> counts(cols_, 0);
  for (uint32_t c : col_idx_) ++counts[c];
  for (size_t c = 0; c < cols_; ++c) t.row_ptr_[c + 1] = t.row_ptr_[c] + counts[c];
  t.col_idx_.resize(nnz());
  t.values_.resize(nnz());
  std::vector<size_t> cursor(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
  for (size_t r = 0; r < rows_; ++r) {
    for (size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const size_t dst = cursor[col_idx_[k]]++;
      t.col_idx_[dst] = static_cast<uint32_t>(r);
      t.values_[dst] = values_[k];
    }
  }
  return t;
}

SparseMatrix SparseMatrix::Resized(size_t rows, size_t cols) const {
  if (rows < rows_ || cols < cols_) {
    throw std::invalid_argument("SparseMatrix::Resized cannot shrink");
  }
  SparseMatrix m = *this;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_ptr_.resize(rows + 1, row_ptr_.back());
  return m;
}

std::vector<Triplet> SparseMatrix::ToTriplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (size_t r = 0; r < rows_; ++r) {
    for (size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      out.push_back({static_cast<uint32_t>(r), col_idx_[k], values_[k]});
    }
  }
  return out;
}

Eigen::MatrixXd SparseMatrix::ToDense() const {
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_),
                                                static_cast<Eigen::Index>(cols_));
  for (size_t r = 0; r < rows_; ++r) {
    for (size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      dense(static_cast<Eigen::Index>(r), col_idx_[k]) = values_[k];
    }
  }
  return dense;
}

bool SparseMatrix::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace lmm
