// Copyright 2026 The pathqp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "pathqp/errors.hpp"
#include "pathqp/linalg.hpp"

namespace pathqp {

template <class T>
struct Triplet {
  std::size_t row;
  std::size_t col;
  T value;
};

/// Compressed sparse column matrix. This is the canonical interchange format;
/// every structured representation converts to and from it.
template <class T>
class CscMatrix {
 public:
  CscMatrix() : col_ptr_(1, 0) {}

  CscMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> col_ptr,
            std::vector<std::size_t> row_idx, std::vector<T> values)
      : rows_(rows),
        cols_(cols),
        col_ptr_(std::move(col_ptr)),
        row_idx_(std::move(row_idx)),
        values_(std::move(values)) {
    validate();
  }

  /// Builds from unordered triplets; duplicates are summed.
  static CscMatrix from_triplets(std::size_t rows, std::size_t cols,
                                 std::vector<Triplet<T>> triplets) {
    for (const auto& t : triplets) {
      if (t.row >= rows || t.col >= cols) {
        throw DimensionError("triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                             ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
      }
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet<T>& a, const Triplet<T>& b) {
      return std::tie(a.col, a.row) < std::tie(b.col, b.row);
    });
    std::vector<std::size_t> col_ptr(cols + 1, 0);
    std::vector<std::size_t> row_idx;
    std::vector<T> values;
    row_idx.reserve(triplets.size());
    values.reserve(triplets.size());
    for (std::size_t k = 0; k < triplets.size(); ++k) {
      const auto& t = triplets[k];
      if (!row_idx.empty() && k > 0 && triplets[k - 1].col == t.col &&
          triplets[k - 1].row == t.row) {
        values.back() += t.value;
        continue;
      }
      row_idx.push_back(t.row);
      values.push_back(t.value);
      ++col_ptr[t.col + 1];
    }
    std::partial_sum(col_ptr.begin(), col_ptr.end(), col_ptr.begin());
    return CscMatrix(rows, cols, std::move(col_ptr), std::move(row_idx), std::move(values));
  }

  static CscMatrix identity(std::size_t n, T scale = T(1)) {
    std::vector<std::size_t> col_ptr(n + 1);
    std::iota(col_ptr.begin(), col_ptr.end(), std::size_t{0});
    std::vector<std::size_t> row_idx(n);
    std::iota(row_idx.begin(), row_idx.end(), std::size_t{0});
    return CscMatrix(n, n, std::move(col_ptr), std::move(row_idx), std::vector<T>(n, scale));
  }

  static CscMatrix diagonal(std::span<const T> d) {
    CscMatrix m = identity(d.size());
    std::copy(d.begin(), d.end(), m.values_.begin());
    return m;
  }

  static CscMatrix zeros(std::size_t rows, std::size_t cols) {
    return CscMatrix(rows, cols, std::vector<std::size_t>(cols + 1, 0), {}, {});
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> col_ptr() const { return col_ptr_; }
  std::span<const std::size_t> row_idx() const { return row_idx_; }
  std::span<const T> values() const { return values_; }
  /// Values may be rewritten in place; the sparsity structure may not.
  std::span<T> values_mut() { return values_; }

  /// Entry (r, c), or zero when structurally absent.
  T coeff(std::size_t r, std::size_t c) const {
    const auto pos = find(r, c);
    return pos == npos ? T(0) : values_[pos];
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  /// Storage position of (r, c), or npos.
  std::size_t find(std::size_t r, std::size_t c) const {
    if (c >= cols_) return npos;
    const auto begin = row_idx_.begin() + static_cast<std::ptrdiff_t>(col_ptr_[c]);
    const auto end = row_idx_.begin() + static_cast<std::ptrdiff_t>(col_ptr_[c + 1]);
    const auto it = std::lower_bound(begin, end, r);
    if (it == end || *it != r) return npos;
    return static_cast<std::size_t>(it - row_idx_.begin());
  }

  std::vector<Triplet<T>> triplets() const {
    std::vector<Triplet<T>> out;
    out.reserve(nnz());
    for (std::size_t c = 0; c < cols_; ++c) {
      for (std::size_t p = col_ptr_[c]; p < col_ptr_[c + 1]; ++p) {
        out.push_back({row_idx_[p], c, values_[p]});
      }
    }
    return out;
  }

  CscMatrix transpose() const {
    auto t = triplets();
    for (auto& e : t) std::swap(e.row, e.col);
    return from_triplets(cols_, rows_, std::move(t));
  }

  template <class U>
  CscMatrix<U> cast() const {
    std::vector<U> v(values_.size());
    std::transform(values_.begin(), values_.end(), v.begin(),
                   [](T x) { return static_cast<U>(x); });
    return CscMatrix<U>(rows_, cols_, col_ptr_, row_idx_, std::move(v));
  }

  /// Dense row-major copy; intended for tests and small problems.
  std::vector<T> to_dense() const {
    std::vector<T> d(rows_ * cols_, T(0));
    for (std::size_t c = 0; c < cols_; ++c) {
      for (std::size_t p = col_ptr_[c]; p < col_ptr_[c + 1]; ++p) {
        d[row_idx_[p] * cols_ + c] = values_[p];
      }
    }
    return d;
  }

  /// Column-wise infinity norms.
  Vector<T> col_inf_norms() const {
    Vector<T> out(cols_, T(0));
    for (std::size_t c = 0; c < cols_; ++c) {
      for (std::size_t p = col_ptr_[c]; p < col_ptr_[c + 1]; ++p) {
        out[c] = std::max(out[c], static_cast<T>(std::abs(values_[p])));
      }
    }
    return out;
  }

  /// Row-wise infinity norms.
  Vector<T> row_inf_norms() const {
    Vector<T> out(rows_, T(0));
    for (std::size_t p = 0; p < values_.size(); ++p) {
      out[row_idx_[p]] = std::max(out[row_idx_[p]], static_cast<T>(std::abs(values_[p])));
    }
    return out;
  }

  /// this <- diag(left) * this * diag(right)
  void scale(std::span<const T> left, std::span<const T> right) {
    detail::require_same_size(left.size(), rows_, "scale rows");
    detail::require_same_size(right.size(), cols_, "scale cols");
    for (std::size_t c = 0; c < cols_; ++c) {
      for (std::size_t p = col_ptr_[c]; p < col_ptr_[c + 1]; ++p) {
        values_[p] = left[row_idx_[p]] * values_[p] * right[c];
      }
    }
  }

  bool same_structure(const CscMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && col_ptr_ == o.col_ptr_ &&
           row_idx_ == o.row_idx_;
  }

  /// Same structure and bitwise-equal values.
  bool operator==(const CscMatrix& o) const { return same_structure(o) && values_ == o.values_; }

 private:
  void validate() const {
    if (col_ptr_.size() != cols_ + 1) throw DimensionError("csc: col_ptr length != cols + 1");
    if (col_ptr_.front() != 0) throw DimensionError("csc: col_ptr[0] != 0");
    if (col_ptr_.back() != row_idx_.size() || row_idx_.size() != values_.size()) {
      throw DimensionError("csc: col_ptr[last] != nnz");
    }
    for (std::size_t c = 0; c < cols_; ++c) {
      if (col_ptr_[c] > col_ptr_[c + 1]) throw DimensionError("csc: col_ptr decreasing");
      for (std::size_t p = col_ptr_[c]; p < col_ptr_[c + 1]; ++p) {
        if (row_idx_[p] >= rows_) throw DimensionError("csc: row index out of range");
        if (p > col_ptr_[c] && row_idx_[p] <= row_idx_[p - 1]) {
          throw DimensionError("csc: row indices not strictly increasing in column " +
                               std::to_string(c));
        }
      }
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> col_ptr_;
  std::vector<std::size_t> row_idx_;
  std::vector<T> values_;
};

/// y = A x, column scatter form (baseline path).
template <class T>
Vector<T> spmv_csc(const CscMatrix<T>& a, std::span<const T> x) {
  detail::require_same_size(x.size(), a.cols(), "spmv_csc");
  Vector<T> y(a.rows(), T(0));
  const auto cp = a.col_ptr();
  const auto ri = a.row_idx();
  const auto v = a.values();
  for (std::size_t c = 0; c < a.cols(); ++c) {
    const T xc = x[c];
    for (std::size_t p = cp[c]; p < cp[c + 1]; ++p) y[ri[p]] += v[p] * xc;
  }
  return y;
}

template <class T>
Vector<T> spmv_csc(const CscMatrix<T>& a, const Vector<T>& x) {
  return spmv_csc(a, std::span<const T>(x));
}

/// y = A^T x, column gather form.
template <class T>
Vector<T> spmv_csc_t(const CscMatrix<T>& a, std::span<const T> x) {
  detail::require_same_size(x.size(), a.rows(), "spmv_csc_t");
  Vector<T> y(a.cols(), T(0));
  const auto cp = a.col_ptr();
  const auto ri = a.row_idx();
  const auto v = a.values();
  for (std::size_t c = 0; c < a.cols(); ++c) {
    T acc = T(0);
    for (std::size_t p = cp[c]; p < cp[c + 1]; ++p) acc += v[p] * x[ri[p]];
    y[c] = acc;
  }
  return y;
}

template <class T>
Vector<T> spmv_csc_t(const CscMatrix<T>& a, const Vector<T>& x) {
  return spmv_csc_t(a, std::span<const T>(x));
}

}  // namespace pathqp
