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

// Block storage for structured sparse matrices.
//
// A matrix whose nonzeros repeat with the trajectory point index is stored as
// a handful of element streams. Stream s holds the entries
//
//   (row_base + k * row_stride, col_base + k * col_stride),  k = 0 .. count-1
//
// so a kernel can walk a stream without touching row indices or column
// pointers. The constraint matrix of a planning problem has one stream per
// repeating coefficient (7 per point, 10 per point transition) plus a few
// single-entry boundary streams.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pathqp/csc_matrix.hpp"
#include "pathqp/errors.hpp"

namespace pathqp {

struct StreamRule {
  std::string label;
  std::size_t row_base = 0;
  std::ptrdiff_t row_stride = 0;
  std::size_t col_base = 0;
  std::ptrdiff_t col_stride = 0;
  std::size_t count = 0;

  std::size_t row(std::size_t k) const {
    return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(row_base) +
                                    static_cast<std::ptrdiff_t>(k) * row_stride);
  }
  std::size_t col(std::size_t k) const {
    return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(col_base) +
                                    static_cast<std::ptrdiff_t>(k) * col_stride);
  }
};

struct PatternDescriptor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<StreamRule> streams;

  std::size_t nnz() const {
    std::size_t n = 0;
    for (const auto& s : streams) n += s.count;
    return n;
  }
};

template <class T>
class PatternedMatrix {
 public:
  PatternedMatrix() = default;

  PatternedMatrix(PatternDescriptor desc, std::vector<std::vector<T>> values)
      : desc_(std::move(desc)), values_(std::move(values)) {
    if (values_.size() != desc_.streams.size()) {
      throw DescriptorError("patterned matrix: one value stream per rule required");
    }
    for (std::size_t s = 0; s < values_.size(); ++s) {
      const auto& rule = desc_.streams[s];
      if (values_[s].size() != rule.count) {
        throw DescriptorError("patterned matrix: stream '" + rule.label + "' has " +
                              std::to_string(values_[s].size()) + " values, rule expects " +
                              std::to_string(rule.count));
      }
      if (rule.count > 0) {
        for (std::size_t k : {std::size_t{0}, rule.count - 1}) {
          if (rule.row(k) >= desc_.rows || rule.col(k) >= desc_.cols) {
            throw DescriptorError("patterned matrix: stream '" + rule.label +
                                  "' leaves the matrix at step " + std::to_string(k));
          }
        }
      }
    }
  }

  std::size_t rows() const { return desc_.rows; }
  std::size_t cols() const { return desc_.cols; }
  std::size_t nnz() const { return desc_.nnz(); }
  std::size_t num_streams() const { return desc_.streams.size(); }
  const PatternDescriptor& descriptor() const { return desc_; }
  const StreamRule& rule(std::size_t s) const { return desc_.streams[s]; }
  std::span<const T> stream(std::size_t s) const { return values_[s]; }
  std::span<T> stream_mut(std::size_t s) { return values_[s]; }

  /// Expands all streams; throws if two streams address the same entry.
  std::vector<Triplet<T>> triplets() const {
    std::vector<Triplet<T>> out;
    out.reserve(nnz());
    for (std::size_t s = 0; s < values_.size(); ++s) {
      const auto& r = desc_.streams[s];
      for (std::size_t k = 0; k < r.count; ++k) out.push_back({r.row(k), r.col(k), values_[s][k]});
    }
    return out;
  }

 private:
  PatternDescriptor desc_;
  std::vector<std::vector<T>> values_;
};

template <class T>
CscMatrix<T> patterned_to_csc(const PatternedMatrix<T>& m) {
  auto t = m.triplets();
  auto csc = CscMatrix<T>::from_triplets(m.rows(), m.cols(), std::move(t));
  if (csc.nnz() != m.nnz()) {
    throw DescriptorError("patterned matrix: streams overlap (" + std::to_string(m.nnz()) +
                          " stream entries, " + std::to_string(csc.nnz()) + " distinct)");
  }
  return csc;
}

/// Splits a CSC matrix into the streams of `desc`. The sparsity of `a` must
/// match the descriptor exactly.
template <class T>
PatternedMatrix<T> csc_to_patterned(const CscMatrix<T>& a, const PatternDescriptor& desc) {
  if (a.rows() != desc.rows || a.cols() != desc.cols) {
    throw DescriptorError("descriptor shape " + std::to_string(desc.rows) + "x" +
                          std::to_string(desc.cols) + " does not match matrix " +
                          std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  std::vector<std::uint8_t> covered(a.nnz(), 0);
  std::vector<std::vector<T>> values(desc.streams.size());
  const auto vals = a.values();
  for (std::size_t s = 0; s < desc.streams.size(); ++s) {
    const auto& rule = desc.streams[s];
    values[s].resize(rule.count);
    for (std::size_t k = 0; k < rule.count; ++k) {
      const std::size_t r = rule.row(k);
      const std::size_t c = rule.col(k);
      const std::size_t pos = (r < a.rows()) ? a.find(r, c) : CscMatrix<T>::npos;
      if (pos == CscMatrix<T>::npos) {
        throw DescriptorError("stream '" + rule.label + "' step " + std::to_string(k) +
                              ": entry (" + std::to_string(r) + "," + std::to_string(c) +
                              ") is not stored in the matrix");
      }
      if (covered[pos]) {
        throw DescriptorError("stream '" + rule.label + "' step " + std::to_string(k) +
                              ": entry (" + std::to_string(r) + "," + std::to_string(c) +
                              ") is claimed twice");
      }
      covered[pos] = 1;
      values[s][k] = vals[pos];
    }
  }
  const auto cp = a.col_ptr();
  const auto ri = a.row_idx();
  for (std::size_t c = 0; c < a.cols(); ++c) {
    for (std::size_t p = cp[c]; p < cp[c + 1]; ++p) {
      if (!covered[p]) {
        throw DescriptorError("matrix entry (" + std::to_string(ri[p]) + "," + std::to_string(c) +
                              ") is not covered by any stream");
      }
    }
  }
  return PatternedMatrix<T>(desc, std::move(values));
}

/// y = M x walking the streams directly.
template <class T>
Vector<T> spmv_streams(const PatternedMatrix<T>& m, std::span<const T> x) {
  detail::require_same_size(x.size(), m.cols(), "spmv_streams");
  Vector<T> y(m.rows(), T(0));
  for (std::size_t s = 0; s < m.num_streams(); ++s) {
    const auto& r = m.rule(s);
    const auto v = m.stream(s);
    std::size_t row = r.row_base;
    std::size_t col = r.col_base;
    for (std::size_t k = 0; k < r.count; ++k) {
      y[row] += v[k] * x[col];
      row = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(row) + r.row_stride);
      col = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(col) + r.col_stride);
    }
  }
  return y;
}

}  // namespace pathqp
