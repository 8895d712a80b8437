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

// K = P + sigma I + A' diag(rho) A in column-group storage, and the kernels
// that walk it.
//
// Columns are cut into groups of fixed width (6 for an interleaved planning
// layout, one group of width n otherwise). Each group belongs to a class; all
// groups of a class share the per-column row offsets relative to the group's
// first column, so a kernel only reads the class table and a contiguous value
// block. For the interleaved layout there are three classes: the first point,
// interior points and the last point.
//
// Every column of K is stored in full. Symmetry makes column j equal to row j,
// so y_j = sum_r K(r, j) x_r is a gather over a fixed-length offset list.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathqp/csc_matrix.hpp"
#include "pathqp/errors.hpp"
#include "pathqp/linalg.hpp"
#include "pathqp/patterned_matrix.hpp"
#include "pathqp/qp_build.hpp"

namespace pathqp {

/// Row offsets of one column class.
struct ColumnClass {
  std::size_t width = 0;
  std::vector<std::size_t> col_begin;  ///< width + 1 entries into offsets
  std::vector<std::ptrdiff_t> offsets;  ///< row - (first column of the group)

  std::size_t nnz() const { return offsets.size(); }
  bool operator==(const ColumnClass& o) const {
    return width == o.width && col_begin == o.col_begin && offsets == o.offsets;
  }
};

template <class T>
class KMatrix {
 public:
  KMatrix() = default;

  /// Pattern-only construction; values start at zero.
  KMatrix(std::size_t n, std::size_t width, std::vector<ColumnClass> classes,
          std::vector<std::size_t> group_class)
      : n_(n), width_(width), classes_(std::move(classes)), group_class_(std::move(group_class)) {
    group_start_.resize(group_class_.size());
    std::size_t total = 0;
    for (std::size_t g = 0; g < group_class_.size(); ++g) {
      group_start_[g] = total;
      total += classes_[group_class_[g]].nnz();
    }
    values_.assign(total, T(0));
    diag_.assign(n_, T(0));
  }

  std::size_t n() const { return n_; }
  std::size_t group_width() const { return width_; }
  std::size_t num_groups() const { return group_class_.size(); }
  std::size_t num_classes() const { return classes_.size(); }
  std::size_t nnz() const { return values_.size(); }
  const ColumnClass& column_class(std::size_t c) const { return classes_[c]; }
  std::size_t class_of_group(std::size_t g) const { return group_class_[g]; }
  std::span<const T> values() const { return values_; }
  std::span<const T> group_values(std::size_t g) const {
    return std::span<const T>(values_).subspan(group_start_[g], classes_[group_class_[g]].nnz());
  }
  std::span<T> group_values_mut(std::size_t g) {
    return std::span<T>(values_).subspan(group_start_[g], classes_[group_class_[g]].nnz());
  }
  std::span<T> diagonal_mut() { return diag_; }
  /// Jacobi diagonal.
  std::span<const T> diagonal() const { return diag_; }

  T coeff(std::size_t r, std::size_t j) const {
    const std::size_t g = j / width_;
    const std::size_t base = g * width_;
    const auto& cls = classes_[group_class_[g]];
    const std::size_t c = j - base;
    for (std::size_t k = cls.col_begin[c]; k < cls.col_begin[c + 1]; ++k) {
      if (static_cast<std::ptrdiff_t>(base) + cls.offsets[k] == static_cast<std::ptrdiff_t>(r)) {
        return values_[group_start_[g] + k];
      }
    }
    return T(0);
  }

  /// CSC mirror for oracle checks.
  CscMatrix<T> to_csc() const {
    std::vector<std::size_t> col_ptr(n_ + 1, 0);
    std::vector<std::size_t> row_idx;
    std::vector<T> vals;
    row_idx.reserve(nnz());
    vals.reserve(nnz());
    for (std::size_t g = 0; g < num_groups(); ++g) {
      const auto& cls = classes_[group_class_[g]];
      const std::size_t base = g * width_;
      for (std::size_t c = 0; c < cls.width; ++c) {
        for (std::size_t k = cls.col_begin[c]; k < cls.col_begin[c + 1]; ++k) {
          row_idx.push_back(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(base) + cls.offsets[k]));
          vals.push_back(values_[group_start_[g] + k]);
        }
        col_ptr[base + c + 1] = row_idx.size();
      }
    }
    return CscMatrix<T>(n_, n_, std::move(col_ptr), std::move(row_idx), std::move(vals));
  }

 private:
  std::size_t n_ = 0;
  std::size_t width_ = 1;
  std::vector<ColumnClass> classes_;
  std::vector<std::size_t> group_class_;
  std::vector<std::size_t> group_start_;
  std::vector<T> values_;
  std::vector<T> diag_;
};

namespace detail {

/// Groups per-column row lists into classes and returns the zero-valued
/// pattern. Throws LayoutError when `require_adjacent` is set and a column
/// reaches beyond the neighbouring groups.
template <class T>
KMatrix<T> pattern_from_rows(std::size_t n, std::size_t width,
                             const std::vector<std::vector<std::size_t>>& rows_of_col,
                             bool require_adjacent) {
  const std::size_t groups = (n + width - 1) / width;
  std::map<std::pair<std::vector<std::size_t>, std::vector<std::ptrdiff_t>>, std::size_t> index;
  std::vector<ColumnClass> classes;
  std::vector<std::size_t> group_class(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t base = g * width;
    const std::size_t w = std::min(width, n - base);
    ColumnClass cls;
    cls.width = w;
    cls.col_begin.push_back(0);
    for (std::size_t c = 0; c < w; ++c) {
      for (std::size_t r : rows_of_col[base + c]) {
        if (require_adjacent) {
          const std::size_t rg = r / width;
          if (rg + 1 < g || rg > g + 1) {
            throw LayoutError("K column " + std::to_string(base + c) + " couples with row " +
                              std::to_string(r) +
                              " outside the neighbouring column groups; use the interleaved "
                              "layout");
          }
        }
        cls.offsets.push_back(static_cast<std::ptrdiff_t>(r) - static_cast<std::ptrdiff_t>(base));
      }
      cls.col_begin.push_back(cls.offsets.size());
    }
    auto key = std::make_pair(cls.col_begin, cls.offsets);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(std::move(key), classes.size()).first;
      classes.push_back(std::move(cls));
    }
    group_class[g] = it->second;
  }
  return KMatrix<T>(n, width, std::move(classes), std::move(group_class));
}

}  // namespace detail

/// Builds K from P (both triangles), A, sigma and rho. Entry (r, j) is
///
///   sum_i rho_i * (A_ir * A_ij)  +  P_rj  +  sigma [r == j]
///
/// with the sum over the rows shared by columns r and j in ascending order,
/// so K is exactly symmetric. `group_width` of 0 means a single group.
template <class T>
KMatrix<T> build_K(const CscMatrix<T>& P, const CscMatrix<T>& A, T sigma,
                   std::span<const T> rho, std::size_t group_width = 0,
                   bool require_adjacent = false) {
  const std::size_t n = P.cols();
  if (P.rows() != n || A.cols() != n) throw DimensionError("build_K: P and A do not conform");
  detail::require_same_size(rho.size(), A.rows(), "build_K rho");
  if (!(sigma > T(0))) throw InputError("build_K: sigma must be positive");
  for (T r : rho) {
    if (!(r > T(0))) throw InputError("build_K: rho entries must be positive");
  }

  // Symbolic pattern: column pairs sharing a row of A, plus P and the diagonal.
  const auto At = A.transpose();  // CSC of A' = CSR of A
  const auto acp = A.col_ptr();
  const auto ari = A.row_idx();
  const auto av = A.values();
  const auto tcp = At.col_ptr();
  const auto tri = At.row_idx();
  std::vector<std::vector<std::size_t>> rows_of_col(n);
  std::vector<std::size_t> mark(n, static_cast<std::size_t>(-1));
  for (std::size_t j = 0; j < n; ++j) {
    auto& rows = rows_of_col[j];
    auto touch = [&](std::size_t r) {
      if (mark[r] != j) {
        mark[r] = j;
        rows.push_back(r);
      }
    };
    touch(j);
    for (std::size_t p = P.col_ptr()[j]; p < P.col_ptr()[j + 1]; ++p) touch(P.row_idx()[p]);
    for (std::size_t p = acp[j]; p < acp[j + 1]; ++p) {
      const std::size_t i = ari[p];
      for (std::size_t q = tcp[i]; q < tcp[i + 1]; ++q) touch(tri[q]);
    }
    std::sort(rows.begin(), rows.end());
  }

  auto K = detail::pattern_from_rows<T>(
      n, group_width == 0 ? std::max<std::size_t>(n, 1) : group_width, rows_of_col,
      require_adjacent);
  auto diag = K.diagonal_mut();

  // Numeric phase: weighted column dot products.
  for (std::size_t g = 0; g < K.num_groups(); ++g) {
    const auto& cls = K.column_class(K.class_of_group(g));
    const std::size_t base = g * K.group_width();
    auto vals = K.group_values_mut(g);
    for (std::size_t c = 0; c < cls.width; ++c) {
      const std::size_t j = base + c;
      for (std::size_t k = cls.col_begin[c]; k < cls.col_begin[c + 1]; ++k) {
        const std::size_t r =
            static_cast<std::size_t>(static_cast<std::ptrdiff_t>(base) + cls.offsets[k]);
        T acc = T(0);
        std::size_t pa = acp[j], pb = acp[r];
        while (pa < acp[j + 1] && pb < acp[r + 1]) {
          if (ari[pa] < ari[pb]) {
            ++pa;
          } else if (ari[pb] < ari[pa]) {
            ++pb;
          } else {
            acc += rho[ari[pa]] * (av[pa] * av[pb]);
            ++pa;
            ++pb;
          }
        }
        acc += P.coeff(r, j);
        if (r == j) {
          acc += sigma;
          diag[j] = acc;
        }
        vals[k] = acc;
      }
    }
  }
  return K;
}

template <class T>
KMatrix<T> build_K(const CscMatrix<T>& P, const CscMatrix<T>& A, T sigma,
                   const DiagonalMatrix<T>& rho, std::size_t group_width = 0,
                   bool require_adjacent = false) {
  return build_K(P, A, sigma, std::span<const T>(rho.diag), group_width, require_adjacent);
}

/// Column-group width for a problem: 6 for the interleaved planning layout,
/// 0 (single group) otherwise.
template <class T>
std::size_t kernel_group_width(const QpProblem<T>& qp) {
  return qp.layout && qp.layout->mode() == LayoutMode::interleaved ? 6 : 0;
}

/// K for a planning problem. The structured path needs the interleaved layout.
template <class T>
KMatrix<T> build_K(const QpProblem<T>& qp, T sigma, std::span<const T> rho) {
  if (!qp.layout || qp.layout->mode() != LayoutMode::interleaved) {
    throw LayoutError("build_K: structured assembly requires the interleaved layout");
  }
  return build_K(qp.P, qp.A, sigma, rho, 6, true);
}

/// Wraps an explicitly symmetric matrix (both triangles stored).
template <class T>
KMatrix<T> kmatrix_from_csc(const CscMatrix<T>& S, std::size_t group_width = 0) {
  if (S.rows() != S.cols()) throw DimensionError("kmatrix_from_csc: matrix must be square");
  const std::size_t n = S.cols();
  std::vector<std::vector<std::size_t>> rows_of_col(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t p = S.col_ptr()[j]; p < S.col_ptr()[j + 1]; ++p) {
      rows_of_col[j].push_back(S.row_idx()[p]);
    }
    if (S.find(j, j) == CscMatrix<T>::npos) {
      rows_of_col[j].push_back(j);
      std::sort(rows_of_col[j].begin(), rows_of_col[j].end());
    }
  }
  auto K = detail::pattern_from_rows<T>(
      n, group_width == 0 ? std::max<std::size_t>(n, 1) : group_width, rows_of_col, false);
  auto diag = K.diagonal_mut();
  for (std::size_t g = 0; g < K.num_groups(); ++g) {
    const auto& cls = K.column_class(K.class_of_group(g));
    const std::size_t base = g * K.group_width();
    auto vals = K.group_values_mut(g);
    for (std::size_t c = 0; c < cls.width; ++c) {
      for (std::size_t k = cls.col_begin[c]; k < cls.col_begin[c + 1]; ++k) {
        const std::size_t r =
            static_cast<std::size_t>(static_cast<std::ptrdiff_t>(base) + cls.offsets[k]);
        const T v = S.coeff(r, base + c);
        vals[k] = v;
        if (r == base + c) diag[r] = v;
      }
    }
  }
  return K;
}

// ---------------------------------------------------------------------------
// Kernels

/// y = K x, group by group.
template <class T>
void spmv_patterned(const KMatrix<T>& K, std::span<const T> x, std::span<T> y) {
  detail::require_same_size(x.size(), K.n(), "spmv_patterned x");
  detail::require_same_size(y.size(), K.n(), "spmv_patterned y");
  const std::size_t w = K.group_width();
  for (std::size_t g = 0; g < K.num_groups(); ++g) {
    const auto& cls = K.column_class(K.class_of_group(g));
    const auto vals = K.group_values(g);
    const T* xb = x.data() + g * w;
    for (std::size_t c = 0; c < cls.width; ++c) {
      T acc = T(0);
      for (std::size_t k = cls.col_begin[c]; k < cls.col_begin[c + 1]; ++k) {
        acc += vals[k] * xb[cls.offsets[k]];
      }
      y[g * w + c] = acc;
    }
  }
}

template <class T>
Vector<T> spmv_patterned(const KMatrix<T>& K, std::span<const T> x) {
  Vector<T> y(K.n());
  spmv_patterned(K, x, std::span<T>(y));
  return y;
}

template <class T>
Vector<T> spmv_patterned(const KMatrix<T>& K, const Vector<T>& x) {
  return spmv_patterned(K, std::span<const T>(x));
}

/// v = K p and p'v in one pass; the dot uses lane j % lanes like dot().
template <class T>
T fused_spmv_dot(const KMatrix<T>& K, std::span<const T> p, std::span<T> v,
                 std::size_t lanes = kDefaultDotLanes) {
  detail::require_same_size(p.size(), K.n(), "fused_spmv_dot p");
  detail::require_same_size(v.size(), K.n(), "fused_spmv_dot v");
  LaneAccumulator<T> acc(lanes);
  const std::size_t w = K.group_width();
  for (std::size_t g = 0; g < K.num_groups(); ++g) {
    const auto& cls = K.column_class(K.class_of_group(g));
    const auto vals = K.group_values(g);
    const T* pb = p.data() + g * w;
    for (std::size_t c = 0; c < cls.width; ++c) {
      T s = T(0);
      for (std::size_t k = cls.col_begin[c]; k < cls.col_begin[c + 1]; ++k) {
        s += vals[k] * pb[cls.offsets[k]];
      }
      const std::size_t j = g * w + c;
      v[j] = s;
      acc.add(j, p[j] * s);
    }
  }
  return acc.merge();
}

template <class T>
struct PcgUpdateDots {
  T r_dot_y;  ///< r' . M^-1 r'
  T r_dot_r;  ///< r' . r'
};

/// x += alpha p; r -= alpha v; y = r / M; returns r'y and r'r.
template <class T>
PcgUpdateDots<T> fused_pcg_update(std::span<T> x, std::span<T> r, std::span<const T> p,
                                  std::span<const T> v, T alpha, std::span<const T> mdiag,
                                  std::span<T> y, std::size_t lanes = kDefaultDotLanes) {
  const std::size_t n = x.size();
  detail::require_same_size(r.size(), n, "fused_pcg_update r");
  detail::require_same_size(p.size(), n, "fused_pcg_update p");
  detail::require_same_size(v.size(), n, "fused_pcg_update v");
  detail::require_same_size(mdiag.size(), n, "fused_pcg_update M");
  detail::require_same_size(y.size(), n, "fused_pcg_update y");
  LaneAccumulator<T> ry(lanes), rr(lanes);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(mdiag[i] != T(0))) {
      throw PreconditionerError("Jacobi entry " + std::to_string(i) + " is zero");
    }
    x[i] += alpha * p[i];
    r[i] -= alpha * v[i];
    y[i] = r[i] / mdiag[i];
    ry.add(i, r[i] * y[i]);
    rr.add(i, r[i] * r[i]);
  }
  return {ry.merge(), rr.merge()};
}

/// The same update as three separate passes plus two dot products.
template <class T>
PcgUpdateDots<T> unfused_pcg_update(std::span<T> x, std::span<T> r, std::span<const T> p,
                                    std::span<const T> v, T alpha, std::span<const T> mdiag,
                                    std::span<T> y, std::size_t lanes = kDefaultDotLanes) {
  const std::size_t n = x.size();
  detail::require_same_size(r.size(), n, "pcg_update r");
  detail::require_same_size(mdiag.size(), n, "pcg_update M");
  axpy_inplace(alpha, p, x);
  axpy_inplace(-alpha, v, r);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(mdiag[i] != T(0))) {
      throw PreconditionerError("Jacobi entry " + std::to_string(i) + " is zero");
    }
    y[i] = r[i] / mdiag[i];
  }
  const std::span<const T> rc(r.data(), n), yc(y.data(), n);
  return {dot(rc, yc, lanes), dot(rc, rc, lanes)};
}

/// Constraint matrix with the products the ADMM loop needs. The patterned
/// form, when present, drives A x; A' y always uses the CSC gather.
template <class T>
struct ConstraintOperator {
  CscMatrix<T> A;
  std::optional<PatternedMatrix<T>> pattern;

  explicit ConstraintOperator(const QpProblem<T>& qp) : A(qp.A) {
    if (qp.a_pattern) pattern = csc_to_patterned(qp.A, *qp.a_pattern);
  }
  ConstraintOperator(CscMatrix<T> a, std::optional<PatternedMatrix<T>> p)
      : A(std::move(a)), pattern(std::move(p)) {}

  std::size_t rows() const { return A.rows(); }
  std::size_t cols() const { return A.cols(); }

  Vector<T> apply(std::span<const T> x) const {
    return pattern ? spmv_streams(*pattern, x) : spmv_csc(A, x);
  }
  Vector<T> apply_t(std::span<const T> y) const { return spmv_csc_t(A, y); }
};

/// ADMM lines for x, z, y in one pass. z~ = A x~ is formed first; then per
/// row t = alpha z~ + (1 - alpha) z, w = t + y / rho, z' = clamp(w),
/// y' = y + rho (t - z'). x' = alpha x~ + (1 - alpha) x.
template <class T>
void fused_vector_update(const ConstraintOperator<T>& A, std::span<const T> x_tilde,
                         std::span<T> x, std::span<T> y, std::span<T> z, T alpha,
                         std::span<const T> rho, std::span<const T> l, std::span<const T> u) {
  const std::size_t m = A.rows();
  detail::require_same_size(x_tilde.size(), A.cols(), "fused_vector_update x~");
  detail::require_same_size(x.size(), A.cols(), "fused_vector_update x");
  detail::require_same_size(y.size(), m, "fused_vector_update y");
  detail::require_same_size(z.size(), m, "fused_vector_update z");
  detail::require_same_size(rho.size(), m, "fused_vector_update rho");
  const auto zt = A.apply(x_tilde);
  const T beta = T(1) - alpha;
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = alpha * x_tilde[j] + beta * x[j];
  for (std::size_t i = 0; i < m; ++i) {
    if (!(rho[i] != T(0))) throw InputError("rho entry " + std::to_string(i) + " is zero");
    const T t = alpha * zt[i] + beta * z[i];
    const T w = t + y[i] / rho[i];
    const T zn = std::min(std::max(w, l[i]), u[i]);
    y[i] = y[i] + rho[i] * (t - zn);
    z[i] = zn;
  }
}

/// Reference sequence: each ADMM line as its own pass over full vectors.
template <class T>
void unfused_vector_update(const ConstraintOperator<T>& A, std::span<const T> x_tilde,
                           std::span<T> x, std::span<T> y, std::span<T> z, T alpha,
                           std::span<const T> rho, std::span<const T> l, std::span<const T> u) {
  const std::size_t m = A.rows();
  detail::require_same_size(y.size(), m, "vector_update y");
  detail::require_same_size(z.size(), m, "vector_update z");
  detail::require_same_size(rho.size(), m, "vector_update rho");
  const auto zt = A.apply(x_tilde);
  const T beta = T(1) - alpha;
  Vector<T> xn(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) xn[j] = alpha * x_tilde[j] + beta * x[j];
  Vector<T> relaxed(m);
  for (std::size_t i = 0; i < m; ++i) relaxed[i] = alpha * zt[i] + beta * z[i];
  Vector<T> shifted(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(rho[i] != T(0))) throw InputError("rho entry " + std::to_string(i) + " is zero");
    shifted[i] = relaxed[i] + y[i] / rho[i];
  }
  const auto zn = project_box(std::span<const T>(shifted), l, u);
  for (std::size_t i = 0; i < m; ++i) y[i] = y[i] + rho[i] * (relaxed[i] - zn[i]);
  std::copy(zn.begin(), zn.end(), z.begin());
  std::copy(xn.begin(), xn.end(), x.begin());
}

}  // namespace pathqp
