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

// Dense vector primitives shared by the solver modules.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pathqp/errors.hpp"

namespace pathqp {

template <class T>
using Vector = std::vector<T>;

/// Number of independent partial sums used by dot() unless told otherwise.
inline constexpr std::size_t kDefaultDotLanes = 8;
inline constexpr std::size_t kMaxDotLanes = 64;

/// Diagonal matrix stored as its diagonal. Used for rho, the Jacobi
/// preconditioner and the equilibration factors.
template <class T>
struct DiagonalMatrix {
  Vector<T> diag;

  DiagonalMatrix() = default;
  explicit DiagonalMatrix(Vector<T> d) : diag(std::move(d)) {}
  static DiagonalMatrix identity(std::size_t n) { return DiagonalMatrix(Vector<T>(n, T(1))); }

  std::size_t size() const { return diag.size(); }
  T operator[](std::size_t i) const { return diag[i]; }
  T& operator[](std::size_t i) { return diag[i]; }

  bool strictly_positive() const {
    return std::all_of(diag.begin(), diag.end(),
                       [](T v) { return std::isfinite(static_cast<double>(v)) && v > T(0); });
  }
};

/// Lane accumulator: element i goes to lane i % lanes, lanes are merged in
/// ascending order. The result is deterministic for a fixed lane count.
template <class T>
class LaneAccumulator {
 public:
  explicit LaneAccumulator(std::size_t lanes = kDefaultDotLanes) : lanes_(lanes) {
    if (lanes_ == 0 || lanes_ > kMaxDotLanes) {
      throw InputError("dot lane count must be in [1, " + std::to_string(kMaxDotLanes) + "]");
    }
    acc_.fill(T(0));
  }

  void add(std::size_t index, T value) { acc_[index % lanes_] += value; }

  T merge() const {
    T total = acc_[0];
    for (std::size_t k = 1; k < lanes_; ++k) total += acc_[k];
    return total;
  }

  std::size_t lanes() const { return lanes_; }

 private:
  std::size_t lanes_;
  std::array<T, kMaxDotLanes> acc_{};
};

template <class T>
T dot(std::span<const T> a, std::span<const T> b, std::size_t lanes = kDefaultDotLanes) {
  detail::require_same_size(a.size(), b.size(), "dot");
  LaneAccumulator<T> acc(lanes);
  const std::size_t n = a.size();
  std::size_t i = 0;
  // Full rounds keep the lane index implicit.
  if (n >= lanes) {
    for (; i + lanes <= n; i += lanes) {
      for (std::size_t k = 0; k < lanes; ++k) acc.add(k, a[i + k] * b[i + k]);
    }
  }
  for (; i < n; ++i) acc.add(i, a[i] * b[i]);
  return acc.merge();
}

template <class T>
T dot(const Vector<T>& a, const Vector<T>& b, std::size_t lanes = kDefaultDotLanes) {
  return dot(std::span<const T>(a), std::span<const T>(b), lanes);
}

/// y + alpha * x
template <class T>
Vector<T> axpy(T alpha, std::span<const T> x, std::span<const T> y) {
  detail::require_same_size(x.size(), y.size(), "axpy");
  Vector<T> out(y.begin(), y.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += alpha * x[i];
  return out;
}

template <class T>
Vector<T> axpy(T alpha, const Vector<T>& x, const Vector<T>& y) {
  return axpy(alpha, std::span<const T>(x), std::span<const T>(y));
}

/// In-place y += alpha * x.
template <class T>
void axpy_inplace(T alpha, std::span<const T> x, std::span<T> y) {
  detail::require_same_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

/// max |v_i|, zero for the empty vector.
template <class T>
T inf_norm(std::span<const T> v) {
  T m = T(0);
  for (T x : v) m = std::max(m, static_cast<T>(std::abs(x)));
  return m;
}

template <class T>
T inf_norm(const Vector<T>& v) {
  return inf_norm(std::span<const T>(v));
}

template <class T>
T norm2(std::span<const T> v) {
  T s = T(0);
  for (T x : v) s += x * x;
  return std::sqrt(s);
}

template <class T>
T norm2(const Vector<T>& v) {
  return norm2(std::span<const T>(v));
}

template <class T>
void check_bounds(std::span<const T> l, std::span<const T> u) {
  detail::require_same_size(l.size(), u.size(), "bounds");
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (!(l[i] <= u[i])) {
      throw InfeasibleBoundsError("bound " + std::to_string(i) + ": lower " +
                                  std::to_string(static_cast<double>(l[i])) + " > upper " +
                                  std::to_string(static_cast<double>(u[i])));
    }
  }
}

/// Euclidean projection onto the box [l, u].
template <class T>
Vector<T> project_box(std::span<const T> v, std::span<const T> l, std::span<const T> u) {
  detail::require_same_size(v.size(), l.size(), "project_box");
  check_bounds(l, u);
  Vector<T> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::min(std::max(v[i], l[i]), u[i]);
  return out;
}

template <class T>
Vector<T> project_box(const Vector<T>& v, const Vector<T>& l, const Vector<T>& u) {
  return project_box(std::span<const T>(v), std::span<const T>(l), std::span<const T>(u));
}

template <class T>
bool all_finite(std::span<const T> v) {
  return std::all_of(v.begin(), v.end(),
                     [](T x) { return std::isfinite(static_cast<double>(x)); });
}

template <class To, class From>
Vector<To> cast_vector(std::span<const From> v) {
  Vector<To> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](From x) { return static_cast<To>(x); });
  return out;
}

}  // namespace pathqp
