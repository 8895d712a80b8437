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

// Modified Ruiz equilibration on the KKT stack [[P, A'], [A, 0]] followed by
// a single cost scaling c. The scaled problem is
//
//   P~ = c D P D,  q~ = c D q,  A~ = E A D,  l~ = E l,  u~ = E u.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>

#include "pathqp/csc_matrix.hpp"
#include "pathqp/linalg.hpp"
#include "pathqp/qp_build.hpp"

namespace pathqp {

template <class T>
struct ScalingResult {
  DiagonalMatrix<T> D;
  DiagonalMatrix<T> E;
  T c = T(1);
};

namespace scaling_limits {
inline constexpr double kMinNorm = 1e-4;
inline constexpr double kMaxNorm = 1e4;
inline constexpr double kMinFactor = 1e-8;
inline constexpr double kMaxFactor = 1e8;
}  // namespace scaling_limits

namespace detail {

template <class T>
T ruiz_factor(T norm) {
  if (norm == T(0)) return T(1);
  const T clamped = std::clamp(norm, T(scaling_limits::kMinNorm), T(scaling_limits::kMaxNorm));
  return T(1) / std::sqrt(clamped);
}

/// Column inf-norms of the KKT stack: first n from [P; A], last m from A'.
template <class T>
std::pair<Vector<T>, Vector<T>> stack_norms(const CscMatrix<T>& P, const CscMatrix<T>& A) {
  auto pn = P.col_inf_norms();
  const auto an = A.col_inf_norms();
  for (std::size_t j = 0; j < pn.size(); ++j) pn[j] = std::max(pn[j], an[j]);
  return {std::move(pn), A.row_inf_norms()};
}

}  // namespace detail

template <class T>
std::pair<QpProblem<T>, ScalingResult<T>> ruiz_equilibrate(const QpProblem<T>& qp,
                                                           std::size_t iters = 10) {
  if (iters == 0) throw InputError("ruiz_equilibrate: iters must be at least 1");
  qp.validate();
  const std::size_t n = qp.n(), m = qp.m();
  QpProblem<T> s = qp;
  ScalingResult<T> res{DiagonalMatrix<T>::identity(n), DiagonalMatrix<T>::identity(m), T(1)};
  Vector<T> dstep(n), estep(m);
  for (std::size_t it = 0; it < iters; ++it) {
    const auto [cn, rn] = detail::stack_norms(s.P, s.A);
    for (std::size_t j = 0; j < n; ++j) {
      const T target = std::clamp(res.D[j] * detail::ruiz_factor(cn[j]),
                                  T(scaling_limits::kMinFactor), T(scaling_limits::kMaxFactor));
      dstep[j] = target / res.D[j];
      res.D[j] = target;
    }
    for (std::size_t i = 0; i < m; ++i) {
      const T target = std::clamp(res.E[i] * detail::ruiz_factor(rn[i]),
                                  T(scaling_limits::kMinFactor), T(scaling_limits::kMaxFactor));
      estep[i] = target / res.E[i];
      res.E[i] = target;
    }
    s.P.scale(dstep, dstep);
    s.A.scale(estep, dstep);
    for (std::size_t j = 0; j < n; ++j) s.q[j] *= dstep[j];
  }

  // Cost scaling.
  const auto pn = s.P.col_inf_norms();
  T mean = T(0);
  for (T v : pn) mean += v;
  if (n > 0) mean /= static_cast<T>(n);
  const T denom = std::max(mean, inf_norm(s.q));
  res.c = denom > T(0) ? std::clamp(T(1) / denom, T(scaling_limits::kMinFactor),
                                    T(scaling_limits::kMaxFactor))
                       : T(1);
  for (auto& v : s.P.values_mut()) v *= res.c;
  for (auto& v : s.q) v *= res.c;

  for (std::size_t i = 0; i < m; ++i) {
    s.l[i] *= res.E[i];
    s.u[i] *= res.E[i];
  }
  return {std::move(s), std::move(res)};
}

template <class T>
struct UnscaledSolution {
  Vector<T> x;
  Vector<T> y;
  Vector<T> z;
};

/// x = D x~, y = E y~ / c, z = z~ / E.
template <class T>
UnscaledSolution<T> unscale_solution(std::span<const T> xs, std::span<const T> ys,
                                     std::span<const T> zs, const ScalingResult<T>& sc) {
  detail::require_same_size(xs.size(), sc.D.size(), "unscale x");
  detail::require_same_size(ys.size(), sc.E.size(), "unscale y");
  detail::require_same_size(zs.size(), sc.E.size(), "unscale z");
  UnscaledSolution<T> out{Vector<T>(xs.size()), Vector<T>(ys.size()), Vector<T>(zs.size())};
  for (std::size_t j = 0; j < xs.size(); ++j) out.x[j] = sc.D[j] * xs[j];
  for (std::size_t i = 0; i < ys.size(); ++i) {
    out.y[i] = sc.E[i] * ys[i] / sc.c;
    out.z[i] = zs[i] / sc.E[i];
  }
  return out;
}

template <class T>
UnscaledSolution<T> unscale_solution(const Vector<T>& xs, const Vector<T>& ys, const Vector<T>& zs,
                                     const ScalingResult<T>& sc) {
  return unscale_solution(std::span<const T>(xs), std::span<const T>(ys), std::span<const T>(zs),
                          sc);
}

}  // namespace pathqp
