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

// Operator-splitting QP solver with a Jacobi-preconditioned CG inner solve.
//
// Each iteration, on the equilibrated problem:
//
//   (P + sigma I + A' rho A) x~ = sigma x - q + A'(rho z - y)      (PCG)
//   x  <- alpha x~ + (1 - alpha) x
//   z  <- clamp(alpha A x~ + (1 - alpha) z + y / rho, l, u)
//   y  <- y + rho (alpha A x~ + (1 - alpha) z_old - z)
//
// Residuals and the stopping test use unscaled quantities.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pathqp/csc_matrix.hpp"
#include "pathqp/errors.hpp"
#include "pathqp/linalg.hpp"
#include "pathqp/qp_build.hpp"
#include "pathqp/scaling.hpp"
#include "pathqp/structured_kernels.hpp"

namespace pathqp {

struct AdmmSettings {
  double sigma = 1e-6;
  double alpha = 1.6;
  double rho_bar = 0.1;
  double eq_multiplier = 5.0;
  bool adaptive_rho = true;
  std::size_t rho_update_interval = 10;
  double rho_adopt_ratio = 5.0;  ///< K is rebuilt only for a change at least this large
  double rho_min = 1e-6;
  double rho_max = 1e6;
  double eps_abs = 1e-3;
  double eps_rel = 1e-3;
  double pcg_rel_tol = 1e-6;
  std::size_t max_iter = 4000;
  std::size_t max_pcg_iter = 0;  ///< 0 means 4n
  std::size_t scaling_iters = 10;
  std::size_t parallel_factor = 12;
  bool fusion = true;
  std::size_t check_interval = 1;
  bool trace = false;
  bool record_iterates = false;

  void validate() const {
    if (!(alpha > 0 && alpha < 2)) throw InputError("alpha must lie in (0, 2)");
    if (!(sigma > 0)) throw InputError("sigma must be positive");
    if (!(rho_bar > 0)) throw InputError("rho_bar must be positive");
    if (!(eq_multiplier > 0)) throw InputError("eq_multiplier must be positive");
    if (!(eps_abs > 0 && eps_rel > 0 && pcg_rel_tol > 0)) {
      throw InputError("tolerances must be positive");
    }
    if (max_iter == 0) throw InputError("max_iter must be positive");
    if (scaling_iters == 0) throw InputError("scaling_iters must be at least 1");
    if (parallel_factor == 0 || parallel_factor > kMaxDotLanes) {
      throw InputError("parallel_factor must be in [1, " + std::to_string(kMaxDotLanes) + "]");
    }
    if (rho_update_interval == 0 || check_interval == 0) {
      throw InputError("update and check intervals must be positive");
    }
    if (!(rho_adopt_ratio >= 1)) throw InputError("rho_adopt_ratio must be >= 1");
    if (!(rho_min > 0 && rho_min <= rho_max)) throw InputError("invalid rho clamp range");
  }
};

enum class SolveStatus { solved, max_iter, infeasible_bounds };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::solved: return "solved";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::infeasible_bounds: return "infeasible_bounds";
  }
  return "unknown";
}

struct TraceRow {
  std::size_t iter = 0;
  double r_prim = 0.0;
  double r_dual = 0.0;
  std::size_t pcg_iters = 0;
  double rho_bar = 0.0;
};

template <class T>
struct IterateSnapshot {
  Vector<T> x;
  Vector<T> z;
  Vector<T> y;
};

template <class T>
struct SolveResult {
  Vector<T> x;
  Vector<T> y;
  Vector<T> z;
  SolveStatus status = SolveStatus::max_iter;
  std::size_t admm_iters = 0;
  std::size_t total_pcg_iters = 0;
  std::size_t k_builds = 0;
  double r_prim = 0.0;
  double r_dual = 0.0;
  double objective = 0.0;
  double rho_bar = 0.0;
  double setup_time_s = 0.0;
  double solve_time_s = 0.0;
  std::vector<TraceRow> trace;
  std::vector<IterateSnapshot<T>> iterates;  ///< scaled iterates, if recorded
};

/// rho_i = rho_bar, or eq_multiplier * rho_bar when l_i == u_i.
template <class T>
DiagonalMatrix<T> compute_rho_vector(std::span<const T> l, std::span<const T> u, T rho_bar,
                                     T eq_multiplier) {
  detail::require_same_size(l.size(), u.size(), "compute_rho_vector");
  if (!(rho_bar > T(0))) throw InputError("rho_bar must be positive");
  Vector<T> d(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) d[i] = l[i] == u[i] ? eq_multiplier * rho_bar : rho_bar;
  return DiagonalMatrix<T>(std::move(d));
}

template <class T>
DiagonalMatrix<T> compute_rho_vector(const Vector<T>& l, const Vector<T>& u, T rho_bar,
                                     T eq_multiplier) {
  return compute_rho_vector(std::span<const T>(l), std::span<const T>(u), rho_bar, eq_multiplier);
}

// ---------------------------------------------------------------------------
// PCG

template <class T>
struct PcgWorkspace {
  Vector<T> r, y, p, v;
  void resize(std::size_t n) {
    r.resize(n);
    y.resize(n);
    p.resize(n);
    v.resize(n);
  }
};

struct PcgStats {
  std::size_t iters = 0;
  double residual_norm = 0.0;  ///< ||b - K x||_2 as tracked by the recurrence
  double b_norm = 0.0;
};

/// Solves K x = b from the initial guess in x. Stops when
/// ||r||_2 <= rel_tol ||b||_2 or after max_iter iterations.
template <class T>
PcgStats pcg_solve_inplace(const KMatrix<T>& K, std::span<const T> b, std::span<const T> mdiag,
                           std::span<T> x, double rel_tol, std::size_t max_iter, bool fusion,
                           std::size_t lanes, PcgWorkspace<T>& ws) {
  const std::size_t n = K.n();
  detail::require_same_size(b.size(), n, "pcg b");
  detail::require_same_size(mdiag.size(), n, "pcg M");
  detail::require_same_size(x.size(), n, "pcg x");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(mdiag[i] > T(0))) {
      throw PreconditionerError("Jacobi entry " + std::to_string(i) + " is not positive");
    }
  }
  ws.resize(n);
  PcgStats st;
  const T bb = dot(b, b, lanes);
  st.b_norm = std::sqrt(static_cast<double>(bb));
  if (!std::isfinite(st.b_norm)) throw NumericalFailure("pcg: right-hand side is not finite");
  if (bb == T(0)) {
    std::fill(x.begin(), x.end(), T(0));
    return st;
  }
  std::span<T> r(ws.r), y(ws.y), p(ws.p), v(ws.v);
  spmv_patterned(K, std::span<const T>(x), v);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = b[i] - v[i];
    y[i] = r[i] / mdiag[i];
    p[i] = y[i];
  }
  T ry = dot(std::span<const T>(r), std::span<const T>(y), lanes);
  T rr = dot(std::span<const T>(r), std::span<const T>(r), lanes);
  const double tol2 = (rel_tol * st.b_norm) * (rel_tol * st.b_norm);
  while (static_cast<double>(rr) > tol2 && st.iters < max_iter) {
    T pv;
    if (fusion) {
      pv = fused_spmv_dot(K, std::span<const T>(p), v, lanes);
    } else {
      spmv_patterned(K, std::span<const T>(p), v);
      pv = dot(std::span<const T>(p), std::span<const T>(v), lanes);
    }
    if (!(pv > T(0)) || !std::isfinite(static_cast<double>(pv))) {
      throw NumericalFailure("pcg: p'Kp = " + std::to_string(static_cast<double>(pv)) +
                             " (matrix not positive definite or overflow)");
    }
    const T a = ry / pv;
    const auto d = fusion ? fused_pcg_update(x, r, std::span<const T>(p), std::span<const T>(v),
                                             a, mdiag, y, lanes)
                          : unfused_pcg_update(x, r, std::span<const T>(p),
                                               std::span<const T>(v), a, mdiag, y, lanes);
    const T beta = d.r_dot_y / ry;
    ry = d.r_dot_y;
    rr = d.r_dot_r;
    for (std::size_t i = 0; i < n; ++i) p[i] = y[i] + beta * p[i];
    ++st.iters;
    if (!std::isfinite(static_cast<double>(rr))) throw NumericalFailure("pcg: residual is NaN");
  }
  st.residual_norm = std::sqrt(static_cast<double>(rr));
  return st;
}

template <class T>
struct PcgResult {
  Vector<T> x;
  std::size_t iters = 0;
};

template <class T>
PcgResult<T> pcg_solve(const KMatrix<T>& K, std::span<const T> b, std::span<const T> mdiag,
                       std::span<const T> x0, double rel_tol, std::size_t max_iter,
                       bool fusion = true, std::size_t lanes = kDefaultDotLanes) {
  PcgResult<T> out{Vector<T>(x0.begin(), x0.end()), 0};
  PcgWorkspace<T> ws;
  out.iters =
      pcg_solve_inplace(K, b, mdiag, std::span<T>(out.x), rel_tol, max_iter, fusion, lanes, ws)
          .iters;
  return out;
}

template <class T>
PcgResult<T> pcg_solve(const KMatrix<T>& K, const Vector<T>& b, const Vector<T>& x0,
                       double rel_tol, std::size_t max_iter, bool fusion = true,
                       std::size_t lanes = kDefaultDotLanes) {
  return pcg_solve(K, std::span<const T>(b), K.diagonal(), std::span<const T>(x0), rel_tol,
                   max_iter, fusion, lanes);
}

// ---------------------------------------------------------------------------
// Residuals

struct ResidualInfo {
  double r_prim = 0.0;
  double r_dual = 0.0;
  double norm_Ax = 0.0;
  double norm_z = 0.0;
  double norm_Px = 0.0;
  double norm_ATy = 0.0;
  double norm_q = 0.0;

  double eps_prim(double eps_abs, double eps_rel) const {
    return eps_abs + eps_rel * std::max(norm_Ax, norm_z);
  }
  double eps_dual(double eps_abs, double eps_rel) const {
    return eps_abs + eps_rel * std::max({norm_Px, norm_ATy, norm_q});
  }
};

/// r_prim = ||Ax - z||_inf, r_dual = ||Px + q + A'y||_inf on the given data.
template <class T>
ResidualInfo residuals_detail(const QpProblem<T>& qp, std::span<const T> x, std::span<const T> y,
                              std::span<const T> z) {
  detail::require_same_size(x.size(), qp.n(), "residuals x");
  detail::require_same_size(y.size(), qp.m(), "residuals y");
  detail::require_same_size(z.size(), qp.m(), "residuals z");
  const auto ax = spmv_csc(qp.A, x);
  const auto px = spmv_csc(qp.P, x);
  const auto aty = spmv_csc_t(qp.A, y);
  ResidualInfo r;
  for (std::size_t i = 0; i < ax.size(); ++i) {
    r.r_prim = std::max(r.r_prim, static_cast<double>(std::abs(ax[i] - z[i])));
    r.norm_Ax = std::max(r.norm_Ax, static_cast<double>(std::abs(ax[i])));
    r.norm_z = std::max(r.norm_z, static_cast<double>(std::abs(z[i])));
  }
  for (std::size_t j = 0; j < px.size(); ++j) {
    r.r_dual = std::max(r.r_dual, static_cast<double>(std::abs(px[j] + qp.q[j] + aty[j])));
    r.norm_Px = std::max(r.norm_Px, static_cast<double>(std::abs(px[j])));
    r.norm_ATy = std::max(r.norm_ATy, static_cast<double>(std::abs(aty[j])));
    r.norm_q = std::max(r.norm_q, static_cast<double>(std::abs(qp.q[j])));
  }
  return r;
}

template <class T>
std::pair<double, double> residuals(const QpProblem<T>& qp, const Vector<T>& x, const Vector<T>& y,
                                    const Vector<T>& z) {
  const auto r = residuals_detail(qp, std::span<const T>(x), std::span<const T>(y),
                                  std::span<const T>(z));
  return {r.r_prim, r.r_dual};
}

// ---------------------------------------------------------------------------
// Solver

template <class T>
SolveResult<T> admm_solve(const QpProblem<T>& qp, const AdmmSettings& set) {
  using clock = std::chrono::steady_clock;
  set.validate();
  qp.validate();
  const auto t0 = clock::now();
  const std::size_t n = qp.n(), m = qp.m();
  const std::size_t lanes = set.parallel_factor;
  const std::size_t max_pcg = set.max_pcg_iter == 0 ? 4 * std::max<std::size_t>(n, 1)
                                                    : set.max_pcg_iter;

  auto [sp, sc] = ruiz_equilibrate(qp, set.scaling_iters);
  const ConstraintOperator<T> Aop(sp);
  const std::size_t width = kernel_group_width(sp);
  double rho_bar = set.rho_bar;
  auto rho = compute_rho_vector(sp.l, sp.u, static_cast<T>(rho_bar),
                                static_cast<T>(set.eq_multiplier));
  const T sigma = static_cast<T>(set.sigma);
  auto make_K = [&]() { return build_K(sp.P, sp.A, sigma, rho, width, width != 0); };
  KMatrix<T> K = make_K();

  SolveResult<T> res;
  res.k_builds = 1;
  Vector<T> x(n, T(0)), z(m, T(0)), y(m, T(0)), xt(n, T(0)), b(n), w(m);
  PcgWorkspace<T> ws;
  const auto t1 = clock::now();
  res.setup_time_s = std::chrono::duration<double>(t1 - t0).count();

  // Unscaling factors for residuals.
  Vector<T> einv(m), dinv_c(n);
  for (std::size_t i = 0; i < m; ++i) einv[i] = T(1) / sc.E[i];
  for (std::size_t j = 0; j < n; ++j) dinv_c[j] = T(1) / (sc.c * sc.D[j]);

  ResidualInfo info;
  bool converged = false;
  std::size_t k = 0;
  for (k = 1; k <= set.max_iter; ++k) {
    // b = sigma x - q + A'(rho z - y)
    for (std::size_t i = 0; i < m; ++i) w[i] = rho[i] * z[i] - y[i];
    const auto atw = Aop.apply_t(std::span<const T>(w));
    for (std::size_t j = 0; j < n; ++j) b[j] = sigma * x[j] - sp.q[j] + atw[j];

    const auto st = pcg_solve_inplace(K, std::span<const T>(b), K.diagonal(), std::span<T>(xt),
                                      set.pcg_rel_tol, max_pcg, set.fusion, lanes, ws);
    res.total_pcg_iters += st.iters;

    if (set.fusion) {
      fused_vector_update(Aop, std::span<const T>(xt), std::span<T>(x), std::span<T>(y),
                          std::span<T>(z), static_cast<T>(set.alpha),
                          std::span<const T>(rho.diag), std::span<const T>(sp.l),
                          std::span<const T>(sp.u));
    } else {
      unfused_vector_update(Aop, std::span<const T>(xt), std::span<T>(x), std::span<T>(y),
                            std::span<T>(z), static_cast<T>(set.alpha),
                            std::span<const T>(rho.diag), std::span<const T>(sp.l),
                            std::span<const T>(sp.u));
    }
    if (set.record_iterates) res.iterates.push_back({x, z, y});

    const bool check = k % set.check_interval == 0 || k == set.max_iter;
    const bool update_rho = set.adaptive_rho && k % set.rho_update_interval == 0;
    if (check || update_rho) {
      const auto ax = Aop.apply(std::span<const T>(x));
      const auto px = spmv_csc(sp.P, std::span<const T>(x));
      const auto aty = Aop.apply_t(std::span<const T>(y));
      info = ResidualInfo{};
      for (std::size_t i = 0; i < m; ++i) {
        info.r_prim = std::max(info.r_prim, static_cast<double>(std::abs((ax[i] - z[i]) * einv[i])));
        info.norm_Ax = std::max(info.norm_Ax, static_cast<double>(std::abs(ax[i] * einv[i])));
        info.norm_z = std::max(info.norm_z, static_cast<double>(std::abs(z[i] * einv[i])));
      }
      for (std::size_t j = 0; j < n; ++j) {
        info.r_dual = std::max(info.r_dual,
                               static_cast<double>(std::abs((px[j] + sp.q[j] + aty[j]) * dinv_c[j])));
        info.norm_Px = std::max(info.norm_Px, static_cast<double>(std::abs(px[j] * dinv_c[j])));
        info.norm_ATy = std::max(info.norm_ATy, static_cast<double>(std::abs(aty[j] * dinv_c[j])));
        info.norm_q = std::max(info.norm_q, static_cast<double>(std::abs(sp.q[j] * dinv_c[j])));
      }
      if (!std::isfinite(info.r_prim) || !std::isfinite(info.r_dual)) {
        throw NumericalFailure("admm: residuals are not finite at iteration " + std::to_string(k));
      }
      if (set.trace) {
        res.trace.push_back({k, info.r_prim, info.r_dual, st.iters, rho_bar});
      }
      if (check && info.r_prim <= info.eps_prim(set.eps_abs, set.eps_rel) &&
          info.r_dual <= info.eps_dual(set.eps_abs, set.eps_rel)) {
        converged = true;
        break;
      }
      if (update_rho) {
        const double tiny = 1e-30;
        const double pn = info.r_prim / std::max(std::max(info.norm_Ax, info.norm_z), tiny);
        const double dn =
            info.r_dual / std::max(std::max({info.norm_Px, info.norm_ATy, info.norm_q}), tiny);
        if (pn > 0 && dn > 0) {
          const double proposed =
              std::clamp(rho_bar * std::sqrt(pn / dn), set.rho_min, set.rho_max);
          if (proposed >= set.rho_adopt_ratio * rho_bar ||
              proposed * set.rho_adopt_ratio <= rho_bar) {
            rho_bar = proposed;
            rho = compute_rho_vector(sp.l, sp.u, static_cast<T>(rho_bar),
                                     static_cast<T>(set.eq_multiplier));
            K = make_K();
            ++res.k_builds;
          }
        }
      }
    }
  }

  res.status = converged ? SolveStatus::solved : SolveStatus::max_iter;
  res.admm_iters = converged ? k : set.max_iter;
  res.r_prim = info.r_prim;
  res.r_dual = info.r_dual;
  res.rho_bar = rho_bar;
  auto un = unscale_solution(x, y, z, sc);
  res.x = std::move(un.x);
  res.y = std::move(un.y);
  res.z = std::move(un.z);
  res.objective = static_cast<double>(qp.objective(res.x));
  res.solve_time_s = std::chrono::duration<double>(clock::now() - t1).count();
  return res;
}

}  // namespace pathqp
