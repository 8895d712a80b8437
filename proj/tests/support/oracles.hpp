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

// Independent reference computations for the test suite. Nothing here calls
// into the code under test except to read its data structures.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pathqp/csc_matrix.hpp"
#include "pathqp/gridmap.hpp"
#include "pathqp/qp_build.hpp"

namespace oracle {

using pathqp::CscMatrix;

// ---------------------------------------------------------------------------
// Dense algebra

struct Dense {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;  // row-major

  Dense() = default;
  Dense(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

inline Dense dense(const CscMatrix<double>& m) {
  Dense d(m.rows(), m.cols());
  for (const auto& t : m.triplets()) d(t.row, t.col) += t.value;
  return d;
}

inline std::vector<double> matvec(const Dense& m, const std::vector<double>& x) {
  std::vector<double> y(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    long double s = 0;
    for (std::size_t j = 0; j < m.cols; ++j) s += static_cast<long double>(m(i, j)) * x[j];
    y[i] = static_cast<double>(s);
  }
  return y;
}

inline std::vector<double> matvec_t(const Dense& m, const std::vector<double>& x) {
  std::vector<double> y(m.cols, 0.0);
  for (std::size_t j = 0; j < m.cols; ++j) {
    long double s = 0;
    for (std::size_t i = 0; i < m.rows; ++i) s += static_cast<long double>(m(i, j)) * x[i];
    y[j] = static_cast<double>(s);
  }
  return y;
}

/// P + sigma I + A' diag(rho) A by explicit triple loops.
inline Dense triple_product(const Dense& P, const Dense& A, double sigma,
                            const std::vector<double>& rho) {
  const std::size_t n = P.cols;
  Dense K(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < n; ++j) {
      long double s = P(r, j) + (r == j ? sigma : 0.0);
      for (std::size_t i = 0; i < A.rows; ++i) {
        s += static_cast<long double>(A(i, r)) * rho[i] * A(i, j);
      }
      K(r, j) = static_cast<double>(s);
    }
  }
  return K;
}

/// The same matrix accumulated as a sum of per-row outer products; cheaper
/// for large sparse A.
inline Dense triple_product_rows(const CscMatrix<double>& P, const CscMatrix<double>& A,
                                 double sigma, const std::vector<double>& rho) {
  Dense K = dense(P);
  for (std::size_t j = 0; j < K.cols; ++j) K(j, j) += sigma;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(A.rows());
  for (const auto& t : A.triplets()) rows[t.row].push_back({t.col, t.value});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [r, ar] : rows[i]) {
      for (const auto& [c, ac] : rows[i]) K(r, c) += ar * rho[i] * ac;
    }
  }
  return K;
}

/// Gaussian elimination with partial pivoting; nullopt if singular.
inline std::optional<std::vector<double>> solve(Dense M, std::vector<double> b,
                                                double pivot_tol = 1e-12) {
  const std::size_t n = M.rows;
  double scale = 0;
  for (double v : M.a) scale = std::max(scale, std::abs(v));
  if (scale == 0) return std::nullopt;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(M(r, c)) > std::abs(M(p, c))) p = r;
    }
    if (std::abs(M(p, c)) <= pivot_tol * scale) return std::nullopt;
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(M(p, j), M(c, j));
      std::swap(b[p], b[c]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = M(r, c) / M(c, c);
      if (f == 0) continue;
      for (std::size_t j = c; j < n; ++j) M(r, j) -= f * M(c, j);
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    long double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= static_cast<long double>(M(i, j)) * x[j];
    x[i] = static_cast<double>(s / M(i, i));
  }
  return x;
}

// ---------------------------------------------------------------------------
// Random data

inline double uniform(std::mt19937_64& g, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(g);
}

inline std::vector<double> random_vector(std::mt19937_64& g, std::size_t n, double a = -1,
                                         double b = 1) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(g, a, b);
  return v;
}

/// Random sparse matrix; every row and column gets at least one entry.
inline CscMatrix<double> random_sparse(std::mt19937_64& g, std::size_t rows, std::size_t cols,
                                       double density) {
  std::vector<pathqp::Triplet<double>> t;
  std::vector<std::uint8_t> used(rows * cols, 0);
  auto put = [&](std::size_t i, std::size_t j) {
    if (used[i * cols + j]) return;
    used[i * cols + j] = 1;
    double v = uniform(g, -2, 2);
    if (std::abs(v) < 0.1) v += v < 0 ? -0.5 : 0.5;
    t.push_back({i, j, v});
  };
  for (std::size_t i = 0; i < rows; ++i) put(i, g() % cols);
  for (std::size_t j = 0; j < cols; ++j) put(g() % rows, j);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (uniform(g, 0, 1) < density) put(i, j);
    }
  }
  return CscMatrix<double>::from_triplets(rows, cols, std::move(t));
}

/// Random symmetric positive definite matrix B'B + shift I (both triangles).
inline CscMatrix<double> random_spd(std::mt19937_64& g, std::size_t n, double density,
                                    double shift) {
  const auto B = dense(random_sparse(g, n, n, density));
  std::vector<pathqp::Triplet<double>> t;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = i == j ? shift : 0.0;
      for (std::size_t k = 0; k < n; ++k) s += B(k, i) * B(k, j);
      if (s != 0.0) t.push_back({i, j, s});
    }
  }
  return CscMatrix<double>::from_triplets(n, n, std::move(t));
}

// ---------------------------------------------------------------------------
// QP oracles

struct QpOptimum {
  std::vector<double> x;
  double objective = 0.0;
};

inline double qp_objective(const Dense& P, const std::vector<double>& q,
                           const std::vector<double>& x) {
  const auto px = matvec(P, x);
  double f = 0;
  for (std::size_t i = 0; i < x.size(); ++i) f += 0.5 * x[i] * px[i] + q[i] * x[i];
  return f;
}

/// Exhaustive active-set enumeration for a strictly convex QP: every row is
/// either free, at its lower bound or at its upper bound. Each working set
/// gives an equality-constrained QP solved through its KKT system; the best
/// feasible candidate is the optimum. Cost 3^m, so keep m small.
inline std::optional<QpOptimum> enumerate_qp(const pathqp::QpProblem<double>& qp,
                                             double feas_tol = 1e-9) {
  const Dense P = dense(qp.P), A = dense(qp.A);
  const std::size_t n = P.cols, m = A.rows;
  if (m > 12) throw std::invalid_argument("enumerate_qp: too many rows");
  std::size_t combos = 1;
  for (std::size_t i = 0; i < m; ++i) combos *= 3;
  std::optional<QpOptimum> best;
  std::vector<int> state(m);
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t code = c;
    bool skip = false;
    std::vector<std::pair<std::size_t, double>> act;
    for (std::size_t i = 0; i < m; ++i) {
      state[i] = static_cast<int>(code % 3);
      code /= 3;
      const bool eq = qp.l[i] == qp.u[i];
      if (eq && state[i] == 0) skip = true;  // equality rows are always active
      if (eq && state[i] == 2) skip = true;  // count once
      if (state[i] == 1 && !std::isfinite(qp.l[i])) skip = true;
      if (state[i] == 2 && !std::isfinite(qp.u[i])) skip = true;
      if (state[i] == 1) act.push_back({i, qp.l[i]});
      if (state[i] == 2) act.push_back({i, qp.u[i]});
    }
    if (skip || act.size() > n) continue;
    const std::size_t k = act.size();
    Dense KKT(n + k, n + k);
    std::vector<double> rhs(n + k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) KKT(i, j) = P(i, j);
      rhs[i] = -qp.q[i];
    }
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t j = 0; j < n; ++j) {
        KKT(n + a, j) = A(act[a].first, j);
        KKT(j, n + a) = A(act[a].first, j);
      }
      rhs[n + a] = act[a].second;
    }
    const auto sol = solve(KKT, rhs);
    if (!sol) continue;
    std::vector<double> x(sol->begin(), sol->begin() + static_cast<std::ptrdiff_t>(n));
    const auto ax = matvec(A, x);
    bool feasible = true;
    for (std::size_t i = 0; i < m && feasible; ++i) {
      const double tol = feas_tol * (1 + std::abs(ax[i]));
      feasible = ax[i] >= qp.l[i] - tol && ax[i] <= qp.u[i] + tol;
    }
    if (!feasible) continue;
    const double f = qp_objective(P, qp.q, x);
    if (!best || f < best->objective) best = QpOptimum{x, f};
  }
  return best;
}

struct ConstructedQp {
  pathqp::QpProblem<double> qp;
  QpOptimum opt;
};

/// QP with a known solution: pick x*, a row status and multipliers y* with
/// the right signs, then set q = -P x* - A'y* and the bounds so that the KKT
/// conditions hold at (x*, y*). Convexity makes x* optimal.
inline ConstructedQp constructed_qp(std::mt19937_64& g, std::size_t n, std::size_t m,
                                    bool psd_only = false) {
  ConstructedQp c;
  auto& qp = c.qp;
  qp.P = random_spd(g, n, 0.3, psd_only ? 0.0 : 0.5);
  qp.A = random_sparse(g, m, n, 0.25);
  const auto xs = random_vector(g, n, -2, 2);
  const Dense A = dense(qp.A), P = dense(qp.P);
  const auto ax = matvec(A, xs);
  std::vector<double> y(m, 0.0);
  qp.l.resize(m);
  qp.u.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    switch (g() % 5) {
      case 0:  // equality
        qp.l[i] = qp.u[i] = ax[i];
        y[i] = uniform(g, -1, 1);
        break;
      case 1:  // lower active
        qp.l[i] = ax[i];
        qp.u[i] = ax[i] + uniform(g, 0.5, 2);
        y[i] = -uniform(g, 0.1, 1);
        break;
      case 2:  // upper active
        qp.u[i] = ax[i];
        qp.l[i] = ax[i] - uniform(g, 0.5, 2);
        y[i] = uniform(g, 0.1, 1);
        break;
      case 3:  // one-sided, inactive
        qp.l[i] = -std::numeric_limits<double>::infinity();
        qp.u[i] = ax[i] + uniform(g, 0.5, 2);
        break;
      default:  // inactive box
        qp.l[i] = ax[i] - uniform(g, 0.5, 2);
        qp.u[i] = ax[i] + uniform(g, 0.5, 2);
        break;
    }
  }
  const auto px = matvec(P, xs);
  const auto aty = matvec_t(A, y);
  qp.q.resize(n);
  for (std::size_t j = 0; j < n; ++j) qp.q[j] = -px[j] - aty[j];
  c.opt.x = xs;
  c.opt.objective = qp_objective(P, qp.q, xs);
  return c;
}

inline double max_violation(const pathqp::QpProblem<double>& qp, const std::vector<double>& x) {
  const auto ax = matvec(dense(qp.A), x);
  double v = 0;
  for (std::size_t i = 0; i < ax.size(); ++i) {
    v = std::max({v, qp.l[i] - ax[i], ax[i] - qp.u[i]});
  }
  return v;
}

// ---------------------------------------------------------------------------
// Geometry

/// Corners of the footprint rectangle at a rear-axle pose.
inline std::vector<pathqp::Point2> footprint_corners(const pathqp::VehicleFootprint& fp,
                                                     pathqp::Pose2 p) {
  const double c = std::cos(p.theta), s = std::sin(p.theta);
  const double bx[4] = {-fp.r_length, fp.f_length, fp.f_length, -fp.r_length};
  const double by[4] = {-0.5 * fp.width, -0.5 * fp.width, 0.5 * fp.width, 0.5 * fp.width};
  std::vector<pathqp::Point2> out;
  for (int k = 0; k < 4; ++k) out.push_back({p.x + c * bx[k] - s * by[k], p.y + s * bx[k] + c * by[k]});
  return out;
}

/// Separating-axis overlap test of two convex polygons (closed sets).
inline bool polygons_overlap(const std::vector<pathqp::Point2>& a,
                             const std::vector<pathqp::Point2>& b) {
  auto separated = [](const std::vector<pathqp::Point2>& p, const std::vector<pathqp::Point2>& q) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto& u = p[i];
      const auto& v = p[(i + 1) % p.size()];
      const double nx = -(v.y - u.y), ny = v.x - u.x;
      double pmin = 1e300, pmax = -1e300, qmin = 1e300, qmax = -1e300;
      for (const auto& w : p) {
        const double d = nx * w.x + ny * w.y;
        pmin = std::min(pmin, d);
        pmax = std::max(pmax, d);
      }
      for (const auto& w : q) {
        const double d = nx * w.x + ny * w.y;
        qmin = std::min(qmin, d);
        qmax = std::max(qmax, d);
      }
      if (pmax < qmin || qmax < pmin) return true;
    }
    return false;
  };
  return !separated(a, b) && !separated(b, a);
}

inline bool point_in_convex(const std::vector<pathqp::Point2>& poly, pathqp::Point2 p) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& u = poly[i];
    const auto& v = poly[(i + 1) % poly.size()];
    if ((v.x - u.x) * (p.y - u.y) - (v.y - u.y) * (p.x - u.x) < 0) return false;
  }
  return true;
}

struct CellCoverage {
  bool any_overlap = false;        ///< some occupied (or off-map) cell meets the rectangle
  bool center_inside = false;      ///< some occupied cell has its center inside it
};

/// Exact rectangle-versus-cells classification by scanning every cell.
inline CellCoverage footprint_coverage(const pathqp::GridMap& map,
                                       const pathqp::VehicleFootprint& fp, pathqp::Pose2 p) {
  const auto rect = footprint_corners(fp, p);
  const double res = map.resolution();
  const auto o = map.origin();
  CellCoverage cov;
  for (const auto& c : rect) {
    if (!map.cell_of(c.x, c.y)) cov.any_overlap = cov.center_inside = true;
  }
  for (std::size_t iy = 0; iy < map.height(); ++iy) {
    for (std::size_t ix = 0; ix < map.width(); ++ix) {
      if (!map.cell_occupied(ix, iy)) continue;
      const double x0 = o.x + static_cast<double>(ix) * res, y0 = o.y + static_cast<double>(iy) * res;
      const std::vector<pathqp::Point2> cell{{x0, y0}, {x0 + res, y0}, {x0 + res, y0 + res},
                                             {x0, y0 + res}};
      if (polygons_overlap(rect, cell)) cov.any_overlap = true;
      if (point_in_convex(rect, {x0 + 0.5 * res, y0 + 0.5 * res})) cov.center_inside = true;
    }
  }
  return cov;
}

/// Clearance by marching in tiny steps: distance to the first occupied point.
inline double ray_clearance(const pathqp::GridMap& map, pathqp::Pose2 p, double sign,
                            double max_range, double step) {
  const double nx = -std::sin(p.theta) * sign, ny = std::cos(p.theta) * sign;
  for (double d = 0; d <= max_range; d += step) {
    const double x = p.x + d * nx, y = p.y + d * ny;
    const auto c = map.cell_of(x, y);
    if (!c || map.cell_occupied(c->first, c->second)) return d;
  }
  return max_range;
}

// ---------------------------------------------------------------------------
// Splines

/// Cox-de Boor basis function N_{i,p}(u); the last nonzero basis is closed at
/// the right end of the knot vector.
inline double basis(const std::vector<double>& t, std::size_t i, std::size_t p, double u) {
  if (p == 0) {
    if (t[i] <= u && u < t[i + 1]) return 1.0;
    if (u == t.back() && t[i] < t[i + 1] && t[i + 1] == t.back()) return 1.0;
    return 0.0;
  }
  double v = 0.0;
  const double d1 = t[i + p] - t[i], d2 = t[i + p + 1] - t[i + 1];
  if (d1 > 0) v += (u - t[i]) / d1 * basis(t, i, p - 1, u);
  if (d2 > 0) v += (t[i + p + 1] - u) / d2 * basis(t, i + 1, p - 1, u);
  return v;
}

/// Clamped uniform knots for n control points of degree p on [0, n - p].
inline std::vector<double> clamped_knots(std::size_t n, std::size_t p) {
  std::vector<double> t;
  for (std::size_t i = 0; i <= p; ++i) t.push_back(0.0);
  for (std::size_t i = 1; i < n - p; ++i) t.push_back(static_cast<double>(i));
  for (std::size_t i = 0; i <= p; ++i) t.push_back(static_cast<double>(n - p));
  return t;
}

inline pathqp::Point2 basis_eval(const std::vector<pathqp::Point2>& ctrl, std::size_t p,
                                 double u) {
  const auto t = clamped_knots(ctrl.size(), p);
  pathqp::Point2 out{0, 0};
  for (std::size_t i = 0; i < ctrl.size(); ++i) {
    const double b = basis(t, i, p, u);
    out.x += b * ctrl[i].x;
    out.y += b * ctrl[i].y;
  }
  return out;
}

}  // namespace oracle
