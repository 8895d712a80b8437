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

// Lateral path QP in Frenet coordinates.
//
//   minimize   1/2 x'Px + q'x
//   subject to l <= Ax <= u
//
// Per point i the state is z_i = (l_i, phi_i, k_i) with slacks eps_i1 (front
// edge) and eps_i2 (rear edge); k'_i exists for i = 1 .. L-1. That gives
// n = 6L - 1 columns and m = 6L + 2 rows:
//
//   [0, L)          curvature box on k_i
//   [L, 2L)         front edge  l_i + f_length * phi_i + eps_i1
//   [2L, 3L)        rear edge   l_i - r_length * phi_i + eps_i2
//   [3L, 6L - 3)    dynamics    z_i - F z_{i-1} - g k'_i = h_i
//   [6L - 3, 6L)    initial state
//   [6L, 6L + 2)    terminal box on l_{L-1}, phi_{L-1}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pathqp/csc_matrix.hpp"
#include "pathqp/errors.hpp"
#include "pathqp/gridmap.hpp"
#include "pathqp/linalg.hpp"
#include "pathqp/patterned_matrix.hpp"
#include "pathqp/reference_path.hpp"

namespace pathqp {

enum class LayoutMode { sequential, interleaved };

inline const char* to_string(LayoutMode m) {
  return m == LayoutMode::sequential ? "sequential" : "interleaved";
}

enum class VarRole { l, phi, k, dk, eps1, eps2 };

/// Column placement of the decision variables.
///
/// sequential:  [z_0 .. z_{L-1}, k'_1 .. k'_{L-1}, eps_01, eps_02, ...]
/// interleaved: point i owns [l_i, phi_i, k_i, eps_i1, eps_i2, k'_{i+1}]
///              (the last point has no k').
class DecisionLayout {
 public:
  DecisionLayout(LayoutMode mode, std::size_t L) : mode_(mode), L_(L) {
    if (L < 2) throw InputError("layout: L must be at least 2");
  }

  LayoutMode mode() const { return mode_; }
  std::size_t points() const { return L_; }
  std::size_t n() const { return 6 * L_ - 1; }

  /// Column of variable `role` at point i. For dk, i runs over 1 .. L-1.
  std::size_t index(VarRole role, std::size_t i) const {
    const auto r = rule(role);
    const std::size_t first = role == VarRole::dk ? 1 : 0;
    if (i < first || i >= L_) {
      throw InputError("layout: point index " + std::to_string(i) + " out of range");
    }
    return r.first + (i - first) * r.second;
  }

  /// (first column, column stride) of a role; the first column belongs to
  /// point 0, or to point 1 for dk.
  std::pair<std::size_t, std::size_t> rule(VarRole role) const {
    if (mode_ == LayoutMode::interleaved) {
      switch (role) {
        case VarRole::l: return {0, 6};
        case VarRole::phi: return {1, 6};
        case VarRole::k: return {2, 6};
        case VarRole::eps1: return {3, 6};
        case VarRole::eps2: return {4, 6};
        case VarRole::dk: return {5, 6};
      }
    }
    switch (role) {
      case VarRole::l: return {0, 3};
      case VarRole::phi: return {1, 3};
      case VarRole::k: return {2, 3};
      case VarRole::dk: return {3 * L_, 1};
      case VarRole::eps1: return {4 * L_ - 1, 2};
      case VarRole::eps2: return {4 * L_, 2};
    }
    return {0, 0};
  }

  /// (role, point) of column c.
  std::pair<VarRole, std::size_t> role_of(std::size_t c) const {
    if (c >= n()) throw InputError("layout: column out of range");
    if (mode_ == LayoutMode::interleaved) {
      static constexpr VarRole kRoles[6] = {VarRole::l,    VarRole::phi,  VarRole::k,
                                            VarRole::eps1, VarRole::eps2, VarRole::dk};
      const std::size_t slot = c % 6;
      return {kRoles[slot], c / 6 + (slot == 5 ? 1 : 0)};
    }
    if (c < 3 * L_) {
      static constexpr VarRole kRoles[3] = {VarRole::l, VarRole::phi, VarRole::k};
      return {kRoles[c % 3], c / 3};
    }
    if (c < 4 * L_ - 1) return {VarRole::dk, c - 3 * L_ + 1};
    const std::size_t e = c - (4 * L_ - 1);
    return {e % 2 == 0 ? VarRole::eps1 : VarRole::eps2, e / 2};
  }

  /// perm[c] = column in `to` of the variable at column c of this layout.
  std::vector<std::size_t> permutation_to(const DecisionLayout& to) const {
    if (to.L_ != L_) throw DimensionError("layout: point counts differ");
    std::vector<std::size_t> perm(n());
    for (std::size_t c = 0; c < n(); ++c) {
      const auto [role, i] = role_of(c);
      perm[c] = to.index(role, i);
    }
    return perm;
  }

  bool operator==(const DecisionLayout& o) const { return mode_ == o.mode_ && L_ == o.L_; }

 private:
  LayoutMode mode_;
  std::size_t L_;
};

/// Moves a vector between layouts: out[perm[c]] = v[c].
template <class T>
Vector<T> permute_vector(std::span<const T> v, const DecisionLayout& from, const DecisionLayout& to) {
  detail::require_same_size(v.size(), from.n(), "permute_vector");
  const auto perm = from.permutation_to(to);
  Vector<T> out(v.size());
  for (std::size_t c = 0; c < v.size(); ++c) out[perm[c]] = v[c];
  return out;
}

template <class T>
Vector<T> permute_vector(const Vector<T>& v, const DecisionLayout& from, const DecisionLayout& to) {
  return permute_vector(std::span<const T>(v), from, to);
}

struct Weights {
  double w_l = 1.0;
  double w_k = 10.0;
  double w_dk = 100.0;
  double w_s = 1000.0;

  void validate() const {
    if (!(w_l >= 0 && w_k >= 0 && w_dk >= 0 && w_s >= 0)) {
      throw InputError("cost weights must be nonnegative");
    }
  }
};

struct InitialState {
  double l = 0.0;
  double phi = 0.0;
  double k = 0.0;
};

struct BuildOptions {
  double terminal_l = 0.1;     ///< |l_{L-1}| bound [m]
  double terminal_phi = 0.05;  ///< |phi_{L-1}| bound [rad]
  /// Curvature rows use k_max - curvature_margin.
  double curvature_margin = 0.0;
  /// Initial state; default (0, 0, kappa_ref_0) with k clamped to the box.
  std::optional<InitialState> initial;
};

/// The general QP. P holds both triangles.
template <class T = double>
struct QpProblem {
  CscMatrix<T> P;
  Vector<T> q;
  CscMatrix<T> A;
  Vector<T> l;
  Vector<T> u;
  std::optional<DecisionLayout> layout;
  std::optional<PatternDescriptor> a_pattern;

  std::size_t n() const { return P.cols(); }
  std::size_t m() const { return A.rows(); }

  /// Row i is an equality when l_i == u_i exactly.
  std::vector<std::uint8_t> eq_mask() const {
    std::vector<std::uint8_t> mask(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) mask[i] = l[i] == u[i] ? 1 : 0;
    return mask;
  }

  PatternedMatrix<T> patterned_A() const {
    if (!a_pattern) throw DescriptorError("problem has no pattern descriptor");
    return csc_to_patterned(A, *a_pattern);
  }

  void validate() const {
    if (P.rows() != P.cols()) throw DimensionError("P must be square");
    detail::require_same_size(q.size(), P.cols(), "q");
    detail::require_same_size(A.cols(), P.cols(), "A columns");
    detail::require_same_size(l.size(), A.rows(), "l");
    detail::require_same_size(u.size(), A.rows(), "u");
    check_bounds(std::span<const T>(l), std::span<const T>(u));
    if (!all_finite(P.values()) || !all_finite(A.values()) || !all_finite(std::span<const T>(q))) {
      throw InputError("problem data must be finite");
    }
  }

  /// 1/2 x'Px + q'x
  T objective(std::span<const T> x) const {
    const auto px = spmv_csc(P, x);
    T acc = T(0);
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * (T(0.5) * px[i] + q[i]);
    return acc;
  }
  T objective(const Vector<T>& x) const { return objective(std::span<const T>(x)); }

  template <class U>
  QpProblem<U> cast() const {
    QpProblem<U> out;
    out.P = P.template cast<U>();
    out.A = A.template cast<U>();
    out.q = cast_vector<U, T>(q);
    out.l = cast_vector<U, T>(l);
    out.u = cast_vector<U, T>(u);
    out.layout = layout;
    out.a_pattern = a_pattern;
    return out;
  }
};

// ---------------------------------------------------------------------------
// Construction

/// Stream rules of the constraint matrix for a layout: 7 per-point streams,
/// 10 per-transition streams and 5 single entries.
inline PatternDescriptor constraint_descriptor(const DecisionLayout& lay) {
  const std::size_t L = lay.points();
  PatternDescriptor d;
  d.rows = 6 * L + 2;
  d.cols = lay.n();
  auto add = [&](const char* label, std::size_t row_base, std::ptrdiff_t row_stride, VarRole r,
                 std::size_t first_point, std::size_t count) {
    const auto [base, stride] = lay.rule(r);
    const std::size_t start = r == VarRole::dk ? base + (first_point - 1) * stride
                                               : base + first_point * stride;
    d.streams.push_back({label, row_base, row_stride, start,
                         static_cast<std::ptrdiff_t>(stride), count});
  };
  // Per point.
  add("curv_k", 0, 1, VarRole::k, 0, L);
  add("front_l", L, 1, VarRole::l, 0, L);
  add("front_phi", L, 1, VarRole::phi, 0, L);
  add("front_eps", L, 1, VarRole::eps1, 0, L);
  add("rear_l", 2 * L, 1, VarRole::l, 0, L);
  add("rear_phi", 2 * L, 1, VarRole::phi, 0, L);
  add("rear_eps", 2 * L, 1, VarRole::eps2, 0, L);
  // Per transition i = 1 .. L-1, rows 3L + 3(i-1) + {0, 1, 2}.
  const std::size_t dyn = 3 * L;
  add("dyn_l_cur", dyn, 3, VarRole::l, 1, L - 1);
  add("dyn_l_prev", dyn, 3, VarRole::l, 0, L - 1);
  add("dyn_l_phiprev", dyn, 3, VarRole::phi, 0, L - 1);
  add("dyn_l_kprev", dyn, 3, VarRole::k, 0, L - 1);
  add("dyn_phi_cur", dyn + 1, 3, VarRole::phi, 1, L - 1);
  add("dyn_phi_prev", dyn + 1, 3, VarRole::phi, 0, L - 1);
  add("dyn_phi_kprev", dyn + 1, 3, VarRole::k, 0, L - 1);
  add("dyn_k_cur", dyn + 2, 3, VarRole::k, 1, L - 1);
  add("dyn_k_prev", dyn + 2, 3, VarRole::k, 0, L - 1);
  add("dyn_k_dk", dyn + 2, 3, VarRole::dk, 1, L - 1);
  // Boundary rows.
  add("init_l", 6 * L - 3, 0, VarRole::l, 0, 1);
  add("init_phi", 6 * L - 2, 0, VarRole::phi, 0, 1);
  add("init_k", 6 * L - 1, 0, VarRole::k, 0, 1);
  add("term_l", 6 * L, 0, VarRole::l, L - 1, 1);
  add("term_phi", 6 * L + 1, 0, VarRole::phi, L - 1, 1);
  return d;
}

/// Diagonal cost: w_l on l, 0 on phi (not stored), w_k on k, w_dk on k',
/// w_s on both slacks. nnz(P) = 5L - 1 regardless of the weight values.
inline std::pair<CscMatrix<double>, Vector<double>> build_objective(const ReferencePath& ref,
                                                                    const Weights& w,
                                                                    const DecisionLayout& lay) {
  w.validate();
  const std::size_t L = ref.size();
  if (L < 2) throw InputError("build_objective: L must be at least 2");
  if (lay.points() != L) throw DimensionError("build_objective: layout size != L");
  std::vector<Triplet<double>> t;
  t.reserve(5 * L - 1);
  for (std::size_t i = 0; i < L; ++i) {
    t.push_back({lay.index(VarRole::l, i), lay.index(VarRole::l, i), w.w_l});
    t.push_back({lay.index(VarRole::k, i), lay.index(VarRole::k, i), w.w_k});
    t.push_back({lay.index(VarRole::eps1, i), lay.index(VarRole::eps1, i), w.w_s});
    t.push_back({lay.index(VarRole::eps2, i), lay.index(VarRole::eps2, i), w.w_s});
    if (i >= 1) t.push_back({lay.index(VarRole::dk, i), lay.index(VarRole::dk, i), w.w_dk});
  }
  return {CscMatrix<double>::from_triplets(lay.n(), lay.n(), std::move(t)),
          Vector<double>(lay.n(), 0.0)};
}

struct ConstraintData {
  CscMatrix<double> A;
  Vector<double> l;
  Vector<double> u;
  PatternDescriptor pattern;
};

inline ConstraintData build_constraints(const ReferencePath& ref, const VehicleFootprint& fp,
                                        const DecisionLayout& lay,
                                        const BuildOptions& opt = {}) {
  fp.validate();
  ref.validate();
  const std::size_t L = ref.size();
  if (lay.points() != L) throw DimensionError("build_constraints: layout size != L");
  if (!(opt.terminal_l >= 0 && opt.terminal_phi >= 0)) {
    throw InputError("terminal boxes must be nonnegative");
  }
  const double ds = ref.delta_s;
  const double kmax = fp.k_max() - opt.curvature_margin;
  if (!(kmax >= 0)) throw InputError("curvature margin exceeds k_max");

  const auto desc = constraint_descriptor(lay);
  std::vector<std::vector<double>> vals(desc.streams.size());
  auto fill = [&](std::size_t s, double v) { vals[s].assign(desc.streams[s].count, v); };
  std::size_t s = 0;
  fill(s++, 1.0);            // curv_k
  fill(s++, 1.0);            // front_l
  fill(s++, fp.f_length);    // front_phi
  fill(s++, 1.0);            // front_eps
  fill(s++, 1.0);            // rear_l
  fill(s++, -fp.r_length);   // rear_phi
  fill(s++, 1.0);            // rear_eps
  fill(s++, 1.0);            // dyn_l_cur
  fill(s++, -1.0);           // dyn_l_prev
  fill(s++, -ds);            // dyn_l_phiprev
  fill(s++, -0.5 * ds * ds); // dyn_l_kprev
  fill(s++, 1.0);            // dyn_phi_cur
  fill(s++, -1.0);           // dyn_phi_prev
  fill(s++, -ds);            // dyn_phi_kprev
  fill(s++, 1.0);            // dyn_k_cur
  fill(s++, -1.0);           // dyn_k_prev
  fill(s++, -ds);            // dyn_k_dk
  while (s < desc.streams.size()) fill(s++, 1.0);

  ConstraintData out;
  out.A = patterned_to_csc(PatternedMatrix<double>(desc, std::move(vals)));
  out.pattern = desc;

  const std::size_t m = 6 * L + 2;
  out.l.assign(m, 0.0);
  out.u.assign(m, 0.0);
  for (std::size_t i = 0; i < L; ++i) {
    out.l[i] = -kmax;
    out.u[i] = kmax;
    out.l[L + i] = ref.bounds[i].fl;
    out.u[L + i] = ref.bounds[i].fr;
    out.l[2 * L + i] = ref.bounds[i].rl;
    out.u[2 * L + i] = ref.bounds[i].rr;
  }
  for (std::size_t i = 1; i < L; ++i) {
    const double kr = ref.points[i - 1].kappa;
    const std::size_t r = 3 * L + 3 * (i - 1);
    out.l[r] = out.u[r] = -0.5 * ds * ds * kr;
    out.l[r + 1] = out.u[r + 1] = -ds * kr;
    out.l[r + 2] = out.u[r + 2] = 0.0;
  }
  InitialState z0;
  if (opt.initial) {
    z0 = *opt.initial;
  } else {
    z0.k = std::clamp(ref.points[0].kappa, -kmax, kmax);
  }
  out.l[6 * L - 3] = out.u[6 * L - 3] = z0.l;
  out.l[6 * L - 2] = out.u[6 * L - 2] = z0.phi;
  out.l[6 * L - 1] = out.u[6 * L - 1] = z0.k;
  out.l[6 * L] = -opt.terminal_l;
  out.u[6 * L] = opt.terminal_l;
  out.l[6 * L + 1] = -opt.terminal_phi;
  out.u[6 * L + 1] = opt.terminal_phi;
  check_bounds(std::span<const double>(out.l), std::span<const double>(out.u));
  return out;
}

inline QpProblem<double> build_qp(const ReferencePath& ref, const VehicleFootprint& fp,
                                  const Weights& w, LayoutMode mode,
                                  const BuildOptions& opt = {}) {
  const DecisionLayout lay(mode, ref.size());
  auto [P, q] = build_objective(ref, w, lay);
  auto c = build_constraints(ref, fp, lay, opt);
  QpProblem<double> qp;
  qp.P = std::move(P);
  qp.q = std::move(q);
  qp.A = std::move(c.A);
  qp.l = std::move(c.l);
  qp.u = std::move(c.u);
  qp.layout = lay;
  qp.a_pattern = std::move(c.pattern);
  return qp;
}

/// Re-expresses a planning problem in another layout by permuting columns.
inline QpProblem<double> to_layout(const QpProblem<double>& qp, LayoutMode mode) {
  if (!qp.layout) throw LayoutError("to_layout: problem carries no decision layout");
  const DecisionLayout to(mode, qp.layout->points());
  const auto perm = qp.layout->permutation_to(to);
  QpProblem<double> out;
  auto pt = qp.P.triplets();
  for (auto& t : pt) {
    t.row = perm[t.row];
    t.col = perm[t.col];
  }
  out.P = CscMatrix<double>::from_triplets(qp.n(), qp.n(), std::move(pt));
  auto at = qp.A.triplets();
  for (auto& t : at) t.col = perm[t.col];
  out.A = CscMatrix<double>::from_triplets(qp.m(), qp.n(), std::move(at));
  out.q = permute_vector(qp.q, *qp.layout, to);
  out.l = qp.l;
  out.u = qp.u;
  out.layout = to;
  out.a_pattern = constraint_descriptor(to);
  return out;
}

// ---------------------------------------------------------------------------
// Canonical test problem

struct CanonicalSpec {
  std::size_t L = 270;
  double delta_s = 0.2;
  double kappa_amplitude = 0.05;  ///< reference curvature amplitude [1/m]
  double periods = 1.5;           ///< sine periods over the path
  double phase = 0.0;
  double corridor = 2.0;          ///< symmetric half-width of every bound [m]
  InitialState initial{0.5, 0.0, 0.0};
  Weights weights{};
  VehicleFootprint footprint{};
  LayoutMode layout = LayoutMode::interleaved;
};

/// Planning QP on a synthetic reference with sinusoidal curvature and a
/// constant corridor; no map involved.
inline QpProblem<double> make_canonical_problem(const CanonicalSpec& spec) {
  if (spec.L < 2) throw InputError("canonical problem: L must be at least 2");
  ReferencePath ref;
  ref.delta_s = spec.delta_s;
  ref.points.resize(spec.L);
  ref.bounds.assign(spec.L, {-spec.corridor, spec.corridor, -spec.corridor, spec.corridor});
  double x = 0, y = 0, th = 0;
  for (std::size_t i = 0; i < spec.L; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(spec.L - 1);
    const double kap = spec.kappa_amplitude * std::sin(2.0 * M_PI * spec.periods * t + spec.phase);
    ref.points[i] = {x, y, normalize_angle(th), kap, static_cast<double>(i) * spec.delta_s};
    x += spec.delta_s * std::cos(th);
    y += spec.delta_s * std::sin(th);
    th += spec.delta_s * kap;
  }
  BuildOptions opt;
  opt.initial = spec.initial;
  return build_qp(ref, spec.footprint, spec.weights, spec.layout, opt);
}

inline QpProblem<double> make_canonical_problem(std::size_t L,
                                                LayoutMode mode = LayoutMode::interleaved) {
  CanonicalSpec spec;
  spec.L = L;
  spec.layout = mode;
  return make_canonical_problem(spec);
}

/// Variations of the canonical problem used for parameter sweeps.
inline std::vector<CanonicalSpec> canonical_batch(std::size_t L = 270) {
  std::vector<CanonicalSpec> out;
  const double amps[] = {0.02, 0.05, 0.08, 0.12};
  const double l0[] = {0.5, -0.8, 1.2, 0.0};
  for (std::size_t k = 0; k < 4; ++k) {
    CanonicalSpec s;
    s.L = L;
    s.kappa_amplitude = amps[k];
    s.periods = 1.0 + 0.5 * static_cast<double>(k);
    s.phase = 0.7 * static_cast<double>(k);
    s.initial = {l0[k], 0.0, 0.0};
    out.push_back(s);
  }
  return out;
}

}  // namespace pathqp
