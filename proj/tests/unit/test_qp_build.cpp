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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "pathqp/qp_build.hpp"

using namespace pathqp;

namespace {

ReferencePath straight_reference(std::size_t L, double ds, double half_width) {
  ReferencePath ref;
  ref.delta_s = ds;
  for (std::size_t i = 0; i < L; ++i) {
    CurvePoint p;
    p.x = ds * static_cast<double>(i);
    p.s = p.x;
    ref.points.push_back(p);
  }
  ref.bounds.assign(L, {-half_width, half_width, -half_width, half_width});
  return ref;
}

ReferencePath curved_reference(std::mt19937_64& g, std::size_t L, double ds) {
  auto ref = straight_reference(L, ds, 1.5);
  for (auto& p : ref.points) p.kappa = oracle::uniform(g, -0.1, 0.1);
  for (auto& b : ref.bounds) {
    b.fl = oracle::uniform(g, -2, -0.5);
    b.fr = oracle::uniform(g, 0.5, 2);
    b.rl = oracle::uniform(g, -2, -0.5);
    b.rr = oracle::uniform(g, 0.5, 2);
  }
  return ref;
}

}  // namespace

TEST(Layout, IndexAndRoleAreInverse) {
  for (auto mode : {LayoutMode::sequential, LayoutMode::interleaved}) {
    for (std::size_t L : {2u, 3u, 7u}) {
      const DecisionLayout lay(mode, L);
      std::set<std::size_t> seen;
      for (std::size_t c = 0; c < lay.n(); ++c) {
        const auto [role, i] = lay.role_of(c);
        EXPECT_EQ(lay.index(role, i), c);
        seen.insert(c);
      }
      EXPECT_EQ(seen.size(), 6 * L - 1);
      EXPECT_THROW(lay.index(VarRole::dk, 0), InputError);
      EXPECT_THROW(lay.index(VarRole::l, L), InputError);
      EXPECT_THROW(lay.role_of(lay.n()), InputError);
    }
  }
  EXPECT_THROW(DecisionLayout(LayoutMode::interleaved, 1), InputError);
}

TEST(Layout, InterleavedGroupsHoldSixColumns) {
  const DecisionLayout lay(LayoutMode::interleaved, 5);
  EXPECT_EQ(lay.index(VarRole::l, 2), 12u);
  EXPECT_EQ(lay.index(VarRole::eps2, 2), 16u);
  EXPECT_EQ(lay.index(VarRole::dk, 3), 17u);  // k' into point 3 sits with point 2
  EXPECT_EQ(lay.index(VarRole::eps2, 4), 28u);
}

TEST(Layout, PermutationRoundTrip) {
  std::mt19937_64 g(1);
  const DecisionLayout a(LayoutMode::sequential, 9), b(LayoutMode::interleaved, 9);
  const auto v = oracle::random_vector(g, a.n());
  EXPECT_EQ(permute_vector(permute_vector(v, a, b), b, a), v);
  const auto w = permute_vector(v, a, b);
  for (std::size_t c = 0; c < a.n(); ++c) {
    const auto [role, i] = a.role_of(c);
    EXPECT_EQ(w[b.index(role, i)], v[c]);
  }
  EXPECT_THROW(a.permutation_to(DecisionLayout(LayoutMode::interleaved, 8)), DimensionError);
}

TEST(QpBuild, StructuralCounts) {
  for (auto mode : {LayoutMode::sequential, LayoutMode::interleaved}) {
    for (std::size_t L : {2u, 4u, 10u, 270u}) {
      const auto qp = make_canonical_problem(L, mode);
      qp.validate();
      EXPECT_EQ(qp.n(), 6 * L - 1);
      EXPECT_EQ(qp.m(), 6 * L + 2);
      EXPECT_EQ(qp.A.nnz(), 17 * L - 5);
      EXPECT_EQ(qp.P.nnz(), 5 * L - 1);
      EXPECT_EQ(patterned_to_csc(qp.patterned_A()), qp.A);
    }
  }
}

TEST(QpBuild, CurvatureLimitFromSteering) {
  VehicleFootprint fp;
  EXPECT_NEAR(fp.k_max(), std::tan(0.6) / 2.8, 1e-15);
  EXPECT_NEAR(fp.k_max(), 0.2443, 5e-5);
  const auto qp = make_canonical_problem(5);
  EXPECT_DOUBLE_EQ(qp.u[0], fp.k_max());
  EXPECT_DOUBLE_EQ(qp.l[4], -fp.k_max());
}

TEST(QpBuild, ZeroWeightsGiveZeroCost) {
  CanonicalSpec spec;
  spec.L = 6;
  spec.weights = {0, 0, 0, 0};
  const auto qp = make_canonical_problem(spec);
  EXPECT_EQ(qp.P.nnz(), 5 * 6 - 1u);
  for (double v : qp.P.values()) EXPECT_EQ(v, 0.0);
  for (double v : qp.q) EXPECT_EQ(v, 0.0);
}

TEST(QpBuild, HeadingIsNotPenalized) {
  std::mt19937_64 g(2);
  const auto qp = make_canonical_problem(12);
  Vector<double> x(qp.n(), 0.0);
  for (std::size_t i = 0; i < 12; ++i) x[qp.layout->index(VarRole::phi, i)] = oracle::uniform(g, -1, 1);
  EXPECT_EQ(qp.objective(x), 0.0);
}

TEST(QpBuild, CostIsTheWeightedSumOfSquares) {
  std::mt19937_64 g(3);
  CanonicalSpec spec;
  spec.L = 8;
  spec.weights = {1.5, 7.0, 30.0, 500.0};
  const auto qp = make_canonical_problem(spec);
  const auto& lay = *qp.layout;
  const auto x = oracle::random_vector(g, qp.n());
  double expect = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    const double l = x[lay.index(VarRole::l, i)], k = x[lay.index(VarRole::k, i)];
    const double e1 = x[lay.index(VarRole::eps1, i)], e2 = x[lay.index(VarRole::eps2, i)];
    expect += 0.5 * (1.5 * l * l + 7.0 * k * k + 500.0 * (e1 * e1 + e2 * e2));
    if (i > 0) expect += 0.5 * 30.0 * x[lay.index(VarRole::dk, i)] * x[lay.index(VarRole::dk, i)];
  }
  EXPECT_NEAR(qp.objective(x), expect, 1e-12 * (1 + std::abs(expect)));
}

TEST(QpBuild, ConstraintRowsMatchHandWrittenModel) {
  std::mt19937_64 g(4);
  const std::size_t L = 7;
  const double ds = 0.3;
  auto ref = curved_reference(g, L, ds);
  VehicleFootprint fp;
  for (auto mode : {LayoutMode::sequential, LayoutMode::interleaved}) {
    const auto qp = build_qp(ref, fp, Weights{}, mode);
    const auto& lay = *qp.layout;
    const auto x = oracle::random_vector(g, qp.n());
    auto v = [&](VarRole r, std::size_t i) { return x[lay.index(r, i)]; };
    const auto ax = spmv_csc(qp.A, std::span<const double>(x));
    for (std::size_t i = 0; i < L; ++i) {
      EXPECT_NEAR(ax[i], v(VarRole::k, i), 1e-14);
      EXPECT_NEAR(ax[L + i], v(VarRole::l, i) + fp.f_length * v(VarRole::phi, i) + v(VarRole::eps1, i), 1e-13);
      EXPECT_NEAR(ax[2 * L + i], v(VarRole::l, i) - fp.r_length * v(VarRole::phi, i) + v(VarRole::eps2, i), 1e-13);
      EXPECT_EQ(qp.l[L + i], ref.bounds[i].fl);
      EXPECT_EQ(qp.u[2 * L + i], ref.bounds[i].rr);
    }
    for (std::size_t i = 1; i < L; ++i) {
      const std::size_t r = 3 * L + 3 * (i - 1);
      const double l0 = v(VarRole::l, i - 1), p0 = v(VarRole::phi, i - 1), k0 = v(VarRole::k, i - 1);
      EXPECT_NEAR(ax[r], v(VarRole::l, i) - l0 - ds * p0 - 0.5 * ds * ds * k0, 1e-13);
      EXPECT_NEAR(ax[r + 1], v(VarRole::phi, i) - p0 - ds * k0, 1e-13);
      EXPECT_NEAR(ax[r + 2], v(VarRole::k, i) - k0 - ds * v(VarRole::dk, i), 1e-13);
      EXPECT_NEAR(qp.l[r], -0.5 * ds * ds * ref.points[i - 1].kappa, 1e-16);
      EXPECT_NEAR(qp.l[r + 1], -ds * ref.points[i - 1].kappa, 1e-16);
    }
    EXPECT_EQ(ax[6 * L - 3], v(VarRole::l, 0));
    EXPECT_EQ(ax[6 * L - 1], v(VarRole::k, 0));
    EXPECT_EQ(ax[6 * L], v(VarRole::l, L - 1));
    EXPECT_EQ(ax[6 * L + 1], v(VarRole::phi, L - 1));
  }
}

TEST(QpBuild, SimulatedStatesSatisfyTheDynamics) {
  // Propagate the discrete lateral model forward and check every equality row.
  std::mt19937_64 g(5);
  const std::size_t L = 20;
  const double ds = 0.25;
  const auto ref = curved_reference(g, L, ds);
  BuildOptions opt;
  opt.initial = InitialState{0.3, -0.02, 0.01};
  const auto qp = build_qp(ref, VehicleFootprint{}, Weights{}, LayoutMode::interleaved, opt);
  const auto& lay = *qp.layout;
  Vector<double> x(qp.n(), 0.0);
  double l = 0.3, phi = -0.02, k = 0.01;
  x[lay.index(VarRole::l, 0)] = l;
  x[lay.index(VarRole::phi, 0)] = phi;
  x[lay.index(VarRole::k, 0)] = k;
  for (std::size_t i = 1; i < L; ++i) {
    const double dk = oracle::uniform(g, -0.2, 0.2), kr = ref.points[i - 1].kappa;
    const double nl = l + ds * phi + 0.5 * ds * ds * (k - kr);
    const double nphi = phi + ds * (k - kr);
    const double nk = k + ds * dk;
    l = nl, phi = nphi, k = nk;
    x[lay.index(VarRole::l, i)] = l;
    x[lay.index(VarRole::phi, i)] = phi;
    x[lay.index(VarRole::k, i)] = k;
    x[lay.index(VarRole::dk, i)] = dk;
  }
  const auto ax = spmv_csc(qp.A, std::span<const double>(x));
  const auto eq = qp.eq_mask();
  std::size_t eq_rows = 0;
  for (std::size_t r = 0; r < qp.m(); ++r) {
    if (!eq[r]) continue;
    ++eq_rows;
    EXPECT_NEAR(ax[r], qp.l[r], 1e-12) << "row " << r;
  }
  EXPECT_EQ(eq_rows, 3 * (L - 1) + 3);
}

TEST(QpBuild, EqualityAndBoundRows) {
  const std::size_t L = 10;
  const auto qp = make_canonical_problem(L);
  const auto eq = qp.eq_mask();
  for (std::size_t r = 0; r < qp.m(); ++r) {
    const bool is_eq = r >= 3 * L && r < 6 * L;
    EXPECT_EQ(eq[r] != 0, is_eq) << "row " << r;
    if (is_eq) {
      EXPECT_EQ(qp.l[r], qp.u[r]);
    } else {
      EXPECT_LT(qp.l[r], qp.u[r]);
    }
  }
}

TEST(QpBuild, StraightReferenceHasZeroFeasible) {
  const auto ref = straight_reference(15, 0.2, 1.0);
  const auto qp = build_qp(ref, VehicleFootprint{}, Weights{}, LayoutMode::interleaved);
  const Vector<double> x(qp.n(), 0.0);
  EXPECT_EQ(oracle::max_violation(qp, x), 0.0);
  EXPECT_EQ(qp.objective(x), 0.0);
}

TEST(QpBuild, InterleavedNormalMatrixIsBlockTridiagonal) {
  // Columns of A'A only couple groups of neighbouring points.
  for (std::size_t L : {4u, 9u}) {
    const auto qp = make_canonical_problem(L, LayoutMode::interleaved);
    const auto A = oracle::dense(qp.A);
    for (std::size_t a = 0; a < qp.n(); ++a) {
      for (std::size_t b = 0; b < qp.n(); ++b) {
        double s = 0;
        for (std::size_t r = 0; r < qp.m(); ++r) s += std::abs(A(r, a) * A(r, b));
        const std::size_t ga = a / 6, gb = b / 6;
        if (s != 0) { EXPECT_LE(ga > gb ? ga - gb : gb - ga, 1u) << a << "," << b; }
      }
    }
  }
}

TEST(QpBuild, ObjectiveInvariantUnderLayoutChange) {
  std::mt19937_64 g(6);
  const auto seq = make_canonical_problem(30, LayoutMode::sequential);
  const auto inter = to_layout(seq, LayoutMode::interleaved);
  inter.validate();
  EXPECT_EQ(patterned_to_csc(inter.patterned_A()), make_canonical_problem(30).A);
  EXPECT_EQ(inter.P, make_canonical_problem(30).P);
  for (int t = 0; t < 20; ++t) {
    const auto x = oracle::random_vector(g, seq.n(), -2, 2);
    const auto y = permute_vector(x, *seq.layout, *inter.layout);
    EXPECT_NEAR(seq.objective(x), inter.objective(y), 1e-12 * (1 + std::abs(seq.objective(x))));
    const auto a1 = spmv_csc(seq.A, std::span<const double>(x));
    const auto a2 = spmv_csc(inter.A, std::span<const double>(y));
    for (std::size_t r = 0; r < seq.m(); ++r) EXPECT_NEAR(a1[r], a2[r], 1e-13);
  }
  QpProblem<double> bare = seq;
  bare.layout.reset();
  EXPECT_THROW(to_layout(bare, LayoutMode::interleaved), LayoutError);
}

TEST(QpBuild, RejectsBadInputs) {
  auto ref = straight_reference(5, 0.2, 1.0);
  EXPECT_THROW(build_qp(ref, VehicleFootprint{}, Weights{-1, 0, 0, 0}, LayoutMode::interleaved), InputError);
  BuildOptions opt;
  opt.curvature_margin = 1.0;
  EXPECT_THROW(build_qp(ref, VehicleFootprint{}, Weights{}, LayoutMode::interleaved, opt), InputError);
  ref.bounds[2].fl = 2.0;
  EXPECT_THROW(build_qp(ref, VehicleFootprint{}, Weights{}, LayoutMode::interleaved), InfeasibleCorridorError);
  EXPECT_THROW(make_canonical_problem(1), InputError);
}

TEST(QpBuild, CanonicalBatchVariesTheReference) {
  const auto batch = canonical_batch(40);
  ASSERT_EQ(batch.size(), 4u);
  std::set<double> amps;
  for (const auto& s : batch) {
    EXPECT_EQ(s.L, 40u);
    amps.insert(s.kappa_amplitude);
    make_canonical_problem(s).validate();
  }
  EXPECT_EQ(amps.size(), 4u);
}
