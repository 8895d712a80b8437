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

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "oracles.hpp"
#include "pathqp/gridmap.hpp"
#include "pathqp/reference_path.hpp"

using namespace pathqp;

namespace {

double cross(Point2 o, Point2 a, Point2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

// Andrew's monotone chain, counter-clockwise.
std::vector<Point2> convex_hull(std::vector<Point2> p) {
  std::sort(p.begin(), p.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<Point2> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  return h;
}

bool inside_hull(const std::vector<Point2>& hull, Point2 q, double tol) {
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (cross(a, b, q) / len < -tol) return false;
  }
  return true;
}

std::vector<CurvePoint> straight_curve(Point2 start, double length, double ds) {
  std::vector<CurvePoint> c;
  const std::size_t n = static_cast<std::size_t>(std::llround(length / ds));
  for (std::size_t i = 0; i <= n; ++i) {
    CurvePoint p;
    p.s = static_cast<double>(i) * ds;
    p.x = start.x + p.s;
    p.y = start.y;
    c.push_back(p);
  }
  return c;
}

// Occupies every cell whose center lies in the rectangle.
GridMap with_blocks(std::size_t w, std::size_t h, double res, std::vector<RectObstacle> blocks) {
  SyntheticMapSpec s;
  s.width_px = w;
  s.height_px = h;
  s.resolution = res;
  s.obstacles = std::move(blocks);
  return gen_synthetic(s);
}

}  // namespace

TEST(BSpline, MatchesCoxDeBoorBasis) {
  std::mt19937_64 g(1);
  for (std::size_t deg : {1u, 2u, 3u, 4u}) {
    std::vector<Point2> ctrl;
    for (int i = 0; i < 9; ++i) ctrl.push_back({oracle::uniform(g, -5, 5), oracle::uniform(g, -5, 5)});
    const auto spline = BSpline::clamped_uniform(ctrl, deg);
    for (int t = 0; t <= 200; ++t) {
      const double u = spline.begin() + (spline.end() - spline.begin()) * t / 200.0;
      const auto a = spline(u);
      const auto b = oracle::basis_eval(ctrl, deg, u);
      EXPECT_NEAR(a.x, b.x, 1e-12);
      EXPECT_NEAR(a.y, b.y, 1e-12);
    }
  }
}

TEST(BSpline, DerivativeMatchesCentralDifference) {
  std::mt19937_64 g(2);
  std::vector<Point2> ctrl;
  for (int i = 0; i < 8; ++i) ctrl.push_back({oracle::uniform(g, -5, 5), oracle::uniform(g, -5, 5)});
  const auto s = BSpline::clamped_uniform(ctrl);
  const auto d = s.derivative();
  const double h = 1e-6;
  for (double u = 0.05; u < s.end() - 0.05; u += 0.173) {
    const auto fd = Point2{(s(u + h).x - s(u - h).x) / (2 * h), (s(u + h).y - s(u - h).y) / (2 * h)};
    EXPECT_NEAR(d(u).x, fd.x, 1e-6);
    EXPECT_NEAR(d(u).y, fd.y, 1e-6);
  }
}

TEST(BSpline, RejectsTooFewWaypoints) {
  EXPECT_THROW(BSpline::clamped_uniform({{0, 0}, {1, 0}, {2, 0}}), InputError);
  EXPECT_THROW(bspline_generate({{0, 0}, {1, 0}, {2, 0}}, 0.1), InputError);
  EXPECT_THROW(bspline_generate({{0, 0}, {1, 0}, {2, 0}, {3, 0}}, 0.0), InputError);
}

TEST(BSplineGenerate, CollinearWaypointsHaveZeroCurvature) {
  const auto pts = bspline_generate({{0, 0}, {1, 1}, {3, 3}, {4, 4}, {7, 7}}, 0.1);
  for (const auto& p : pts) {
    EXPECT_NEAR(p.kappa, 0.0, 1e-9);
    EXPECT_NEAR(p.theta, M_PI / 4, 1e-9);
  }
}

TEST(BSplineGenerate, CircleHasCurvatureNearInverseRadius) {
  const double R = 20.0;
  std::vector<Point2> wps;
  for (int i = 0; i <= 40; ++i) {
    const double a = M_PI * i / 40.0;
    wps.push_back({R * std::cos(a), R * std::sin(a)});
  }
  const auto pts = bspline_generate(wps, 0.2);
  // The clamped ends straighten out, so look at the middle 80 percent.
  const std::size_t skip = pts.size() / 10;
  for (std::size_t i = skip; i + skip < pts.size(); ++i) {
    EXPECT_NEAR(pts[i].kappa, 1.0 / R, 0.05 / R) << "sample " << i;
  }
}

TEST(BSplineGenerate, EndpointsAndArcLengthSpacing) {
  const std::vector<Point2> wps{{0, 0}, {5, 2}, {10, -1}, {15, 3}, {20, 0}};
  const auto pts = bspline_generate(wps, 0.25);
  EXPECT_EQ(pts.front().x, 0.0);
  EXPECT_EQ(pts.front().y, 0.0);
  EXPECT_EQ(pts.back().x, 20.0);
  EXPECT_EQ(pts.back().y, 0.0);
  EXPECT_EQ(pts.front().s, 0.0);
  const double ds = pts[1].s - pts[0].s;
  EXPECT_NEAR(ds, 0.25, 0.25 / (pts.size() - 1) + 1e-12);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_NEAR(pts[i].s - pts[i - 1].s, ds, 1e-9);
    const double chord = std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
    EXPECT_LE(chord, ds + 1e-9);
    EXPECT_GE(chord, 0.99 * ds);
  }
}

TEST(BSplineGenerate, StaysInsideControlHull) {
  std::mt19937_64 g(4);
  for (int t = 0; t < 20; ++t) {
    std::vector<Point2> wps;
    for (int i = 0; i < 7; ++i) wps.push_back({10.0 * i + oracle::uniform(g, -3, 3), oracle::uniform(g, -8, 8)});
    const auto hull = convex_hull(wps);
    for (const auto& p : bspline_generate(wps, 0.3)) EXPECT_TRUE(inside_hull(hull, {p.x, p.y}, 1e-9));
  }
}

TEST(CubicSpline, InterpolatesItsVertices) {
  std::mt19937_64 g(6);
  std::vector<Point2> pts;
  for (int i = 0; i < 12; ++i) pts.push_back({3.0 * i, oracle::uniform(g, -2, 2)});
  const SmoothCurve c(pts);
  double t = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) t += std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
    const auto d = c.at_param(t);
    EXPECT_NEAR(d.x, pts[i].x, 1e-9);
    EXPECT_NEAR(d.y, pts[i].y, 1e-9);
  }
  // Natural end conditions.
  EXPECT_NEAR(c.at_param(0).ddx, 0.0, 1e-12);
  EXPECT_NEAR(c.at_param(c.param_end()).ddy, 0.0, 1e-12);
}

TEST(CubicSpline, SShapeCurvatureIsAntisymmetric) {
  std::vector<Point2> pts;
  for (int i = -8; i <= 8; ++i) pts.push_back({2.0 * i, 3.0 * std::tanh(i / 3.0)});
  const auto c = cubic_spline_smooth(pts, 0.1);
  const std::size_t n = c.size();
  for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(c[k].kappa, -c[n - 1 - k].kappa, 1e-6);
  EXPECT_GT(std::abs(c[n / 4].kappa), 1e-3);
}

TEST(CubicSpline, RejectsDegenerateInput) {
  EXPECT_THROW(cubic_spline_smooth({{0, 0}, {1, 0}}, 0.1), InputError);
  EXPECT_THROW(cubic_spline_smooth({{0, 0}, {1, 0}, {1, 0}}, 0.1), InputError);
}

TEST(CurveQueries, InterpolationAndProjection) {
  const auto c = straight_curve({2, 3}, 10.0, 0.5);
  const auto p = interpolate_at(c, 4.25);
  EXPECT_NEAR(p.x, 6.25, 1e-12);
  EXPECT_NEAR(p.y, 3.0, 1e-12);
  EXPECT_EQ(interpolate_at(c, -1).s, 0.0);
  EXPECT_EQ(interpolate_at(c, 99).s, 10.0);
  const auto [l, phi] = project_pose(c, {5.0, 4.5, 0.3});
  EXPECT_NEAR(l, 1.5, 1e-12);
  EXPECT_NEAR(phi, 0.3, 1e-12);
  EXPECT_NEAR(normalize_angle(3 * M_PI), M_PI, 1e-12);
  EXPECT_NEAR(normalize_angle(-M_PI), M_PI, 1e-12);
}

TEST(Lattice, EmptyMapKeepsZeroOffsets) {
  const auto map = GridMap::empty(300, 150, 0.2);
  const auto c = straight_curve({5, 15}, 40.0, 0.1);
  const auto r = dp_search(c, map, {}, VehicleFootprint{});
  for (double o : r.offsets) EXPECT_EQ(o, 0.0);
  EXPECT_EQ(r.polyline.size(), 21u);
  EXPECT_NEAR(r.polyline.back().x, 45.0, 1e-9);
}

TEST(Lattice, MatchesBruteForceOnSmallGrid) {
  // Obstacle sits on the reference so the best path must swerve.
  const auto map = with_blocks(200, 100, 0.2, {{16.0, 9.2, 17.0, 10.4}});
  const auto curve = straight_curve({8, 10}, 16.0, 0.1);
  LatticeSpec spec;
  spec.station_step = 4.0;
  spec.lateral_span = 3.0;
  spec.lateral_step = 1.5;
  spec.clearance_range = 2.0;
  VehicleFootprint fp;
  fp.f_length = 1.5;
  fp.r_length = 0.5;
  fp.width = 1.0;
  const auto got = dp_search(curve, map, spec, fp);

  // Enumerate all 5^4 offset sequences after the fixed start node.
  const double res = map.resolution();
  const auto full = detail::footprint_samples(fp, 0.5 * res, false);
  const auto rim = detail::footprint_samples(fp, 0.5 * res, true);
  const double offs[5] = {-3.0, -1.5, 0.0, 1.5, 3.0};
  auto pos = [&](int i, int j) { return Point2{8.0 + 4.0 * i, 10.0 + offs[j]}; };
  auto node_ok = [&](int i, int j) { return detail::samples_free(map, full, {pos(i, j).x, pos(i, j).y, 0.0}); };
  auto penalty = [&](int i, int j) {
    const auto c = lateral_clearance(map, {pos(i, j).x, pos(i, j).y, 0.0}, 2.0, 0.5 * res);
    const double gap = std::max(0.0, 2.0 - std::min(c.left, c.right));
    return gap * gap;
  };
  auto edge_ok = [&](int i, int a, int b) {
    const Point2 pa = pos(i, a), pb = pos(i + 1, b);
    const double len = std::hypot(pb.x - pa.x, pb.y - pa.y), h = std::atan2(pb.y - pa.y, pb.x - pa.x);
    const std::size_t n = detail::sample_count(len, 0.5 * res);
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(n - 1);
      if (!detail::samples_free(map, rim, {pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y), h})) return false;
    }
    return true;
  };
  double best = 1e300;
  std::vector<std::pair<double, std::vector<int>>> feasible;
  for (int code = 0; code < 625; ++code) {
    std::vector<int> seq{2};
    for (int c = code, k = 0; k < 4; ++k, c /= 5) seq.push_back(c % 5);
    double cost = 0;
    bool ok = true;
    for (int i = 0; i < 4 && ok; ++i) {
      ok = node_ok(i + 1, seq[i + 1]) && edge_ok(i, seq[i], seq[i + 1]);
      const double ob = offs[seq[i + 1]], d = ob - offs[seq[i]];
      cost += spec.w_dev * ob * ob + spec.w_smooth * d * d + spec.w_clear * penalty(i + 1, seq[i + 1]);
    }
    if (!ok) continue;
    feasible.push_back({cost, seq});
    best = std::min(best, cost);
  }
  ASSERT_FALSE(feasible.empty());
  EXPECT_NEAR(got.cost, best, 1e-9 * (1 + best));
  ASSERT_EQ(got.offsets.size(), 5u);
  // Several offset sequences can tie; the returned one must be among them.
  bool among_optima = false;
  for (const auto& [cost, seq] : feasible) {
    if (cost > best + 1e-9) continue;
    bool same = true;
    for (int i = 0; i < 5; ++i) same = same && got.offsets[i] == offs[seq[i]];
    among_optima = among_optima || same;
  }
  EXPECT_TRUE(among_optima);
  bool swerves = false;
  for (double o : got.offsets) swerves = swerves || o != 0.0;
  EXPECT_TRUE(swerves);
}

TEST(Lattice, BlockedStationRaisesSearchFailure) {
  const auto map = with_blocks(300, 150, 0.2, {{30.0, 0.0, 31.0, 30.0}});
  const auto curve = straight_curve({5, 15}, 40.0, 0.1);
  EXPECT_THROW(dp_search(curve, map, {}, VehicleFootprint{}), SearchFailure);
  const auto start_blocked = with_blocks(300, 150, 0.2, {{4.0, 14.0, 6.0, 16.0}});
  EXPECT_THROW(dp_search(curve, start_blocked, {}, VehicleFootprint{}), SearchFailure);
}

TEST(ProcessReference, EmptyMapGivesSymmetricBounds) {
  const auto map = GridMap::empty(400, 200, 0.2);
  const auto curve = straight_curve({10, 20}, 50.0, 0.1);
  VehicleFootprint fp;
  fp.width = 2.0;
  ProcessOptions opt;
  opt.max_range = 5.0;
  const auto ref = process_reference(curve, map, fp, 101, 0.4, opt);
  ref.validate();
  ASSERT_EQ(ref.size(), 101u);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    EXPECT_DOUBLE_EQ(ref.points[i].s, 0.4 * i);
    EXPECT_DOUBLE_EQ(ref.bounds[i].fl, -4.0);
    EXPECT_DOUBLE_EQ(ref.bounds[i].fr, 4.0);
    EXPECT_DOUBLE_EQ(ref.bounds[i].rl, -4.0);
    EXPECT_DOUBLE_EQ(ref.bounds[i].rr, 4.0);
    if (i > 0) { EXPECT_NEAR(ref.points[i].x - ref.points[i - 1].x, 0.4, 1e-12); }
  }
  opt.safety_margin = 0.5;
  EXPECT_DOUBLE_EQ(process_reference(curve, map, fp, 11, 0.4, opt).bounds[3].fr, 3.5);
}

TEST(ProcessReference, WallOnTheLeftTightensTheLeftBound) {
  // Wall from y = 23 upward, reference along y = 20: 3 m of room on the left.
  const auto map = with_blocks(400, 200, 0.2, {{0.0, 23.0, 80.0, 40.0}});
  const auto curve = straight_curve({10, 20}, 50.0, 0.1);
  VehicleFootprint fp;
  ProcessOptions opt;
  opt.max_range = 5.0;
  const auto ref = process_reference(curve, map, fp, 21, 1.0, opt);
  for (const auto& b : ref.bounds) {
    EXPECT_GE(b.fr, 1.9 - 1e-9);
    EXPECT_LE(b.fr, 2.0 + 1e-9);
    EXPECT_DOUBLE_EQ(b.fl, -4.0);
    EXPECT_GE(b.rr, 1.9 - 1e-9);
    EXPECT_LE(b.rr, 2.0 + 1e-9);
  }
}

TEST(ProcessReference, BoundsOrderedOnRandomMaps) {
  std::mt19937_64 g(8);
  int built = 0;
  for (int t = 0; t < 15; ++t) {
    std::vector<RectObstacle> blocks;
    for (int k = 0; k < 8; ++k) {
      const double x = oracle::uniform(g, 5, 70), y = oracle::uniform(g, 10, 30);
      blocks.push_back({x, y, x + oracle::uniform(g, 0.5, 3), y + oracle::uniform(g, 0.5, 3)});
    }
    const auto map = with_blocks(400, 200, 0.2, blocks);
    const auto curve = straight_curve({10, 20}, 50.0, 0.1);
    try {
      const auto ref = process_reference(curve, map, VehicleFootprint{}, 51, 1.0);
      for (const auto& b : ref.bounds) {
        EXPECT_LE(b.fl, b.fr);
        EXPECT_LE(b.rl, b.rr);
      }
      ++built;
    } catch (const InfeasibleCorridorError&) {
    }
  }
  EXPECT_GT(built, 0);
}

TEST(ProcessReference, RejectsShortCurvesAndNarrowCorridors) {
  const auto map = GridMap::empty(400, 200, 0.2);
  const auto curve = straight_curve({10, 20}, 10.0, 0.1);
  EXPECT_THROW(process_reference(curve, map, VehicleFootprint{}, 30, 0.4), InputError);
  EXPECT_THROW(process_reference(curve, map, VehicleFootprint{}, 1, 0.4), InputError);
  const auto narrow = with_blocks(400, 200, 0.2, {{0, 20.9, 80, 40}, {0, 0, 80, 19.1}});
  EXPECT_THROW(process_reference(curve, narrow, VehicleFootprint{}, 11, 0.5), InfeasibleCorridorError);
}
