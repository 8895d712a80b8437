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

// Seeded generator of planning tasks on synthetic maps. Routes follow a
// sinusoidal curvature profile; obstacles are placed beside the route, and
// some tasks get a gap with obstacles on both sides. Tasks are labelled by
// the quartile of their maximum reference curvature.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "pathqp/gridmap.hpp"
#include "pathqp/planner.hpp"
#include "pathqp/reference_path.hpp"

namespace pathqp {

inline constexpr const char* kDifficultyLabels[4] = {"easy", "medium1", "medium2", "hard"};

struct SyntheticTaskOptions {
  std::size_t count = 20;
  std::uint64_t seed = 7;
  std::size_t map_px = 600;
  double resolution = 0.2;
  double route_length = 80.0;      ///< waypoint polyline length [m]
  double waypoint_spacing = 4.0;
  double min_amplitude = 0.01;     ///< curvature amplitude range [1/m]
  double max_amplitude = 0.22;
  std::size_t L = 270;
  double delta_s = 0.2;
};

struct SyntheticTask {
  PlanTask task;
  SyntheticMapSpec map_spec;
  double max_ref_curvature = 0.0;
};

namespace detail {

inline std::vector<Point2> sinusoidal_route(Point2 start, double heading, double amplitude,
                                            double wavelength, double phase, double length,
                                            double spacing) {
  std::vector<Point2> pts{start};
  const std::size_t sub = 20;
  const double h = spacing / static_cast<double>(sub);
  double x = start.x, y = start.y, th = heading, s = 0.0;
  const std::size_t n = static_cast<std::size_t>(std::llround(length / spacing));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < sub; ++j) {
      const double kap = amplitude * std::sin(2.0 * M_PI * s / wavelength + phase);
      x += h * std::cos(th);
      y += h * std::sin(th);
      th += h * kap;
      s += h;
    }
    pts.push_back({x, y});
  }
  return pts;
}

}  // namespace detail

inline std::vector<SyntheticTask> generate_synthetic_tasks(const SyntheticTaskOptions& opt = {}) {
  if (opt.count == 0) throw InputError("synthetic tasks: count must be positive");
  std::vector<SyntheticTask> out;
  out.reserve(opt.count);
  const double extent = static_cast<double>(opt.map_px) * opt.resolution;
  for (std::size_t t = 0; t < opt.count; ++t) {
    std::mt19937_64 rng(opt.seed * 1000003ULL + t);
    auto uni = [&](double a, double b) { return a + (b - a) * detail::unit_draw(rng); };
    const double frac =
        opt.count > 1 ? static_cast<double>(t) / static_cast<double>(opt.count - 1) : 0.5;
    const double amp = opt.min_amplitude + (opt.max_amplitude - opt.min_amplitude) * frac;

    std::vector<Point2> wps;
    std::vector<CurvePoint> baseline;
    for (int attempt = 0;; ++attempt) {
      const double wavelength = uni(30.0, 50.0);
      const double phase = uni(0.0, 2.0 * M_PI);
      const double heading = uni(-0.3, 0.3);
      wps = detail::sinusoidal_route({10.0, 0.5 * extent}, heading, amp, wavelength, phase,
                                     opt.route_length, opt.waypoint_spacing);
      const bool inside = std::all_of(wps.begin(), wps.end(), [&](const Point2& p) {
        return p.x > 8.0 && p.x < extent - 8.0 && p.y > 8.0 && p.y < extent - 8.0;
      });
      if (inside || attempt > 50) break;
    }
    baseline = bspline_generate(wps, 0.25);

    SyntheticMapSpec ms;
    ms.width_px = opt.map_px;
    ms.height_px = opt.map_px;
    ms.resolution = opt.resolution;
    // Obstacles beside the route, plus a gap in every third task.
    const std::size_t n_side = 2 + static_cast<std::size_t>(uni(0.0, 2.999));
    auto place = [&](double s, double side, double inner, double along, double across) {
      const auto p = interpolate_at(baseline, s);
      const double nx = -std::sin(p.theta), ny = std::cos(p.theta);
      const double c = inner + 0.5 * across;
      const double cx = p.x + side * c * nx, cy = p.y + side * c * ny;
      const double hx = 0.5 * (std::abs(along * std::cos(p.theta)) + std::abs(across * nx));
      const double hy = 0.5 * (std::abs(along * std::sin(p.theta)) + std::abs(across * ny));
      ms.obstacles.push_back({cx - hx, cy - hy, cx + hx, cy + hy});
    };
    for (std::size_t k = 0; k < n_side; ++k) {
      const double s = 12.0 + 40.0 * (static_cast<double>(k) + uni(0.2, 0.8)) /
                                  static_cast<double>(n_side);
      place(s, uni(0.0, 1.0) < 0.5 ? 1.0 : -1.0, uni(2.2, 4.0), uni(1.5, 3.0), uni(1.0, 2.0));
    }
    if (t % 3 == 2) {
      const double s = uni(20.0, 45.0);
      place(s, 1.0, 2.3, 1.5, 1.5);
      place(s, -1.0, 2.3, 1.5, 1.5);
    }

    SyntheticTask st;
    st.map_spec = ms;
    for (const auto& p : baseline) {
      st.max_ref_curvature = std::max(st.max_ref_curvature, std::abs(p.kappa));
    }
    auto& task = st.task;
    char id[32];
    std::snprintf(id, sizeof(id), "syn%02zu", t);
    task.id = id;
    task.map = std::make_shared<const GridMap>(gen_synthetic(ms));
    task.waypoints = wps;
    task.L = opt.L;
    task.delta_s = opt.delta_s;
    out.push_back(std::move(st));
  }

  // Difficulty: quartile of the maximum reference curvature.
  std::vector<std::size_t> order(out.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out[a].max_ref_curvature < out[b].max_ref_curvature;
  });
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    out[order[rank]].task.difficulty = kDifficultyLabels[std::min<std::size_t>(
        3, rank * 4 / order.size())];
  }
  return out;
}

/// Straight route on an empty map; the planned path must stay on the
/// reference with zero cost.
inline PlanTask straight_empty_task(std::size_t L = 270, double delta_s = 0.2) {
  PlanTask t;
  t.id = "straight";
  t.map = std::make_shared<const GridMap>(GridMap::empty(500, 200, 0.2, {0.0, 0.0}));
  for (int k = 0; k < 8; ++k) t.waypoints.push_back({5.0 + 10.0 * k, 20.0});
  t.L = L;
  t.delta_s = delta_s;
  return t;
}

}  // namespace pathqp
