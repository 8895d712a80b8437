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

// End-to-end planning in three stages:
//   1. reference generation   waypoints -> B-spline -> lattice -> smoothed curve
//   2. reference processing   corridor bounds and the QP
//   3. optimization           ADMM solve and path reconstruction

#pragma once

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pathqp/admm.hpp"
#include "pathqp/gridmap.hpp"
#include "pathqp/qp_build.hpp"
#include "pathqp/reference_path.hpp"

namespace pathqp {

/// Solver defaults used for planning: tighter tolerances than the generic
/// solver so that bound checks on the returned path hold to 1e-6.
inline AdmmSettings planning_settings() {
  AdmmSettings s;
  s.eps_abs = 1e-5;
  s.eps_rel = 1e-5;
  s.pcg_rel_tol = 1e-7;
  return s;
}

inline BuildOptions planning_build_options() {
  BuildOptions b;
  b.curvature_margin = 1e-3;
  return b;
}

struct PlanTask {
  std::string id;
  std::shared_ptr<const GridMap> map;
  std::string map_source;  ///< manifest path, informational
  std::vector<Point2> waypoints;
  std::optional<Pose2> ego;  ///< defaults to the start of the reference
  VehicleFootprint vehicle{};
  std::size_t L = 270;
  double delta_s = 0.2;
  double sample_ds = 0.25;  ///< spacing of the intermediate curves
  LatticeSpec lattice{};
  ProcessOptions process{};
  Weights weights{};
  BuildOptions build = planning_build_options();
  AdmmSettings settings = planning_settings();
  std::string difficulty;
};

struct PathSample {
  double s, x, y, theta, kappa, l, phi, k;
};

struct StageTimes {
  double reference = 0.0;
  double processing = 0.0;
  double optimization = 0.0;
  double total() const { return reference + processing + optimization; }
};

/// Output of stage 1.
struct ReferenceStage {
  std::vector<CurvePoint> baseline;
  LatticeResult lattice;
  std::vector<CurvePoint> smoothed;
};

/// Output of stage 2.
struct ProcessingStage {
  ReferencePath ref;
  QpProblem<double> qp;
};

struct PlanResult {
  ReferenceStage reference;
  ReferencePath ref;
  QpProblem<double> qp;
  SolveResult<double> solve;
  std::vector<PathSample> path;
  StageTimes times;
};

inline ReferenceStage run_reference_stage(const PlanTask& task) {
  if (!task.map) throw InputError("task '" + task.id + "' has no map");
  ReferenceStage out;
  out.baseline = bspline_generate(task.waypoints, task.sample_ds);
  out.lattice = dp_search(out.baseline, *task.map, task.lattice, task.vehicle);
  auto poly = out.lattice.polyline;
  if (poly.size() == 2) {
    poly.insert(poly.begin() + 1,
                Point2{0.5 * (poly[0].x + poly[1].x), 0.5 * (poly[0].y + poly[1].y)});
  }
  out.smoothed = cubic_spline_smooth(poly, task.sample_ds);
  return out;
}

inline ProcessingStage run_processing_stage(const PlanTask& task, const ReferenceStage& rs) {
  ProcessingStage out;
  out.ref = process_reference(rs.smoothed, *task.map, task.vehicle, task.L, task.delta_s,
                              task.process);
  BuildOptions opt = task.build;
  if (!opt.initial) {
    const Pose2 ego = task.ego.value_or(
        Pose2{out.ref.points[0].x, out.ref.points[0].y, out.ref.points[0].theta});
    const auto [l0, phi0] = project_pose(out.ref.points, ego);
    const double kmax = task.vehicle.k_max() - opt.curvature_margin;
    opt.initial = InitialState{l0, phi0, std::clamp(out.ref.points[0].kappa, -kmax, kmax)};
  }
  out.qp = build_qp(out.ref, task.vehicle, task.weights, LayoutMode::interleaved, opt);
  return out;
}

/// Path samples from a solution in any layout.
inline std::vector<PathSample> reconstruct_path(const ReferencePath& ref,
                                                const DecisionLayout& lay,
                                                const Vector<double>& x) {
  std::vector<PathSample> out(ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const auto& p = ref.points[i];
    const double l = x[lay.index(VarRole::l, i)];
    const double phi = x[lay.index(VarRole::phi, i)];
    const double k = x[lay.index(VarRole::k, i)];
    out[i] = {p.s,
              p.x - l * std::sin(p.theta),
              p.y + l * std::cos(p.theta),
              normalize_angle(p.theta + phi),
              k,
              l,
              phi,
              k};
  }
  return out;
}

inline PlanResult run_optimization_stage(const PlanTask& task, ReferenceStage rs,
                                         ProcessingStage ps) {
  PlanResult out;
  out.solve = admm_solve(ps.qp, task.settings);
  out.path = reconstruct_path(ps.ref, *ps.qp.layout, out.solve.x);
  out.reference = std::move(rs);
  out.ref = std::move(ps.ref);
  out.qp = std::move(ps.qp);
  return out;
}

inline PlanResult plan(const PlanTask& task) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto rs = run_reference_stage(task);
  const auto t1 = clock::now();
  auto ps = run_processing_stage(task, rs);
  const auto t2 = clock::now();
  auto out = run_optimization_stage(task, std::move(rs), std::move(ps));
  const auto t3 = clock::now();
  out.times = {std::chrono::duration<double>(t1 - t0).count(),
               std::chrono::duration<double>(t2 - t1).count(),
               std::chrono::duration<double>(t3 - t2).count()};
  return out;
}

struct PlanCheck {
  bool collision_free = false;
  double max_abs_k = 0.0;
  double k_max = 0.0;
  double corridor_violation = 0.0;  ///< largest geometric overshoot of fl/fr/rl/rr [m]
};

/// Geometric checks on a planned path: footprint collisions, the curvature
/// limit and the front/rear corridor bounds (slacks excluded).
inline PlanCheck check_plan(const PlanResult& r, const GridMap& map, const VehicleFootprint& fp) {
  PlanCheck c;
  c.k_max = fp.k_max();
  std::vector<Pose2> poses;
  poses.reserve(r.path.size());
  for (std::size_t i = 0; i < r.path.size(); ++i) {
    const auto& p = r.path[i];
    poses.push_back({p.x, p.y, p.theta});
    c.max_abs_k = std::max(c.max_abs_k, std::abs(p.k));
    const auto& b = r.ref.bounds[i];
    const double front = p.l + fp.f_length * p.phi;
    const double rear = p.l - fp.r_length * p.phi;
    c.corridor_violation = std::max({c.corridor_violation, b.fl - front, front - b.fr,
                                     b.rl - rear, rear - b.rr});
  }
  c.collision_free = collision_free(map, poses, fp);
  return c;
}

}  // namespace pathqp
