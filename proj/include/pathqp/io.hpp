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

// File formats: map manifests (JSON + PGM), task and batch files, the QP
// interchange (JSON manifest + Matrix Market), "key=value" settings, and the
// run artifacts (path CSV, stats JSON, trace CSV, SVG plot).

#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pathqp/admm.hpp"
#include "pathqp/errors.hpp"
#include "pathqp/gridmap.hpp"
#include "pathqp/matrix_market.hpp"
#include "pathqp/planner.hpp"
#include "pathqp/qp_build.hpp"

namespace pathqp::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Magnitude at or above which a JSON bound is read as infinite.
inline constexpr double kInfBound = 1e30;

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, std::string_view data) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write '" + p.string() + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

inline json read_json(const fs::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::exception& e) {
    throw InputError("'" + p.string() + "': " + e.what());
  }
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Scalar parsing

inline double parse_double(std::string_view key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d)) {
    throw InputError("setting '" + std::string(key) + "': '" + v + "' is not a finite number");
  }
  return d;
}

inline std::size_t parse_size(std::string_view key, const std::string& v) {
  const double d = parse_double(key, v);
  if (d < 0 || d != std::floor(d) || d > 1e15) {
    throw InputError("setting '" + std::string(key) + "': '" + v +
                     "' is not a nonnegative integer");
  }
  return static_cast<std::size_t>(d);
}

inline bool parse_bool(std::string_view key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw InputError("setting '" + std::string(key) + "': '" + v + "' is not on/off");
}

/// Splits "key=value".
inline std::pair<std::string, std::string> split_kv(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw InputError("setting '" + s + "' is not of the form key=value");
  }
  return {s.substr(0, eq), s.substr(eq + 1)};
}

/// JSON scalar as the string form accepted by the setters.
inline std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return fmt(v.get<double>());
  throw InputError("setting values must be scalars");
}

// ---------------------------------------------------------------------------
// Settings

/// Returns false if `key` is not a solver setting.
inline bool apply_setting(AdmmSettings& s, const std::string& key, const std::string& v) {
  static const std::map<std::string, double AdmmSettings::*> reals = {
      {"sigma", &AdmmSettings::sigma},
      {"alpha", &AdmmSettings::alpha},
      {"rho_bar", &AdmmSettings::rho_bar},
      {"eq_multiplier", &AdmmSettings::eq_multiplier},
      {"rho_adopt_ratio", &AdmmSettings::rho_adopt_ratio},
      {"rho_min", &AdmmSettings::rho_min},
      {"rho_max", &AdmmSettings::rho_max},
      {"eps_abs", &AdmmSettings::eps_abs},
      {"eps_rel", &AdmmSettings::eps_rel},
      {"pcg_rel_tol", &AdmmSettings::pcg_rel_tol},
  };
  static const std::map<std::string, std::size_t AdmmSettings::*> counts = {
      {"rho_update_interval", &AdmmSettings::rho_update_interval},
      {"max_iter", &AdmmSettings::max_iter},
      {"max_pcg_iter", &AdmmSettings::max_pcg_iter},
      {"scaling_iters", &AdmmSettings::scaling_iters},
      {"parallel_factor", &AdmmSettings::parallel_factor},
      {"check_interval", &AdmmSettings::check_interval},
  };
  static const std::map<std::string, bool AdmmSettings::*> flags = {
      {"adaptive_rho", &AdmmSettings::adaptive_rho},
      {"fusion", &AdmmSettings::fusion},
      {"trace", &AdmmSettings::trace},
  };
  if (auto it = reals.find(key); it != reals.end()) {
    s.*(it->second) = parse_double(key, v);
  } else if (auto ic = counts.find(key); ic != counts.end()) {
    s.*(ic->second) = parse_size(key, v);
  } else if (auto ib = flags.find(key); ib != flags.end()) {
    s.*(ib->second) = parse_bool(key, v);
  } else {
    return false;
  }
  return true;
}

/// Solver settings plus the planning knobs of a task. Unknown keys throw.
inline void apply_setting(PlanTask& t, const std::string& key, const std::string& v) {
  if (apply_setting(t.settings, key, v)) return;
  static const std::map<std::string, double Weights::*> weights = {
      {"w_l", &Weights::w_l}, {"w_k", &Weights::w_k},
      {"w_dk", &Weights::w_dk}, {"w_s", &Weights::w_s}};
  static const std::map<std::string, double BuildOptions::*> build = {
      {"terminal_l", &BuildOptions::terminal_l},
      {"terminal_phi", &BuildOptions::terminal_phi},
      {"curvature_margin", &BuildOptions::curvature_margin}};
  static const std::map<std::string, double ProcessOptions::*> process = {
      {"max_range", &ProcessOptions::max_range},
      {"scan_step", &ProcessOptions::step},
      {"safety_margin", &ProcessOptions::safety_margin}};
  static const std::map<std::string, double LatticeSpec::*> lattice = {
      {"station_step", &LatticeSpec::station_step},
      {"lateral_span", &LatticeSpec::lateral_span},
      {"lateral_step", &LatticeSpec::lateral_step},
      {"w_dev", &LatticeSpec::w_dev},
      {"w_smooth", &LatticeSpec::w_smooth},
      {"w_clear", &LatticeSpec::w_clear},
      {"clearance_range", &LatticeSpec::clearance_range}};
  static const std::map<std::string, double VehicleFootprint::*> vehicle = {
      {"f_length", &VehicleFootprint::f_length},
      {"r_length", &VehicleFootprint::r_length},
      {"width", &VehicleFootprint::width},
      {"wheelbase", &VehicleFootprint::wheelbase},
      {"alpha_max", &VehicleFootprint::alpha_max}};
  if (auto it = weights.find(key); it != weights.end()) {
    t.weights.*(it->second) = parse_double(key, v);
  } else if (auto ib = build.find(key); ib != build.end()) {
    t.build.*(ib->second) = parse_double(key, v);
  } else if (auto ip = process.find(key); ip != process.end()) {
    t.process.*(ip->second) = parse_double(key, v);
  } else if (auto il = lattice.find(key); il != lattice.end()) {
    t.lattice.*(il->second) = parse_double(key, v);
  } else if (auto iv = vehicle.find(key); iv != vehicle.end()) {
    t.vehicle.*(iv->second) = parse_double(key, v);
  } else if (key == "L") {
    t.L = parse_size(key, v);
  } else if (key == "delta_s") {
    t.delta_s = parse_double(key, v);
  } else if (key == "sample_ds") {
    t.sample_ds = parse_double(key, v);
  } else {
    throw InputError("unknown setting '" + key + "'");
  }
}

inline void apply_settings(AdmmSettings& s, const std::vector<std::string>& kvs) {
  for (const auto& kv : kvs) {
    const auto [k, v] = split_kv(kv);
    if (!apply_setting(s, k, v)) throw InputError("unknown solver setting '" + k + "'");
  }
}

inline void apply_settings(PlanTask& t, const std::vector<std::string>& kvs) {
  for (const auto& kv : kvs) {
    const auto [k, v] = split_kv(kv);
    apply_setting(t, k, v);
  }
}

// ---------------------------------------------------------------------------
// Maps

inline MapManifest manifest_from_json(const json& j) {
  MapManifest m;
  if (!j.contains("resolution_m") || !j.contains("origin_m")) {
    throw InputError("map manifest needs resolution_m and origin_m");
  }
  m.resolution_m = j.at("resolution_m").get<double>();
  const auto& o = j.at("origin_m");
  if (!o.is_array() || o.size() != 2) throw InputError("origin_m must be [x, y]");
  m.origin_m = {o[0].get<double>(), o[1].get<double>()};
  if (j.contains("width_px")) m.width_px = j.at("width_px").get<std::size_t>();
  if (j.contains("height_px")) m.height_px = j.at("height_px").get<std::size_t>();
  return m;
}

/// Loads a map from its JSON manifest; the image path is relative to it.
inline GridMap load_map(const fs::path& manifest_path) {
  const json j = read_json(manifest_path);
  if (!j.contains("image")) throw InputError("map manifest needs an image entry");
  try {
    const auto m = manifest_from_json(j);
    const auto img = manifest_path.parent_path() / j.at("image").get<std::string>();
    return load_pgm(read_file(img), m);
  } catch (const json::exception& e) {
    throw InputError("map manifest '" + manifest_path.string() + "': " + e.what());
  }
}

/// Writes <dir>/<stem>.pgm and <dir>/<stem>.json; returns the manifest path.
inline fs::path save_map(const GridMap& map, const fs::path& dir, const std::string& stem) {
  write_file(dir / (stem + ".pgm"), save_pgm(map));
  const json j = {{"image", stem + ".pgm"},
                  {"resolution_m", map.resolution()},
                  {"origin_m", {map.origin().x, map.origin().y}},
                  {"width_px", map.width()},
                  {"height_px", map.height()}};
  const auto path = dir / (stem + ".json");
  write_file(path, j.dump(2) + "\n");
  return path;
}

inline SyntheticMapSpec map_spec_from_json(const json& j) {
  SyntheticMapSpec s;
  try {
    s.width_px = j.at("width_px").get<std::size_t>();
    s.height_px = j.at("height_px").get<std::size_t>();
    s.resolution = j.value("resolution_m", s.resolution);
    if (j.contains("origin_m")) {
      s.origin = {j["origin_m"].at(0).get<double>(), j["origin_m"].at(1).get<double>()};
    }
    for (const auto& r : j.value("obstacles", json::array())) {
      s.obstacles.push_back({r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(),
                             r.at(3).get<double>()});
    }
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    s.density = j.value("density", s.density);
    s.min_obstacle_m = j.value("min_obstacle_m", s.min_obstacle_m);
    s.max_obstacle_m = j.value("max_obstacle_m", s.max_obstacle_m);
  } catch (const json::exception& e) {
    throw InputError(std::string("map spec: ") + e.what());
  }
  return s;
}

inline json map_spec_to_json(const SyntheticMapSpec& s) {
  json obs = json::array();
  for (const auto& r : s.obstacles) obs.push_back({r.x_min, r.y_min, r.x_max, r.y_max});
  json j = {{"width_px", s.width_px},
            {"height_px", s.height_px},
            {"resolution_m", s.resolution},
            {"origin_m", {s.origin.x, s.origin.y}},
            {"obstacles", obs},
            {"density", s.density},
            {"min_obstacle_m", s.min_obstacle_m},
            {"max_obstacle_m", s.max_obstacle_m}};
  if (s.seed) j["seed"] = *s.seed;
  return j;
}

// ---------------------------------------------------------------------------
// Tasks

/// Maps shared between the tasks of a batch, keyed by canonical manifest path.
using MapCache = std::map<std::string, std::shared_ptr<const GridMap>>;

inline std::shared_ptr<const GridMap> cached_map(const fs::path& p, MapCache& cache) {
  const auto key = fs::weakly_canonical(p).string();
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto m = std::make_shared<const GridMap>(load_map(p));
  cache.emplace(key, m);
  return m;
}

/// Task object. `map` is a manifest path relative to `base`; `map_override`
/// replaces it when given.
inline PlanTask task_from_json(const json& j, const fs::path& base, MapCache& cache,
                               const std::optional<fs::path>& map_override = std::nullopt) {
  PlanTask t;
  try {
    t.id = j.at("id").get<std::string>();
    if (map_override) {
      t.map_source = map_override->string();
      t.map = cached_map(*map_override, cache);
    } else {
      t.map_source = j.at("map").get<std::string>();
      t.map = cached_map(base / t.map_source, cache);
    }
    for (const auto& w : j.at("waypoints")) {
      if (!w.is_array() || w.size() != 2) throw InputError("waypoints must be [x, y] pairs");
      t.waypoints.push_back({w[0].get<double>(), w[1].get<double>()});
    }
    if (j.contains("ego")) {
      const auto& e = j["ego"];
      t.ego = Pose2{e.at("x").get<double>(), e.at("y").get<double>(),
                    e.value("theta", 0.0)};
    }
    t.difficulty = j.value("difficulty", std::string());
    for (const char* group : {"vehicle", "lattice", "weights", "settings"}) {
      if (!j.contains(group)) continue;
      for (const auto& [k, v] : j[group].items()) apply_setting(t, k, scalar_text(v));
    }
    for (const char* key : {"L", "delta_s", "sample_ds"}) {
      if (j.contains(key)) apply_setting(t, key, scalar_text(j[key]));
    }
  } catch (const json::exception& e) {
    throw InputError("task: " + std::string(e.what()));
  }
  t.vehicle.validate();
  t.lattice.validate();
  t.weights.validate();
  t.settings.validate();
  if (t.L < 2) throw InputError("task '" + t.id + "': L must be at least 2");
  if (!(t.delta_s > 0 && t.sample_ds > 0)) {
    throw InputError("task '" + t.id + "': delta_s and sample_ds must be positive");
  }
  return t;
}

/// A single task object, an array of tasks, or {"tasks": [...]}.
inline std::vector<PlanTask> load_tasks(const fs::path& path,
                                        const std::optional<fs::path>& map_override = {}) {
  const json j = read_json(path);
  const json* arr = &j;
  json single;
  if (j.is_object() && j.contains("tasks")) {
    arr = &j["tasks"];
  } else if (j.is_object()) {
    single = json::array({j});
    arr = &single;
  }
  if (!arr->is_array()) throw InputError("'" + path.string() + "': expected task list");
  MapCache cache;
  std::vector<PlanTask> out;
  std::set<std::string> ids;
  for (const auto& tj : *arr) {
    out.push_back(task_from_json(tj, path.parent_path(), cache, map_override));
    if (!ids.insert(out.back().id).second) {
      throw InputError("duplicate task id '" + out.back().id + "'");
    }
  }
  if (out.empty()) throw InputError("'" + path.string() + "': empty batch");
  return out;
}

inline json task_to_json(const PlanTask& t, const std::string& map_ref) {
  json wps = json::array();
  for (const auto& p : t.waypoints) wps.push_back({p.x, p.y});
  json j = {{"id", t.id},
            {"map", map_ref},
            {"waypoints", wps},
            {"L", t.L},
            {"delta_s", t.delta_s},
            {"sample_ds", t.sample_ds}};
  if (!t.difficulty.empty()) j["difficulty"] = t.difficulty;
  if (t.ego) j["ego"] = {{"x", t.ego->x}, {"y", t.ego->y}, {"theta", t.ego->theta}};
  return j;
}

// ---------------------------------------------------------------------------
// QP interchange

inline json bound_array(const Vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(std::isinf(x) ? std::copysign(kInfBound, x) : x);
  return a;
}

inline Vector<double> read_vector(const json& a, const char* what, bool bounds) {
  if (!a.is_array()) throw InputError(std::string("qp manifest: ") + what + " must be an array");
  Vector<double> v;
  v.reserve(a.size());
  for (const auto& e : a) {
    if (!e.is_number()) throw InputError(std::string("qp manifest: ") + what + " has non-number");
    double x = e.get<double>();
    if (bounds && std::abs(x) >= kInfBound) x = std::copysign(HUGE_VAL, x);
    v.push_back(x);
  }
  return v;
}

/// Writes <dir>/qp.json, P.mtx (symmetric) and A.mtx (general).
inline fs::path save_qp(const QpProblem<double>& qp, const fs::path& dir) {
  fs::create_directories(dir);
  mm::write_file((dir / "P.mtx").string(), qp.P, mm::Symmetry::symmetric);
  mm::write_file((dir / "A.mtx").string(), qp.A, mm::Symmetry::general);
  json q = json::array();
  for (double x : qp.q) q.push_back(x);
  json j = {{"P", "P.mtx"}, {"A", "A.mtx"}, {"q", q},
            {"l", bound_array(qp.l)}, {"u", bound_array(qp.u)}};
  if (qp.layout) {
    j["layout"] = {{"mode", to_string(qp.layout->mode())}, {"L", qp.layout->points()}};
  }
  const auto path = dir / "qp.json";
  write_file(path, j.dump(1) + "\n");
  return path;
}

inline QpProblem<double> load_qp(const fs::path& manifest) {
  const json j = read_json(manifest);
  QpProblem<double> qp;
  try {
    const auto dir = manifest.parent_path();
    qp.P = mm::read_file((dir / j.at("P").get<std::string>()).string());
    qp.A = mm::read_file((dir / j.at("A").get<std::string>()).string());
    qp.q = read_vector(j.at("q"), "q", false);
    qp.l = read_vector(j.at("l"), "l", true);
    qp.u = read_vector(j.at("u"), "u", true);
    if (j.contains("layout")) {
      const auto mode = j["layout"].at("mode").get<std::string>();
      LayoutMode lm;
      if (mode == "interleaved") {
        lm = LayoutMode::interleaved;
      } else if (mode == "sequential") {
        lm = LayoutMode::sequential;
      } else {
        throw InputError("qp manifest: unknown layout '" + mode + "'");
      }
      DecisionLayout lay(lm, j["layout"].at("L").get<std::size_t>());
      if (lay.n() != qp.P.cols()) throw DimensionError("qp manifest: layout does not match n");
      qp.layout = lay;
      qp.a_pattern = constraint_descriptor(lay);
      (void)qp.patterned_A();  // throws DescriptorError if A does not fit
    }
  } catch (const json::exception& e) {
    throw InputError("qp manifest '" + manifest.string() + "': " + e.what());
  }
  qp.validate();
  return qp;
}

// ---------------------------------------------------------------------------
// Artifacts

inline std::string path_csv(const std::vector<PathSample>& path) {
  std::string out = "s,x,y,theta,kappa,l,phi,k\n";
  for (const auto& p : path) {
    out += fmt(p.s) + "," + fmt(p.x) + "," + fmt(p.y) + "," + fmt(p.theta) + "," +
           fmt(p.kappa) + "," + fmt(p.l) + "," + fmt(p.phi) + "," + fmt(p.k) + "\n";
  }
  return out;
}

inline std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::string out = "iter,r_prim,r_dual,pcg_iters,rho_bar\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iter) + "," + fmt(r.r_prim) + "," + fmt(r.r_dual) + "," +
           std::to_string(r.pcg_iters) + "," + fmt(r.rho_bar) + "\n";
  }
  return out;
}

inline json vector_json(const Vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

/// Solve statistics. `problem` is the QP that was solved.
inline json solve_stats(const SolveResult<double>& r, const QpProblem<double>& problem) {
  return {{"status", to_string(r.status)},
          {"admm_iters", r.admm_iters},
          {"pcg_iters", r.total_pcg_iters},
          {"k_builds", r.k_builds},
          {"r_prim", r.r_prim},
          {"r_dual", r.r_dual},
          {"objective", r.objective},
          {"rho_bar", r.rho_bar},
          {"problem",
           {{"n", problem.n()},
            {"m", problem.m()},
            {"nnz_P", problem.P.nnz()},
            {"nnz_A", problem.A.nnz()}}},
          {"timings", {{"setup_s", r.setup_time_s}, {"solve_s", r.solve_time_s}}}};
}

inline json plan_stats(const std::string& id, const PlanResult& r, const PlanCheck& c) {
  json j = solve_stats(r.solve, r.qp);
  j["id"] = id;
  j["timings"]["reference_s"] = r.times.reference;
  j["timings"]["processing_s"] = r.times.processing;
  j["timings"]["optimization_s"] = r.times.optimization;
  j["check"] = {{"collision_free", c.collision_free},
                {"max_abs_k", c.max_abs_k},
                {"k_max", c.k_max},
                {"corridor_violation_m", c.corridor_violation}};
  return j;
}

/// Map raster with the reference and the planned path, plus a curvature panel.
inline std::string plan_svg(const GridMap& map, const PlanResult& r, double k_max) {
  const double res = map.resolution();
  const double W = static_cast<double>(map.width()) * res;
  const double H = static_cast<double>(map.height()) * res;
  const double ox = map.origin().x, oy = map.origin().y;
  const double panel = 0.3 * H;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << fmt(W) << " "
    << fmt(H + panel) << "\" width=\"800\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << fmt(W) << "\" height=\"" << fmt(H + panel)
    << "\" fill=\"white\"/>\n";
  // Map: one rectangle per horizontal run of occupied cells; y points up.
  s << "<g fill=\"#444\">\n";
  for (std::size_t iy = 0; iy < map.height(); ++iy) {
    std::size_t ix = 0;
    while (ix < map.width()) {
      if (!map.cell_occupied(ix, iy)) {
        ++ix;
        continue;
      }
      const std::size_t start = ix;
      while (ix < map.width() && map.cell_occupied(ix, iy)) ++ix;
      s << "<rect x=\"" << fmt(static_cast<double>(start) * res) << "\" y=\""
        << fmt(H - static_cast<double>(iy + 1) * res) << "\" width=\""
        << fmt(static_cast<double>(ix - start) * res) << "\" height=\"" << fmt(res) << "\"/>\n";
    }
  }
  s << "</g>\n";
  auto poly = [&](const auto& pts, auto get, const char* color, double w) {
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << fmt(w)
      << "\" points=\"";
    for (const auto& p : pts) {
      const auto [x, y] = get(p);
      s << fmt(x) << "," << fmt(y) << " ";
    }
    s << "\"/>\n";
  };
  const double lw = std::max(0.1, 0.002 * W);
  poly(r.ref.points, [&](const CurvePoint& p) { return std::pair{p.x - ox, H - (p.y - oy)}; },
       "#1f77b4", lw);
  poly(r.path, [&](const PathSample& p) { return std::pair{p.x - ox, H - (p.y - oy)}; },
       "#d62728", lw);
  // Curvature panel: k against s, with the +-k_max limits.
  if (!r.path.empty()) {
    const double s_end = std::max(r.path.back().s - r.path.front().s, 1e-9);
    const double mid = H + 0.5 * panel;
    const double scale = 0.45 * panel / std::max(k_max, 1e-9);
    auto px = [&](double sv) { return (sv - r.path.front().s) / s_end * W; };
    s << "<line x1=\"0\" x2=\"" << fmt(W) << "\" y1=\"" << fmt(mid - k_max * scale)
      << "\" y2=\"" << fmt(mid - k_max * scale) << "\" stroke=\"#999\" stroke-width=\""
      << fmt(lw) << "\"/>\n";
    s << "<line x1=\"0\" x2=\"" << fmt(W) << "\" y1=\"" << fmt(mid + k_max * scale)
      << "\" y2=\"" << fmt(mid + k_max * scale) << "\" stroke=\"#999\" stroke-width=\""
      << fmt(lw) << "\"/>\n";
    poly(r.ref.points, [&](const CurvePoint& p) { return std::pair{px(p.s), mid - p.kappa * scale}; },
         "#1f77b4", lw);
    poly(r.path, [&](const PathSample& p) { return std::pair{px(p.s), mid - p.k * scale}; },
         "#d62728", lw);
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace pathqp::io
