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

// pathqp command-line driver.
//
// Exit codes: 0 solved, 1 input error or infeasible task, 2 iteration limit,
// 3 internal error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pathqp.hpp"
#include "pathqp/io.hpp"

namespace fs = std::filesystem;
using pathqp::io::json;

namespace {

constexpr int kExitSolved = 0;
constexpr int kExitInput = 1;
constexpr int kExitMaxIter = 2;
constexpr int kExitInternal = 3;

struct Common {
  std::vector<std::string> settings;
  std::string fusion;  // "", "on", "off"
  std::size_t parallel_factor = 0;
  bool trace = false;

  void apply(pathqp::AdmmSettings& s) const {
    pathqp::io::apply_settings(s, settings);
    if (!fusion.empty()) s.fusion = pathqp::io::parse_bool("fusion", fusion);
    if (parallel_factor) s.parallel_factor = parallel_factor;
    if (trace) s.trace = true;
    s.validate();
  }
  void apply(pathqp::PlanTask& t) const {
    pathqp::io::apply_settings(t, settings);
    apply(t.settings);
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--settings", c.settings, "key=value overrides")->expected(1, -1);
  cmd->add_option("--fusion", c.fusion, "operator fusion")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--parallel-factor", c.parallel_factor, "dot-product lanes")
      ->check(CLI::Range(1, 16));
  cmd->add_flag("--trace", c.trace, "write per-iteration residuals");
}

pathqp::PipelineMode parse_mode(const std::string& m) {
  return m == "pipe" ? pathqp::PipelineMode::pipelined : pathqp::PipelineMode::sequential;
}

int exit_code(pathqp::SolveStatus s) {
  switch (s) {
    case pathqp::SolveStatus::solved: return kExitSolved;
    case pathqp::SolveStatus::max_iter: return kExitMaxIter;
    case pathqp::SolveStatus::infeasible_bounds: return kExitInput;
  }
  return kExitInternal;
}

int exit_code(pathqp::FailureKind k) {
  using pathqp::FailureKind;
  return k == FailureKind::internal || k == FailureKind::numerical ? kExitInternal : kExitInput;
}

/// Worst of two codes: internal, then input, then iteration limit.
int worse(int a, int b) {
  auto rank = [](int c) { return c == kExitInternal ? 3 : c == kExitInput ? 2 : c; };
  return rank(a) >= rank(b) ? a : b;
}

// ---------------------------------------------------------------------------

struct PlanArgs {
  std::string task, map, out = "out", mode = "seq";
  bool svg = true;
  std::size_t capacity = 4;
  Common common;
};

int cmd_plan(const PlanArgs& a) {
  std::optional<fs::path> map_override;
  if (!a.map.empty()) map_override = a.map;
  auto tasks = pathqp::io::load_tasks(a.task, map_override);
  for (auto& t : tasks) a.common.apply(t);
  pathqp::PipelineConfig cfg;
  cfg.mode = parse_mode(a.mode);
  cfg.queue_capacity = a.capacity;
  const auto batch = pathqp::run_batch(tasks, cfg);

  int code = kExitSolved;
  json summary = json::array();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& o = batch.outcomes[i];
    if (!o.ok()) {
      std::cerr << "task " << o.id << ": " << to_string(o.failure) << " failure: " << o.error
                << "\n";
      summary.push_back({{"id", o.id}, {"failure", to_string(o.failure)}, {"error", o.error}});
      code = worse(code, exit_code(o.failure));
      continue;
    }
    const auto& r = *o.result;
    const auto dir = fs::path(a.out) / (tasks.size() == 1 ? fs::path() : fs::path(o.id));
    const auto chk = pathqp::check_plan(r, *tasks[i].map, tasks[i].vehicle);
    const auto stats = pathqp::io::plan_stats(o.id, r, chk);
    pathqp::io::write_file(dir / "path.csv", pathqp::io::path_csv(r.path));
    pathqp::io::write_file(dir / "stats.json", stats.dump(2) + "\n");
    if (a.svg) {
      pathqp::io::write_file(dir / "plot.svg",
                             pathqp::io::plan_svg(*tasks[i].map, r, tasks[i].vehicle.k_max()));
    }
    if (tasks[i].settings.trace) {
      pathqp::io::write_file(dir / "trace.csv", pathqp::io::trace_csv(r.solve.trace));
    }
    if (r.solve.status != pathqp::SolveStatus::solved) {
      std::cerr << "task " << o.id << ": " << to_string(r.solve.status) << "\n";
    }
    summary.push_back({{"id", o.id}, {"status", to_string(r.solve.status)}});
    code = worse(code, exit_code(r.solve.status));
  }
  if (tasks.size() > 1) {
    pathqp::io::write_file(fs::path(a.out) / "summary.json", summary.dump(2) + "\n");
  }
  std::cout << summary.dump() << "\n";
  return code;
}

struct SolveArgs {
  std::string problem, out = "out";
  Common common;
};

int cmd_solve_qp(const SolveArgs& a) {
  const auto qp = pathqp::io::load_qp(a.problem);
  pathqp::AdmmSettings s;
  a.common.apply(s);
  const auto r = pathqp::admm_solve(qp, s);
  const fs::path dir = a.out;
  auto stats = pathqp::io::solve_stats(r, qp);
  pathqp::io::write_file(dir / "stats.json", stats.dump(2) + "\n");
  const json sol = {{"x", pathqp::io::vector_json(r.x)},
                    {"y", pathqp::io::vector_json(r.y)},
                    {"z", pathqp::io::vector_json(r.z)}};
  pathqp::io::write_file(dir / "solution.json", sol.dump() + "\n");
  if (s.trace) pathqp::io::write_file(dir / "trace.csv", pathqp::io::trace_csv(r.trace));
  std::cout << stats.dump() << "\n";
  if (r.status != pathqp::SolveStatus::solved) {
    std::cerr << "solve-qp: " << to_string(r.status) << "\n";
  }
  return exit_code(r.status);
}

struct BatchSource {
  std::string task;
  std::size_t synthetic = 20;
  std::uint64_t seed = 7;

  std::vector<pathqp::PlanTask> load() const {
    if (!task.empty()) return pathqp::io::load_tasks(task);
    pathqp::SyntheticTaskOptions opt;
    opt.count = synthetic;
    opt.seed = seed;
    std::vector<pathqp::PlanTask> out;
    for (auto& st : pathqp::generate_synthetic_tasks(opt)) out.push_back(std::move(st.task));
    return out;
  }
};

void add_batch_source(CLI::App* cmd, BatchSource& b) {
  cmd->add_option("--task", b.task, "batch file (default: synthetic tasks)");
  cmd->add_option("--synthetic", b.synthetic, "number of synthetic tasks")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", b.seed, "synthetic task seed");
}

struct BenchArgs {
  BatchSource src;
  std::string out = "bench.json";
  std::size_t jobs = 1;
  Common common;
};

json cell_json(const pathqp::BenchCell& c) {
  return {{"parallel_factor", c.parallel_factor},
          {"fusion", c.fusion},
          {"eq_multiplier", c.eq_multiplier},
          {"mode", c.mode == pathqp::PipelineMode::sequential ? "seq" : "pipe"},
          {"tasks", c.tasks},
          {"solved", c.solved},
          {"total_pcg_iters", c.total_pcg_iters},
          {"total_admm_iters", c.total_admm_iters},
          {"mean_latency_s", c.mean_latency_s},
          {"mean_solve_s", c.mean_solve_s},
          {"wall_time_s", c.wall_time_s},
          {"tasks_per_s", c.tasks_per_s}};
}

/// For each axis: mean per-task solve time at each setting, averaged over
/// the other axes. Reported, not judged.
json orderings(const std::vector<pathqp::BenchCell>& cells) {
  using pathqp::BenchCell;
  auto solve = [](const BenchCell& c) { return c.mean_solve_s; };
  auto entry = [&](const char* axis, const char* a, auto pa, const char* b, auto pb) {
    const double ta = pathqp::cell_mean(cells, pa, solve);
    const double tb = pathqp::cell_mean(cells, pb, solve);
    return json{{"axis", axis},
                {"baseline", a},
                {"variant", b},
                {"baseline_mean_solve_s", ta},
                {"variant_mean_solve_s", tb},
                {"relative_change", ta > 0 ? (tb - ta) / ta : 0.0},
                {"faster", tb < ta ? b : a}};
  };
  json out = json::array();
  out.push_back(entry("parallel_factor", "6", [](const BenchCell& c) { return c.parallel_factor == 6; },
                      "12", [](const BenchCell& c) { return c.parallel_factor == 12; }));
  out.push_back(entry("fusion", "off", [](const BenchCell& c) { return !c.fusion; }, "on",
                      [](const BenchCell& c) { return c.fusion; }));
  out.push_back(entry("eq_multiplier", "1", [](const BenchCell& c) { return c.eq_multiplier == 1.0; },
                      "5", [](const BenchCell& c) { return c.eq_multiplier == 5.0; }));
  const double seq = pathqp::cell_mean(
      cells, [](const BenchCell& c) { return c.mode == pathqp::PipelineMode::sequential; },
      [](const BenchCell& c) { return c.tasks_per_s; });
  const double pipe = pathqp::cell_mean(
      cells, [](const BenchCell& c) { return c.mode == pathqp::PipelineMode::pipelined; },
      [](const BenchCell& c) { return c.tasks_per_s; });
  out.push_back({{"axis", "mode"},
                 {"baseline", "seq"},
                 {"variant", "pipe"},
                 {"baseline_tasks_per_s", seq},
                 {"variant_tasks_per_s", pipe},
                 {"speedup", seq > 0 ? pipe / seq : 0.0}});
  return out;
}

int cmd_bench(const BenchArgs& a) {
  auto tasks = a.src.load();
  for (auto& t : tasks) a.common.apply(t);
  pathqp::BenchGrid grid;
  grid.jobs = a.jobs;
  const auto cells = pathqp::run_bench(tasks, grid);

  // Fusion must not change results: compare cells that differ only in it.
  bool fusion_identical = true;
  for (const auto& c : cells) {
    if (c.fusion) continue;
    for (const auto& d : cells) {
      if (d.fusion && d.parallel_factor == c.parallel_factor &&
          d.eq_multiplier == c.eq_multiplier && d.mode == c.mode) {
        fusion_identical = fusion_identical && pathqp::same_solutions(c.batch, d.batch);
      }
    }
  }
  json jc = json::array();
  bool all_solved = true;
  for (const auto& c : cells) {
    jc.push_back(cell_json(c));
    all_solved = all_solved && c.solved == c.tasks;
  }
  const json report = {{"tasks", tasks.size()},
                       {"jobs", a.jobs},
                       {"hardware_threads", std::thread::hardware_concurrency()},
                       {"cells", jc},
                       {"all_solved", all_solved},
                       {"fusion_identical", fusion_identical},
                       {"orderings", orderings(cells)}};
  pathqp::io::write_file(a.out, report.dump(2) + "\n");
  std::cout << report["orderings"].dump(2) << "\n";
  return all_solved ? kExitSolved : kExitMaxIter;
}

struct SweepArgs {
  BatchSource src;
  bool canonical = false;
  std::size_t L = 270;
  std::vector<double> multipliers{1, 2, 5, 10, 20};
  std::string out = "sweep.csv";
  Common common;
};

int cmd_sweep_rho(const SweepArgs& a) {
  pathqp::AdmmSettings s;
  std::vector<pathqp::QpProblem<double>> problems;
  if (a.canonical) {
    problems = pathqp::canonical_problems(a.L);
  } else {
    auto tasks = a.src.load();
    for (auto& t : tasks) a.common.apply(t);
    problems = pathqp::task_problems(tasks);
    s = tasks.front().settings;
  }
  a.common.apply(s);
  const auto rows = pathqp::sweep_rho(problems, a.multipliers, s);
  std::string csv = "eq_multiplier,total_pcg_iters,total_admm_iters,solved,problems\n";
  for (const auto& r : rows) {
    csv += pathqp::io::fmt(r.multiplier) + "," + std::to_string(r.total_pcg_iters) + "," +
           std::to_string(r.total_admm_iters) + "," + std::to_string(r.solved) + "," +
           std::to_string(r.problems) + "\n";
  }
  pathqp::io::write_file(a.out, csv);
  std::cout << csv;
  if (const auto best = pathqp::interior_minimizer(rows)) {
    std::cout << "interior minimum at eq_multiplier " << rows[*best].multiplier << "\n";
  } else {
    std::cout << "no interior minimum\n";
  }
  return kExitSolved;
}

struct GenMapArgs {
  std::string spec, out = "maps", name = "map";
  std::size_t width = 200, height = 200;
  double resolution = 0.2, density = 0.1;
  std::optional<std::uint64_t> seed;
};

int cmd_gen_map(const GenMapArgs& a) {
  pathqp::SyntheticMapSpec spec;
  if (!a.spec.empty()) {
    spec = pathqp::io::map_spec_from_json(pathqp::io::read_json(a.spec));
    if (a.seed) spec.seed = a.seed;
  } else {
    spec.width_px = a.width;
    spec.height_px = a.height;
    spec.resolution = a.resolution;
    spec.seed = a.seed.value_or(1);
    spec.density = a.density;
  }
  const auto map = pathqp::gen_synthetic(spec);
  const auto manifest = pathqp::io::save_map(map, a.out, a.name);
  std::cout << manifest.string() << "\n";
  return kExitSolved;
}

struct CanonicalArgs {
  std::size_t L = 270;
  std::string layout = "interleaved", out = "qp";
};

int cmd_canonical_qp(const CanonicalArgs& a) {
  const auto mode = a.layout == "sequential" ? pathqp::LayoutMode::sequential
                                             : pathqp::LayoutMode::interleaved;
  const auto qp = pathqp::make_canonical_problem(a.L, mode);
  std::cout << pathqp::io::save_qp(qp, a.out).string() << "\n";
  return kExitSolved;
}

struct GenTasksArgs {
  std::size_t count = 20;
  std::uint64_t seed = 7;
  std::string out = "tasks";
};

int cmd_gen_tasks(const GenTasksArgs& a) {
  pathqp::SyntheticTaskOptions opt;
  opt.count = a.count;
  opt.seed = a.seed;
  const auto tasks = pathqp::generate_synthetic_tasks(opt);
  const fs::path dir = a.out;
  json batch = json::array();
  for (const auto& st : tasks) {
    pathqp::io::save_map(*st.task.map, dir / "maps", st.task.id);
    batch.push_back(pathqp::io::task_to_json(st.task, "maps/" + st.task.id + ".json"));
  }
  pathqp::io::write_file(dir / "batch.json", batch.dump(2) + "\n");
  std::cout << (dir / "batch.json").string() << "\n";
  return kExitSolved;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured-QP path planner"};
  app.require_subcommand(1);

  PlanArgs plan;
  auto* c_plan = app.add_subcommand("plan", "plan one task or a batch");
  c_plan->add_option("--task", plan.task, "task or batch file")->required();
  c_plan->add_option("--map", plan.map, "map manifest, overrides the task's map");
  c_plan->add_option("--out", plan.out, "output directory");
  c_plan->add_option("--mode", plan.mode, "batch execution")->check(CLI::IsMember({"seq", "pipe"}));
  c_plan->add_option("--queue-capacity", plan.capacity)->check(CLI::PositiveNumber);
  c_plan->add_flag("!--no-svg", plan.svg, "skip the SVG plot");
  add_common(c_plan, plan.common);

  SolveArgs solve;
  auto* c_solve = app.add_subcommand("solve-qp", "solve a QP from interchange files");
  c_solve->add_option("problem", solve.problem, "QP manifest (JSON)")->required();
  c_solve->add_option("--out", solve.out, "output directory");
  add_common(c_solve, solve.common);

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "ablation grid");
  add_batch_source(c_bench, bench.src);
  c_bench->add_option("--out", bench.out, "report file (JSON)");
  c_bench->add_option("--jobs", bench.jobs, "grid cells run concurrently")
      ->check(CLI::PositiveNumber);
  add_common(c_bench, bench.common);

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep-rho", "total PCG iterations per eq_multiplier");
  add_batch_source(c_sweep, sweep.src);
  c_sweep->add_flag("--canonical", sweep.canonical, "use the canonical QP batch");
  c_sweep->add_option("--L", sweep.L, "points per canonical problem")->check(CLI::Range(2, 100000));
  c_sweep->add_option("--multipliers", sweep.multipliers)->expected(2, -1);
  c_sweep->add_option("--out", sweep.out, "CSV file");
  add_common(c_sweep, sweep.common);

  GenMapArgs gm;
  auto* c_map = app.add_subcommand("gen-map", "synthetic occupancy map");
  c_map->add_option("--spec", gm.spec, "map spec (JSON)");
  c_map->add_option("--out", gm.out, "output directory");
  c_map->add_option("--name", gm.name, "file stem");
  c_map->add_option("--width", gm.width)->check(CLI::PositiveNumber);
  c_map->add_option("--height", gm.height)->check(CLI::PositiveNumber);
  c_map->add_option("--resolution", gm.resolution)->check(CLI::PositiveNumber);
  c_map->add_option("--density", gm.density)->check(CLI::Range(0.0, 0.95));
  c_map->add_option("--seed", gm.seed);

  CanonicalArgs can;
  auto* c_can = app.add_subcommand("canonical-qp", "write the canonical planning QP");
  c_can->add_option("--L", can.L)->check(CLI::Range(2, 100000));
  c_can->add_option("--layout", can.layout)
      ->check(CLI::IsMember({"interleaved", "sequential"}));
  c_can->add_option("--out", can.out, "output directory");

  GenTasksArgs gt;
  auto* c_tasks = app.add_subcommand("gen-tasks", "synthetic planning batch");
  c_tasks->add_option("--count", gt.count)->check(CLI::PositiveNumber);
  c_tasks->add_option("--seed", gt.seed);
  c_tasks->add_option("--out", gt.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    if (*c_plan) return cmd_plan(plan);
    if (*c_solve) return cmd_solve_qp(solve);
    if (*c_bench) return cmd_bench(bench);
    if (*c_sweep) return cmd_sweep_rho(sweep);
    if (*c_map) return cmd_gen_map(gm);
    if (*c_can) return cmd_canonical_qp(can);
    if (*c_tasks) return cmd_gen_tasks(gt);
  } catch (const pathqp::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitInternal;
  } catch (const pathqp::PreconditionerError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitInternal;
  } catch (const pathqp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
