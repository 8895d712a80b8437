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

// Measurement drivers: the equality-multiplier sweep and the ablation grid.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pathqp/admm.hpp"
#include "pathqp/errors.hpp"
#include "pathqp/pipeline.hpp"
#include "pathqp/planner.hpp"
#include "pathqp/qp_build.hpp"

namespace pathqp {

struct SweepRow {
  double multiplier = 0.0;
  std::size_t total_pcg_iters = 0;
  std::size_t total_admm_iters = 0;
  std::size_t solved = 0;
  std::size_t problems = 0;
};

/// Solves every problem once per multiplier, all else equal.
inline std::vector<SweepRow> sweep_rho(const std::vector<QpProblem<double>>& problems,
                                       const std::vector<double>& multipliers,
                                       const AdmmSettings& base = {}) {
  if (problems.empty()) throw InputError("sweep: empty batch");
  if (multipliers.size() < 2) throw InputError("sweep: need at least two multipliers");
  std::vector<SweepRow> rows;
  for (double mult : multipliers) {
    AdmmSettings s = base;
    s.eq_multiplier = mult;
    s.trace = false;
    SweepRow row;
    row.multiplier = mult;
    row.problems = problems.size();
    for (const auto& qp : problems) {
      const auto r = admm_solve(qp, s);
      row.total_pcg_iters += r.total_pcg_iters;
      row.total_admm_iters += r.admm_iters;
      row.solved += r.status == SolveStatus::solved;
    }
    rows.push_back(row);
  }
  return rows;
}

/// Planning QPs of a task batch (stages 1 and 2 only).
inline std::vector<QpProblem<double>> task_problems(const std::vector<PlanTask>& tasks) {
  std::vector<QpProblem<double>> out;
  out.reserve(tasks.size());
  for (const auto& t : tasks) out.push_back(run_processing_stage(t, run_reference_stage(t)).qp);
  return out;
}

inline std::vector<QpProblem<double>> canonical_problems(std::size_t L = 270) {
  std::vector<QpProblem<double>> out;
  for (const auto& spec : canonical_batch(L)) out.push_back(make_canonical_problem(spec));
  return out;
}

/// Index of the smallest total; set only when it is strictly below both
/// end points.
inline std::optional<std::size_t> interior_minimizer(const std::vector<SweepRow>& rows) {
  if (rows.size() < 3) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].total_pcg_iters < rows[best].total_pcg_iters) best = i;
  }
  if (best == 0 || best + 1 == rows.size()) return std::nullopt;
  return best;
}

// ---------------------------------------------------------------------------
// Ablation grid

struct BenchCell {
  std::size_t parallel_factor = 12;
  bool fusion = true;
  double eq_multiplier = 5.0;
  PipelineMode mode = PipelineMode::sequential;

  std::size_t tasks = 0;
  std::size_t solved = 0;
  std::size_t total_pcg_iters = 0;
  std::size_t total_admm_iters = 0;
  double mean_latency_s = 0.0;       ///< per-task plan latency
  double mean_solve_s = 0.0;         ///< per-task optimization stage
  double wall_time_s = 0.0;
  double tasks_per_s = 0.0;
  BatchResult batch;
};

struct BenchGrid {
  std::vector<std::size_t> parallel_factors{6, 12};
  std::vector<bool> fusion{false, true};
  std::vector<double> eq_multipliers{1.0, 5.0};
  std::vector<PipelineMode> modes{PipelineMode::sequential, PipelineMode::pipelined};
  std::size_t queue_capacity = 4;
  std::size_t jobs = 1;  ///< cells run concurrently
};

inline void run_cell(const std::vector<PlanTask>& tasks, BenchCell& cell, std::size_t capacity) {
  std::vector<PlanTask> local = tasks;
  for (auto& t : local) {
    t.settings.parallel_factor = cell.parallel_factor;
    t.settings.fusion = cell.fusion;
    t.settings.eq_multiplier = cell.eq_multiplier;
    t.settings.trace = false;
  }
  PipelineConfig cfg;
  cfg.mode = cell.mode;
  cfg.queue_capacity = capacity;
  cell.batch = run_batch(local, cfg);
  cell.tasks = local.size();
  double lat = 0.0, opt = 0.0;
  for (const auto& o : cell.batch.outcomes) {
    lat += o.times.total();
    opt += o.times.optimization;
    if (o.ok()) {
      cell.solved += o.result->solve.status == SolveStatus::solved;
      cell.total_pcg_iters += o.result->solve.total_pcg_iters;
      cell.total_admm_iters += o.result->solve.admm_iters;
    }
  }
  const double n = static_cast<double>(local.size());
  cell.mean_latency_s = lat / n;
  cell.mean_solve_s = opt / n;
  cell.wall_time_s = cell.batch.report.wall_time_s;
  cell.tasks_per_s = cell.batch.report.tasks_per_s;
}

inline std::vector<BenchCell> run_bench(const std::vector<PlanTask>& tasks,
                                        const BenchGrid& grid = {}) {
  if (tasks.empty()) throw InputError("bench: empty batch");
  std::vector<BenchCell> cells;
  for (auto pf : grid.parallel_factors) {
    for (bool fu : grid.fusion) {
      for (double em : grid.eq_multipliers) {
        for (auto mode : grid.modes) {
          BenchCell c;
          c.parallel_factor = pf;
          c.fusion = fu;
          c.eq_multiplier = em;
          c.mode = mode;
          cells.push_back(std::move(c));
        }
      }
    }
  }
  const std::size_t jobs = std::max<std::size_t>(1, std::min(grid.jobs, cells.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) {
      try {
        run_cell(tasks, cells[i], grid.queue_capacity);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return cells;
}

/// Mean of `metric` over cells where `pick` holds.
template <class Pick, class Metric>
double cell_mean(const std::vector<BenchCell>& cells, Pick pick, Metric metric) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& c : cells) {
    if (!pick(c)) continue;
    acc += metric(c);
    ++n;
  }
  return n ? acc / static_cast<double>(n) : 0.0;
}

}  // namespace pathqp
