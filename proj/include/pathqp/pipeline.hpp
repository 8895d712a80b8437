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

// Three-stage batch planner. In pipelined mode each stage owns one thread and
// stages talk through bounded FIFO queues; closing a queue is the end-of-stream
// signal. Sequential mode runs the same stage functions back to back.

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pathqp/errors.hpp"
#include "pathqp/planner.hpp"

namespace pathqp {

template <class T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw InputError("queue capacity must be at least 1");
  }

  /// Blocks while full. Returns false if the queue was closed.
  bool push(T item) {
    std::unique_lock<std::mutex> lk(mu_);
    not_full_.wait(lk, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(item));
    not_empty_.notify_one();
    return true;
  }

  /// Blocks while empty. Returns nullopt once closed and drained.
  std::optional<T> pop() {
    std::unique_lock<std::mutex> lk(mu_);
    not_empty_.wait(lk, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard<std::mutex> lk(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
  bool closed_ = false;
  std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
};

enum class PipelineMode { sequential, pipelined };

inline const char* to_string(PipelineMode m) {
  return m == PipelineMode::sequential ? "sequential" : "pipelined";
}

struct PipelineConfig {
  std::size_t queue_capacity = 4;
  PipelineMode mode = PipelineMode::pipelined;
  std::size_t warmup_tasks = 2;
};

enum class FailureKind { none, input, search, corridor, infeasible, numerical, internal };

inline const char* to_string(FailureKind k) {
  switch (k) {
    case FailureKind::none: return "none";
    case FailureKind::input: return "input";
    case FailureKind::search: return "search";
    case FailureKind::corridor: return "corridor";
    case FailureKind::infeasible: return "infeasible";
    case FailureKind::numerical: return "numerical";
    case FailureKind::internal: return "internal";
  }
  return "internal";
}

inline FailureKind classify(const std::exception& e) {
  if (dynamic_cast<const SearchFailure*>(&e)) return FailureKind::search;
  if (dynamic_cast<const InfeasibleCorridorError*>(&e)) return FailureKind::corridor;
  if (dynamic_cast<const InfeasibleBoundsError*>(&e)) return FailureKind::infeasible;
  if (dynamic_cast<const NumericalFailure*>(&e) || dynamic_cast<const PreconditionerError*>(&e)) {
    return FailureKind::numerical;
  }
  if (dynamic_cast<const Error*>(&e)) return FailureKind::input;
  return FailureKind::internal;
}

struct TaskOutcome {
  std::string id;
  std::optional<PlanResult> result;
  FailureKind failure = FailureKind::none;
  std::string error;
  StageTimes times;
  double completed_at_s = 0.0;  ///< since batch start

  bool ok() const { return failure == FailureKind::none; }
};

struct ThroughputReport {
  PipelineMode mode = PipelineMode::sequential;
  std::size_t tasks = 0;
  std::size_t completed = 0;
  std::size_t failed = 0;
  double wall_time_s = 0.0;
  double tasks_per_s = 0.0;  ///< over the tasks after the warm-up window
  std::size_t warmup_excluded = 0;
  StageTimes busy;  ///< summed per-stage busy time
};

struct BatchResult {
  std::vector<TaskOutcome> outcomes;
  ThroughputReport report;
};

namespace detail {

struct Payload {
  std::size_t index = 0;
  TaskOutcome outcome;
  std::optional<ReferenceStage> reference;
  std::optional<ProcessingStage> processing;
};

template <class F>
void run_stage(Payload& p, double& slot, F&& body) {
  if (!p.outcome.ok()) return;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body();
  } catch (const std::exception& e) {
    p.outcome.failure = classify(e);
    p.outcome.error = e.what();
  }
  slot = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void stage_reference(const PlanTask& task, Payload& p) {
  run_stage(p, p.outcome.times.reference, [&] { p.reference = run_reference_stage(task); });
}

inline void stage_processing(const PlanTask& task, Payload& p) {
  run_stage(p, p.outcome.times.processing,
            [&] { p.processing = run_processing_stage(task, *p.reference); });
}

inline void stage_optimization(const PlanTask& task, Payload& p) {
  run_stage(p, p.outcome.times.optimization, [&] {
    p.outcome.result =
        run_optimization_stage(task, std::move(*p.reference), std::move(*p.processing));
    p.reference.reset();
    p.processing.reset();
  });
  if (p.outcome.result) p.outcome.result->times = p.outcome.times;
}

inline ThroughputReport summarize(const std::vector<TaskOutcome>& out, PipelineMode mode,
                                  double wall, std::size_t warmup) {
  ThroughputReport r;
  r.mode = mode;
  r.tasks = out.size();
  r.wall_time_s = wall;
  for (const auto& o : out) {
    (o.ok() ? r.completed : r.failed) += 1;
    r.busy.reference += o.times.reference;
    r.busy.processing += o.times.processing;
    r.busy.optimization += o.times.optimization;
  }
  if (out.size() > warmup && warmup > 0) {
    const double span = out.back().completed_at_s - out[warmup - 1].completed_at_s;
    r.warmup_excluded = warmup;
    r.tasks_per_s = span > 0 ? static_cast<double>(out.size() - warmup) / span : 0.0;
  } else {
    r.tasks_per_s = wall > 0 ? static_cast<double>(out.size()) / wall : 0.0;
  }
  return r;
}

}  // namespace detail

/// Plans every task. Outcomes come back in submission order; a failing task
/// is reported and the rest of the batch continues.
inline BatchResult run_batch(const std::vector<PlanTask>& tasks, const PipelineConfig& cfg = {}) {
  using clock = std::chrono::steady_clock;
  if (tasks.empty()) throw InputError("run_batch: empty batch");
  if (cfg.queue_capacity == 0) throw InputError("queue capacity must be at least 1");
  BatchResult res;
  res.outcomes.resize(tasks.size());
  const auto t0 = clock::now();
  auto stamp = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };
  auto start = [&](std::size_t i) {
    detail::Payload p;
    p.index = i;
    p.outcome.id = tasks[i].id;
    return p;
  };

  if (cfg.mode == PipelineMode::sequential) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      auto p = start(i);
      detail::stage_reference(tasks[i], p);
      detail::stage_processing(tasks[i], p);
      detail::stage_optimization(tasks[i], p);
      p.outcome.completed_at_s = stamp();
      res.outcomes[i] = std::move(p.outcome);
    }
  } else {
    BoundedQueue<detail::Payload> q1(cfg.queue_capacity), q2(cfg.queue_capacity);
    std::exception_ptr fatal;
    std::mutex fatal_mu;
    auto guard = [&](auto&& body) {
      try {
        body();
      } catch (...) {
        std::lock_guard<std::mutex> lk(fatal_mu);
        if (!fatal) fatal = std::current_exception();
        q1.close();
        q2.close();
      }
    };
    std::thread s1([&] {
      guard([&] {
        for (std::size_t i = 0; i < tasks.size(); ++i) {
          auto p = start(i);
          detail::stage_reference(tasks[i], p);
          if (!q1.push(std::move(p))) break;
        }
      });
      q1.close();
    });
    std::thread s2([&] {
      guard([&] {
        while (auto p = q1.pop()) {
          detail::stage_processing(tasks[p->index], *p);
          if (!q2.push(std::move(*p))) break;
        }
      });
      q2.close();
    });
    guard([&] {
      while (auto p = q2.pop()) {
        detail::stage_optimization(tasks[p->index], *p);
        p->outcome.completed_at_s = stamp();
        res.outcomes[p->index] = std::move(p->outcome);
      }
    });
    s1.join();
    s2.join();
    if (fatal) std::rethrow_exception(fatal);
  }
  res.report = detail::summarize(res.outcomes, cfg.mode, stamp(), cfg.warmup_tasks);
  return res;
}

struct ModeComparison {
  ThroughputReport sequential;
  ThroughputReport pipelined;
  double speedup = 0.0;  ///< pipelined rate / sequential rate
  bool identical = false;  ///< solution vectors bitwise equal between modes
};

inline bool same_solutions(const BatchResult& a, const BatchResult& b) {
  if (a.outcomes.size() != b.outcomes.size()) return false;
  for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
    const auto& x = a.outcomes[i];
    const auto& y = b.outcomes[i];
    if (x.id != y.id || x.failure != y.failure) return false;
    if (x.result.has_value() != y.result.has_value()) return false;
    if (x.result && (x.result->solve.x != y.result->solve.x ||
                     x.result->solve.y != y.result->solve.y ||
                     x.result->solve.z != y.result->solve.z)) {
      return false;
    }
  }
  return true;
}

inline ModeComparison compare_modes(const std::vector<PlanTask>& tasks,
                                    std::size_t queue_capacity = 4) {
  PipelineConfig cfg;
  cfg.queue_capacity = queue_capacity;
  cfg.mode = PipelineMode::sequential;
  const auto seq = run_batch(tasks, cfg);
  cfg.mode = PipelineMode::pipelined;
  const auto pipe = run_batch(tasks, cfg);
  ModeComparison c;
  c.sequential = seq.report;
  c.pipelined = pipe.report;
  c.speedup = seq.report.tasks_per_s > 0 ? pipe.report.tasks_per_s / seq.report.tasks_per_s : 0.0;
  c.identical = same_solutions(seq, pipe);
  return c;
}

struct StageProfile {
  double reference = 0.0;  ///< fraction of total time
  double processing = 0.0;
  double optimization = 0.0;
  StageTimes mean_latency;  ///< seconds per task
  std::size_t tasks = 0;
};

/// Per-stage time fractions over a sequential run of the batch.
inline StageProfile stage_profile(const std::vector<PlanTask>& tasks) {
  PipelineConfig cfg;
  cfg.mode = PipelineMode::sequential;
  const auto res = run_batch(tasks, cfg);
  StageProfile p;
  p.tasks = tasks.size();
  const auto& b = res.report.busy;
  const double total = b.total();
  if (total > 0) {
    p.reference = b.reference / total;
    p.processing = b.processing / total;
    p.optimization = 1.0 - p.reference - p.processing;
  } else {
    p.reference = p.processing = p.optimization = 1.0 / 3.0;
  }
  const double n = static_cast<double>(tasks.size());
  p.mean_latency = {b.reference / n, b.processing / n, b.optimization / n};
  return p;
}

}  // namespace pathqp
