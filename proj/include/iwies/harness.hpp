// Copyright 2026 The iwies Authors.
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

#pragma once

// Experiment orchestration: repeated environment changes with paired seeds,
// per-generation CSV, summaries and the worker-count timing sweep.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "iwies/checkpoint.hpp"
#include "iwies/environments.hpp"
#include "iwies/errors.hpp"
#include "iwies/es_engine.hpp"
#include "iwies/stats.hpp"
#include "iwies/text.hpp"

namespace iwies {

inline std::string_view task_kind_name(TaskVariant v) {
  switch (v) {
    case TaskVariant::GoalNav: return "case1";
    case TaskVariant::ObstacleNav: return "case2";
    case TaskVariant::PuddleNav: return "puddle";
  }
  return "?";
}

inline TaskVariant parse_task_kind(std::string_view s) {
  if (s == "case1") return TaskVariant::GoalNav;
  if (s == "case2") return TaskVariant::ObstacleNav;
  if (s == "puddle") return TaskVariant::PuddleNav;
  throw config_error("unknown task '" + std::string(s) + "' (expected case1, case2 or puddle)");
}

/// Generation budget per phase when none is configured.
inline std::size_t default_generations(TaskVariant v) {
  switch (v) {
    case TaskVariant::GoalNav: return 200;
    case TaskVariant::ObstacleNav: return 1000;
    case TaskVariant::PuddleNav: return 500;
  }
  return 200;
}

struct ExperimentConfig {
  TaskVariant task_kind = TaskVariant::GoalNav;
  std::size_t phases = 2;
  std::size_t generations_per_phase = 0;  // 0: default for the task
  std::size_t phase1_generations = 0;     // 0: same as generations_per_phase
  std::size_t runs = 10;
  std::size_t trials = 1;
  std::vector<Method> methods = {Method::FS, Method::CA, Method::IwiesN, Method::IwiesQu,
                                 Method::IwiesMix};
  EsConfig es = default_es_config();
  std::uint64_t seed = 0;
  Rect goal_region_phase1 = kArena;
  Rect goal_region_phase2 = kArena;
  int horizon = 100;
  double goal_tolerance = 0.01;
  double control_cost = 0.05;
  std::filesystem::path output_dir = "iwies-out";

  static EsConfig default_es_config() {
    EsConfig es;
    es.shaping = FitnessShaping::CenteredRank;
    es.alpha = 0.002;
    es.bias_scale = 0.1;
    es.weighting.rho0 = 0.1;
    return es;
  }

  std::size_t adapt_generations() const {
    return generations_per_phase ? generations_per_phase : default_generations(task_kind);
  }
  std::size_t first_generations() const {
    return phase1_generations ? phase1_generations : adapt_generations();
  }

  TaskSpec base_task() const {
    TaskSpec t = iwies::base_task(task_kind);
    t.horizon = horizon;
    t.goal_tolerance = goal_tolerance;
    t.control_cost_coeff = control_cost;
    return t;
  }

  void validate() const {
    if (runs == 0) throw config_error("runs must be >= 1");
    if (trials == 0) throw config_error("trials must be >= 1");
    if (phases == 0) throw config_error("phases must be >= 1");
    if (methods.empty()) throw config_error("methods must not be empty");
    if (!goal_region_phase1.valid() || !kArena.contains(goal_region_phase1) ||
        !goal_region_phase2.valid() || !kArena.contains(goal_region_phase2))
      throw config_error("regions must be valid sub-rectangles of [-0.5, 0.5]^2");
    es.validate();
  }
};

// ---------------------------------------------------------------------------
// Config file: "key = value" lines, '#' comments, dotted keys.

inline Rect parse_rect(std::string_view s) {
  const auto f = text::split(s, ',');
  if (f.size() != 4) throw config_error("region must be x_min,x_max,y_min,y_max");
  double v[4];
  for (int i = 0; i < 4; ++i) {
    auto d = text::parse_double(text::trim(f[i]));
    if (!d) throw config_error("bad region bound '" + std::string(f[i]) + "'");
    v[i] = *d;
  }
  return {v[0], v[1], v[2], v[3]};
}

inline void apply_config_value(ExperimentConfig& c, std::string_view key, std::string_view value) {
  auto num = [&]() {
    auto d = text::parse_double(value);
    if (!d) throw config_error("key '" + std::string(key) + "': expected a number");
    return *d;
  };
  auto count = [&]() {
    auto n = text::parse_int<std::uint64_t>(value);
    if (!n) throw config_error("key '" + std::string(key) + "': expected a nonnegative integer");
    return *n;
  };
  auto flag = [&]() {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw config_error("key '" + std::string(key) + "': expected true or false");
  };

  if (key == "task") c.task_kind = parse_task_kind(value);
  else if (key == "phases") c.phases = count();
  else if (key == "generations") c.generations_per_phase = count();
  else if (key == "phase1_generations") c.phase1_generations = count();
  else if (key == "runs") c.runs = count();
  else if (key == "trials") c.trials = count();
  else if (key == "seed") c.seed = count();
  else if (key == "output_dir") c.output_dir = std::string(value);
  else if (key == "methods") {
    c.methods.clear();
    for (auto m : text::split(value, ',')) c.methods.push_back(parse_method(text::trim(m)));
  }
  else if (key == "region.phase1") c.goal_region_phase1 = parse_rect(value);
  else if (key == "region.phase2") c.goal_region_phase2 = parse_rect(value);
  else if (key == "env.horizon") c.horizon = static_cast<int>(count());
  else if (key == "env.goal_tolerance") c.goal_tolerance = num();
  else if (key == "env.control_cost") c.control_cost = num();
  else if (key == "es.m") c.es.m = count();
  else if (key == "es.sigma") c.es.sigma = num();
  else if (key == "es.alpha") c.es.alpha = num();
  else if (key == "es.workers") c.es.workers = count();
  else if (key == "es.shaping") {
    if (value == "raw") c.es.shaping = FitnessShaping::Raw;
    else if (value == "centered-rank") c.es.shaping = FitnessShaping::CenteredRank;
    else throw config_error("es.shaping must be raw or centered-rank");
  }
  else if (key == "es.bias_scale") c.es.bias_scale = num();
  else if (key == "weighting.rho0") c.es.weighting.rho0 = num();
  else if (key == "weighting.delta_rho") c.es.weighting.delta_rho = num();
  else if (key == "weighting.normalize") c.es.weighting.normalize_metrics = flag();
  else if (key == "policy.hidden") {
    c.es.policy.hidden.clear();
    if (value != "-" && !value.empty())
      for (auto h : text::split(value, ',')) {
        auto n = text::parse_int<std::size_t>(text::trim(h));
        if (!n) throw config_error("policy.hidden: bad width '" + std::string(h) + "'");
        c.es.policy.hidden.push_back(*n);
      }
  }
  else if (key == "policy.clip") c.es.policy.action_clip = num();
  else throw config_error("unknown config key '" + std::string(key) + "'");
}

inline ExperimentConfig parse_config(std::istream& is, ExperimentConfig c = {}) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto body = std::string_view(line);
    if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = text::trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
    try {
      apply_config_value(c, text::trim(body.substr(0, eq)), text::trim(body.substr(eq + 1)));
    } catch (const Error& e) {
      throw config_error("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCategory::Io, "cannot open config '" + path.string() + "'");
  return parse_config(is);
}

// ---------------------------------------------------------------------------
// Seeds

inline std::uint64_t task_seed(std::uint64_t seed, std::size_t run, std::size_t phase) {
  return mix64(mix64(seed ^ 0x7a5c7a5cULL) + (static_cast<std::uint64_t>(run) << 20) + phase);
}

inline std::uint64_t es_seed(std::uint64_t seed, std::size_t run, std::size_t trial) {
  return mix64(mix64(seed ^ 0xe5e5e5e5ULL) + (static_cast<std::uint64_t>(run) << 20) + trial);
}

/// Task sequence of one run: phase 1 from region.phase1, later phases from
/// region.phase2.
inline std::vector<TaskSpec> sample_run_tasks(const ExperimentConfig& c, std::size_t run) {
  std::vector<TaskSpec> tasks;
  const TaskSpec base = c.base_task();
  for (std::size_t p = 1; p <= c.phases; ++p)
    tasks.push_back(sample_task(c.task_kind, task_seed(c.seed, run, p),
                                p == 1 ? c.goal_region_phase1 : c.goal_region_phase2, base));
  return tasks;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kCsvHeader =
    "run_id,method,phase,generation,unperturbed_return,mean_fitness,rho,weight_min,"
    "weight_max,wall_ms";

inline void write_csv_rows(std::ostream& os, std::size_t run, std::string_view method,
                           std::size_t phase, const std::vector<GenerationReport>& reports) {
  using text::format_double;
  char wall[32];
  for (const auto& r : reports) {
    std::snprintf(wall, sizeof(wall), "%.3f", r.wall_ms);
    os << run << ',' << method << ',' << phase << ',' << r.generation << ','
       << format_double(r.unperturbed_return) << ',' << format_double(r.mean_fitness) << ','
       << format_double(r.rho) << ',' << format_double(r.weight_min) << ','
       << format_double(r.weight_max) << ',' << wall << '\n';
  }
}

/// Drops the trailing wall_ms column, the only non-deterministic field.
inline std::string strip_wall_clock(std::string_view csv) {
  std::string out;
  for (auto line : text::split(csv, '\n')) {
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    out.append(line.substr(0, comma));
    out.push_back('\n');
  }
  return out;
}

/// Averages reports of repeated trials generation by generation.
inline std::vector<GenerationReport> average_reports(
    const std::vector<std::vector<GenerationReport>>& trials) {
  if (trials.size() == 1) return trials.front();
  std::vector<GenerationReport> out = trials.front();
  const double n = static_cast<double>(trials.size());
  for (std::size_t g = 0; g < out.size(); ++g) {
    GenerationReport acc{};
    acc.generation = out[g].generation;
    for (const auto& t : trials) {
      acc.unperturbed_return += t[g].unperturbed_return;
      acc.mean_fitness += t[g].mean_fitness;
      acc.rho += t[g].rho;
      acc.weight_min += t[g].weight_min;
      acc.weight_max += t[g].weight_max;
      acc.weight_entropy += t[g].weight_entropy;
      acc.wall_ms += t[g].wall_ms;
    }
    acc.unperturbed_return /= n;
    acc.mean_fitness /= n;
    acc.rho /= n;
    acc.weight_min /= n;
    acc.weight_max /= n;
    acc.weight_entropy /= n;
    out[g] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Summary

struct MethodSummary {
  Method method = Method::CA;
  std::vector<double> average_returns;  // one per run
  std::vector<double> jumpstarts;       // generation-0 return, one per run
  double mean_average_return = 0.0;
  double se_average_return = 0.0;
  double mean_jumpstart = 0.0;
  double se_jumpstart = 0.0;
  double wall_seconds = 0.0;

  void finalize() {
    mean_average_return = mean(average_returns);
    se_average_return = standard_error(average_returns);
    mean_jumpstart = mean(jumpstarts);
    se_jumpstart = standard_error(jumpstarts);
  }
};

struct RunSummary {
  std::string task;
  std::size_t runs = 0;
  std::vector<MethodSummary> methods;
  std::vector<std::string> tasks;  // serialized task sequence per run
  std::string started_at;
  double wall_seconds = 0.0;

  const MethodSummary& at(Method m) const {
    for (const auto& s : methods)
      if (s.method == m) return s;
    throw input_error("summary has no entry for method " + std::string(to_string(m)));
  }
};

inline std::string format_summary_table(const RunSummary& s) {
  std::ostringstream os;
  char buf[160];
  os << "task " << s.task << ", " << s.runs << " runs (mean +- standard error)\n";
  std::snprintf(buf, sizeof(buf), "%-10s %22s %22s %10s\n", "method", "average return",
                "generation-0 return", "wall s");
  os << buf;
  for (const auto& m : s.methods) {
    std::snprintf(buf, sizeof(buf), "%-10s %12.2f +- %6.2f %12.2f +- %6.2f %10.1f\n",
                  std::string(to_string(m.method)).c_str(), m.mean_average_return,
                  m.se_average_return, m.mean_jumpstart, m.se_jumpstart, m.wall_seconds);
    os << buf;
  }
  return os.str();
}

inline nlohmann::json summary_json(const RunSummary& s) {
  nlohmann::json j;
  j["task"] = s.task;
  j["runs"] = s.runs;
  j["started_at"] = s.started_at;
  j["wall_seconds"] = s.wall_seconds;
  j["tasks"] = s.tasks;
  for (const auto& m : s.methods) {
    j["methods"].push_back({{"method", std::string(to_string(m.method))},
                            {"mean_average_return", m.mean_average_return},
                            {"se_average_return", m.se_average_return},
                            {"mean_jumpstart", m.mean_jumpstart},
                            {"se_jumpstart", m.se_jumpstart},
                            {"wall_seconds", m.wall_seconds},
                            {"average_returns", m.average_returns},
                            {"jumpstarts", m.jumpstarts}});
  }
  return j;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Experiment

struct ExperimentOutput {
  RunSummary summary;
  std::string csv;  // header + rows
  std::vector<ParameterVector> final_parameters;  // per run, then per method (trial 0)
};

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw Error(ErrorCategory::Io, "cannot open '" + p.string() + "' for writing");
  return os;
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCategory::Io, "cannot create '" + dir.string() + "': " + ec.message());
}

}  // namespace detail

/// The repeated-change protocol without touching the filesystem. Every method
/// of a run adapts from the same phase-1 optimum, on the same later tasks,
/// with the same ES noise.
inline ExperimentOutput run_experiment_in_memory(const ExperimentConfig& config) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();
  ExperimentOutput out;
  RunSummary& summary = out.summary;
  summary.task = std::string(task_kind_name(config.task_kind));
  summary.runs = config.runs;
  summary.started_at = utc_timestamp();
  for (Method m : config.methods) {
    MethodSummary ms;
    ms.method = m;
    summary.methods.push_back(std::move(ms));
  }

  std::ostringstream csv;
  csv << kCsvHeader << '\n';

  for (std::size_t run = 0; run < config.runs; ++run) {
    const auto tasks = sample_run_tasks(config, run);
    std::string record;
    for (const auto& t : tasks) record += (record.empty() ? "" : " | ") + serialize_task(t);
    summary.tasks.push_back(record);

    // Phase 1 is shared by every method.
    std::vector<PhaseResult> phase1(config.trials);
    std::vector<std::vector<GenerationReport>> phase1_reports;
    for (std::size_t k = 0; k < config.trials; ++k) {
      EsConfig es = config.es;
      es.master_seed = es_seed(config.seed, run, k);
      es.generations = config.first_generations();
      phase1[k] = train_from_scratch(tasks[0], es, 1);
      phase1_reports.push_back(phase1[k].reports);
    }
    write_csv_rows(csv, run, "shared", 1, average_reports(phase1_reports));

    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
      const Method method = config.methods[mi];
      MethodSummary& ms = summary.methods[mi];
      const auto t_method = std::chrono::steady_clock::now();
      std::vector<double> avg_by_phase, jump_by_phase;
      std::vector<PhaseResult> previous = phase1;
      for (std::size_t p = 2; p <= config.phases; ++p) {
        std::vector<std::vector<GenerationReport>> reports;
        double avg = 0.0, jump = 0.0;
        for (std::size_t k = 0; k < config.trials; ++k) {
          EsConfig es = config.es;
          es.master_seed = es_seed(config.seed, run, k);
          es.generations = config.adapt_generations();
          PhaseResult r = run_method_phase(method, tasks[p - 1], es, p, &previous[k]);
          avg += r.average_return;
          jump += r.reports.empty() ? 0.0 : r.reports.front().unperturbed_return;
          reports.push_back(r.reports);
          previous[k] = std::move(r);
        }
        avg_by_phase.push_back(avg / static_cast<double>(config.trials));
        jump_by_phase.push_back(jump / static_cast<double>(config.trials));
        write_csv_rows(csv, run, to_string(method), p, average_reports(reports));
      }
      out.final_parameters.push_back(previous.front().theta_star);
      ms.wall_seconds +=
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_method).count();
      if (!avg_by_phase.empty()) {
        ms.average_returns.push_back(mean(avg_by_phase));
        ms.jumpstarts.push_back(mean(jump_by_phase));
      }
    }
  }
  for (auto& m : summary.methods) m.finalize();
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  out.csv = csv.str();
  return out;
}

/// Runs the protocol and writes generations.csv, summary.txt and
/// summary.json under config.output_dir. On failure a PARTIAL marker is left
/// behind before the error propagates.
inline RunSummary run_experiment(const ExperimentConfig& config) {
  detail::ensure_dir(config.output_dir);
  ExperimentOutput out;
  try {
    out = run_experiment_in_memory(config);
  } catch (const std::exception& e) {
    auto marker = detail::open_out(config.output_dir / "PARTIAL");
    marker << "experiment aborted: " << e.what() << '\n';
    throw;
  }
  {
    auto os = detail::open_out(config.output_dir / "generations.csv");
    os << out.csv;
  }
  {
    auto os = detail::open_out(config.output_dir / "summary.txt");
    os << format_summary_table(out.summary);
  }
  {
    auto os = detail::open_out(config.output_dir / "summary.json");
    os << summary_json(out.summary).dump(2) << '\n';
  }
  return out.summary;
}

// ---------------------------------------------------------------------------
// Timing sweep

struct TimingRow {
  std::size_t workers = 1;
  Method method = Method::CA;
  double seconds = 0.0;
};

struct TimingTable {
  std::vector<TimingRow> rows;
  double seconds(Method m, std::size_t workers) const {
    for (const auto& r : rows)
      if (r.method == m && r.workers == workers) return r.seconds;
    throw input_error("timing table has no entry for that method and worker count");
  }
};

/// Times the adaptation phase of every configured method at each worker
/// count, on run 0 of the configured protocol. Final parameters must agree
/// bit for bit across worker counts.
inline TimingTable timing_sweep(const ExperimentConfig& config,
                                const std::vector<std::size_t>& worker_counts) {
  config.validate();
  if (worker_counts.empty()) throw config_error("timing: need at least one worker count");
  if (config.phases < 2) throw config_error("timing: needs at least two phases");
  const auto tasks = sample_run_tasks(config, 0);
  TimingTable table;
  std::map<Method, ParameterVector> reference;
  std::optional<ParameterVector> phase1_reference;
  for (std::size_t workers : worker_counts) {
    if (workers == 0) throw config_error("timing: worker counts must be >= 1");
    EsConfig es = config.es;
    es.master_seed = es_seed(config.seed, 0, 0);
    es.workers = workers;
    es.generations = config.first_generations();
    const PhaseResult phase1 = train_from_scratch(tasks[0], es, 1);
    if (!phase1_reference) phase1_reference = phase1.theta_star;
    else if (!(*phase1_reference == phase1.theta_star))
      throw Error(ErrorCategory::Determinism,
                  "phase-1 parameters differ at " + std::to_string(workers) + " workers");

    es.generations = config.adapt_generations();
    for (Method m : config.methods) {
      const auto t0 = std::chrono::steady_clock::now();
      const PhaseResult r = run_method_phase(m, tasks[1], es, 2, &phase1);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      table.rows.push_back({workers, m, secs});
      auto [it, inserted] = reference.emplace(m, r.theta_star);
      if (!inserted && !(it->second == r.theta_star))
        throw Error(ErrorCategory::Determinism,
                    std::string(to_string(m)) + " parameters differ at " +
                        std::to_string(workers) + " workers");
    }
  }
  return table;
}

inline std::string format_timing_table(const TimingTable& t,
                                       const std::vector<std::size_t>& worker_counts,
                                       const std::vector<Method>& methods) {
  std::ostringstream os;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-10s", "workers");
  os << buf;
  for (auto w : worker_counts) {
    std::snprintf(buf, sizeof(buf), " %10zu", w);
    os << buf;
  }
  os << '\n';
  for (Method m : methods) {
    std::snprintf(buf, sizeof(buf), "%-10s", std::string(to_string(m)).c_str());
    os << buf;
    for (auto w : worker_counts) {
      std::snprintf(buf, sizeof(buf), " %10.2f", t.seconds(m, w));
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace iwies
