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

// iwies: command-line front end.
//
//   iwies train        single phase from scratch
//   iwies incremental  multi-phase run with one adaptation method
//   iwies experiment   repeated-change protocol over several methods
//   iwies timing       worker-count sweep
//   iwies eval         roll out a checkpoint on a task record

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "iwies/iwies.hpp"

namespace {

using namespace iwies;
using detail::ensure_dir;
using detail::open_out;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> method;
  std::optional<std::string> task;
  std::optional<std::string> out;
  std::optional<std::size_t> generations;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "key = value config file");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--workers", f.workers, "evaluation threads");
  cmd->add_option("--task", f.task, "case1, case2 or puddle");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--generations", f.generations, "generations per phase");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig c = f.config_path.empty() ? ExperimentConfig{} : load_config(f.config_path);
  if (f.seed) c.seed = *f.seed;
  if (f.workers) c.es.workers = *f.workers;
  if (f.task) c.task_kind = parse_task_kind(*f.task);
  if (f.out) c.output_dir = *f.out;
  if (f.generations) {
    c.generations_per_phase = *f.generations;
    c.phase1_generations = *f.generations;
  }
  if (f.method) c.methods = {parse_method(*f.method)};
  c.validate();
  return c;
}

int cmd_train(const CommonFlags& flags) {
  ExperimentConfig c = resolve(flags);
  ensure_dir(c.output_dir);
  const TaskSpec task = sample_run_tasks(c, 0).front();
  EsConfig es = c.es;
  es.master_seed = es_seed(c.seed, 0, 0);
  es.generations = c.first_generations();
  const PhaseResult r = train_from_scratch(task, es, 1);

  auto csv = open_out(c.output_dir / "generations.csv");
  csv << kCsvHeader << '\n';
  write_csv_rows(csv, 0, "fs", 1, r.reports);
  open_out(c.output_dir / "tasks.txt") << serialize_task(task) << '\n';
  write_checkpoint(c.output_dir / "theta.txt", r.theta_star, es.policy);

  std::printf("task      %s\n", serialize_task(task).c_str());
  std::printf("average   %.4f\n", r.average_return);
  std::printf("final     %.4f\n",
              r.reports.empty() ? 0.0 : r.reports.back().unperturbed_return);
  std::printf("written   %s\n", c.output_dir.string().c_str());
  return 0;
}

int cmd_incremental(const CommonFlags& flags) {
  ExperimentConfig c = resolve(flags);
  if (c.methods.size() != 1)
    throw config_error("incremental runs exactly one method; pass --method");
  const Method method = c.methods.front();
  ensure_dir(c.output_dir);
  const auto tasks = sample_run_tasks(c, 0);

  EsConfig es = c.es;
  es.master_seed = es_seed(c.seed, 0, 0);
  auto csv = open_out(c.output_dir / "generations.csv");
  csv << kCsvHeader << '\n';
  auto task_log = open_out(c.output_dir / "tasks.txt");
  std::vector<PhaseResult> phases;
  for (std::size_t p = 1; p <= tasks.size(); ++p) {
    es.generations = p == 1 ? c.first_generations() : c.adapt_generations();
    phases.push_back(
        run_method_phase(method, tasks[p - 1], es, p, p > 1 ? &phases.back() : nullptr));
    const PhaseResult& r = phases.back();
    write_csv_rows(csv, 0, to_string(method), p, r.reports);
    task_log << serialize_task(tasks[p - 1]) << '\n';
    write_checkpoint(c.output_dir / ("theta_phase" + std::to_string(p) + ".txt"), r.theta_star,
                     es.policy);
    std::printf("phase %zu  average %10.4f  generation-0 %10.4f  final %10.4f\n", p,
                r.average_return,
                r.reports.empty() ? 0.0 : r.reports.front().unperturbed_return,
                r.reports.empty() ? 0.0 : r.reports.back().unperturbed_return);
  }
  return 0;
}

int cmd_experiment(const CommonFlags& flags) {
  const ExperimentConfig c = resolve(flags);
  const RunSummary s = run_experiment(c);
  std::cout << format_summary_table(s);
  std::cout << "written " << c.output_dir.string() << '\n';
  return 0;
}

int cmd_timing(const CommonFlags& flags, std::vector<std::size_t> counts) {
  ExperimentConfig c = resolve(flags);
  if (flags.method == std::nullopt)
    c.methods = {Method::CA, Method::IwiesN, Method::IwiesQu, Method::IwiesMix};
  if (counts.empty()) {
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t w = 1; w <= std::min<std::size_t>(hw, 8); w *= 2) counts.push_back(w);
  }
  const TimingTable t = timing_sweep(c, counts);
  std::cout << "seconds per adaptation phase (" << c.adapt_generations()
            << " generations); parameters identical across worker counts\n";
  std::cout << format_timing_table(t, counts, c.methods);
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& task_record) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  const TaskSpec task = parse_task(task_record);
  task.validate();
  const EpisodeTrace trace = rollout(task, ck.arch, ck.theta);
  std::printf("steps   %zu\nreturn  %.6f\nfinal   %s,%s\n", trace.steps(), trace.episode_return,
              text::format_double(trace.states.back().x).c_str(),
              text::format_double(trace.states.back().y).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instance-weighted incremental evolution strategies"};
  app.require_subcommand(1);

  CommonFlags train_flags, inc_flags, exp_flags, timing_flags;
  auto* train = app.add_subcommand("train", "train one phase from scratch");
  add_common(train, train_flags);

  auto* inc = app.add_subcommand("incremental", "multi-phase run with one method");
  add_common(inc, inc_flags);
  inc->add_option("--method", inc_flags.method, "fs, ca, iwies-n, iwies-qu or iwies-mix")
      ->required();

  auto* exp = app.add_subcommand("experiment", "repeated-change protocol");
  add_common(exp, exp_flags);
  exp->add_option("--method", exp_flags.method, "run a single method instead of the list");

  std::vector<std::size_t> counts;
  auto* timing = app.add_subcommand("timing", "worker-count scalability sweep");
  add_common(timing, timing_flags);
  timing->add_option("--method", timing_flags.method, "time a single method");
  timing->add_option("--worker-counts", counts, "worker counts to sweep")->delimiter(',');

  std::string checkpoint, task_record;
  auto* eval = app.add_subcommand("eval", "roll out a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--task-record", task_record, "one-line task record")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(train_flags);
    if (*inc) return cmd_incremental(inc_flags);
    if (*exp) return cmd_experiment(exp_flags);
    if (*timing) return cmd_timing(timing_flags, counts);
    if (*eval) return cmd_eval(checkpoint, task_record);
  } catch (const iwies::Error& e) {
    std::fprintf(stderr, "iwies: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "iwies: %s\n", e.what());
    return 1;
  }
  return 0;
}
