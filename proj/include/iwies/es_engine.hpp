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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iwies/behavior.hpp"
#include "iwies/environments.hpp"
#include "iwies/errors.hpp"
#include "iwies/parallel_eval.hpp"
#include "iwies/policy_net.hpp"
#include "iwies/random.hpp"
#include "iwies/weighting.hpp"

namespace iwies {

/// Transform applied to population fitness before the gradient estimate.
enum class FitnessShaping {
  Raw,           // returns as-is
  CenteredRank,  // rank / (m - 1) - 0.5
};

struct EsConfig {
  std::size_t m = 16;
  double sigma = 0.05;
  double alpha = 0.05;
  std::size_t generations = 200;
  WeightingConfig weighting;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
  FitnessShaping shaping = FitnessShaping::Raw;
  MlpArchitecture policy;
  double bias_scale = 0.0;  // see init_random

  void validate() const {
    if (m == 0) throw config_error("es: population size must be >= 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw config_error("es: sigma must be > 0");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw config_error("es: alpha must be >= 0");
    if (workers == 0) throw config_error("es: workers must be >= 1");
    if (!(bias_scale >= 0.0) || !std::isfinite(bias_scale))
      throw config_error("es: bias_scale must be >= 0");
    weighting.validate();
    policy.validate();
  }
};

struct GenerationReport {
  std::size_t generation = 0;
  double unperturbed_return = 0.0;
  double mean_fitness = 0.0;
  double rho = 0.0;
  double weight_min = 1.0;
  double weight_max = 1.0;
  double weight_entropy = 0.0;
  double wall_ms = 0.0;
};

struct PhaseResult {
  ParameterVector theta_star;
  std::optional<BehaviorCharacterization> bc_star;
  std::vector<GenerationReport> reports;
  double average_return = 0.0;
};

struct StepOutcome {
  ParameterVector theta;
  GenerationReport report;
};

/// (1 / (m sigma)) * sum_i w_i f_i eps_i over a materialized noise matrix.
inline std::vector<double> estimate_gradient(std::span<const double> fitness,
                                             std::span<const double> weights,
                                             std::span<const std::vector<double>> epsilons,
                                             double sigma) {
  const std::size_t m = fitness.size();
  if (weights.size() != m || epsilons.size() != m)
    throw input_error("estimate_gradient: population sizes disagree");
  if (m == 0) throw input_error("estimate_gradient: empty population");
  const std::size_t d = epsilons[0].size();
  std::vector<double> acc(d, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (epsilons[i].size() != d) throw input_error("estimate_gradient: ragged noise matrix");
    const double c = weights[i] * fitness[i];
    for (std::size_t j = 0; j < d; ++j) acc[j] += c * epsilons[i][j];
  }
  const double scale = 1.0 / (static_cast<double>(m) * sigma);
  for (double& g : acc) g = g * scale;
  return acc;
}

/// Centered ranks in [-0.5, 0.5]. Tied values share their average rank, so
/// a flat population contributes no update.
inline std::vector<double> centered_ranks(std::span<const double> f) {
  const std::size_t m = f.size();
  std::vector<double> out(m, 0.0);
  if (m < 2) return out;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
  const double denom = static_cast<double>(m - 1);
  for (std::size_t r = 0; r < m;) {
    std::size_t end = r + 1;
    while (end < m && f[order[end]] == f[order[r]]) ++end;
    const double rank = 0.5 * static_cast<double>(r + end - 1);
    for (std::size_t k = r; k < end; ++k) out[order[k]] = rank / denom - 0.5;
    r = end;
  }
  return out;
}

inline std::vector<double> shape_fitness(std::span<const double> f, FitnessShaping shaping) {
  if (shaping == FitnessShaping::CenteredRank) return centered_ranks(f);
  return {f.begin(), f.end()};
}

namespace detail {

inline void fill_weight_stats(GenerationReport& r, std::span<const double> w) {
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  r.weight_min = *lo;
  r.weight_max = *hi;
  const double m = static_cast<double>(w.size());
  double h = 0.0;
  for (double x : w) {
    const double p = x / m;
    if (p > 0.0) h -= p * std::log(p);
  }
  r.weight_entropy = h;
}

inline bool uses_novelty(WeightMetric m) {
  return m == WeightMetric::Novelty || m == WeightMetric::Mix;
}

}  // namespace detail

/// One generation: sample and evaluate the population, exchange scalars,
/// weight the instances, and take the gradient step. With `weighted` false
/// the weights are identically one (plain NES).
template <Problem P>
StepOutcome es_step(const P& problem, const ParameterVector& theta, const EsConfig& config,
                    std::size_t generation, double rho, const BehaviorCharacterization* bc_prev,
                    const SeedSchedule& schedule, bool weighted) {
  if (weighted && detail::uses_novelty(config.weighting.metric) && bc_prev == nullptr)
    throw input_error("es_step: novelty weighting needs the previous optimum's behavior");
  const auto t0 = std::chrono::steady_clock::now();

  StepOutcome out;
  GenerationReport& report = out.report;
  report.generation = generation;
  report.rho = rho;
  report.unperturbed_return = problem.evaluate(theta.span()).fitness;

  const auto packets = evaluate_population(problem, theta, config.sigma, generation, config.m,
                                           config.workers, bc_prev, schedule);

  PopulationMetrics metrics;
  std::vector<double> fitness;
  fitness.reserve(config.m);
  for (const auto& p : packets) {
    fitness.push_back(p.fitness);
    metrics.novelty.push_back(p.novelty);
    metrics.quality.push_back(p.quality);
  }
  report.mean_fitness =
      std::accumulate(fitness.begin(), fitness.end(), 0.0) / static_cast<double>(config.m);

  const auto weights = weighted ? compute_weights(metrics, config.weighting, rho)
                                : std::vector<double>(config.m, 1.0);
  detail::fill_weight_stats(report, weights);

  const auto shaped = shape_fitness(fitness, config.shaping);
  out.theta = reconstruct_and_update(theta, packets, shaped, weights, config.sigma, config.alpha,
                                     generation, schedule);

  report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

namespace detail {

template <Problem P>
PhaseResult run_phase(const P& problem, ParameterVector theta, const EsConfig& config,
                      const BehaviorCharacterization* bc_prev, const SeedSchedule& schedule,
                      bool weighted) {
  config.validate();
  if (theta.size() != problem.dimension())
    throw input_error("phase: parameter length does not match problem dimension");
  PhaseResult result;
  result.reports.reserve(config.generations);
  double rho = config.weighting.rho0;
  for (std::size_t g = 0; g < config.generations; ++g) {
    auto step = es_step(problem, theta, config, g, weighted ? rho : 0.0, bc_prev, schedule,
                        weighted);
    theta = std::move(step.theta);
    result.reports.push_back(step.report);
    if (weighted) rho = anneal(rho, config.weighting.delta_rho);
  }
  double total = 0.0;
  for (const auto& r : result.reports) total += r.unperturbed_return;
  result.average_return =
      result.reports.empty() ? 0.0 : total / static_cast<double>(result.reports.size());
  result.bc_star = problem.evaluate(theta.span()).behavior;
  result.theta_star = std::move(theta);
  return result;
}

}  // namespace detail

/// Plain NES from `init` for config.generations steps.
template <Problem P>
PhaseResult train_from_scratch(const P& problem, ParameterVector init, const EsConfig& config,
                               const SeedSchedule& schedule) {
  return detail::run_phase(problem, std::move(init), config, nullptr, schedule, false);
}

/// Instance-weighted NES starting from the previous optimum, annealing rho by
/// delta_rho per generation. Uniform weighting gives continuous adaptation.
template <Problem P>
PhaseResult adapt(const P& problem, ParameterVector theta_prev,
                  const std::optional<BehaviorCharacterization>& bc_prev, const EsConfig& config,
                  const SeedSchedule& schedule) {
  return detail::run_phase(problem, std::move(theta_prev), config,
                           bc_prev ? &*bc_prev : nullptr, schedule, true);
}

// ---------------------------------------------------------------------------
// Navigation

struct NavigationProblem {
  TaskSpec task;
  MlpArchitecture arch;

  std::size_t dimension() const { return param_count(arch); }

  Evaluation evaluate(std::span<const double> z) const {
    MlpWorkspace ws(arch);
    const EpisodeTrace trace = rollout(task, arch, z, ws);
    Evaluation e;
    e.fitness = trace.episode_return;
    e.quality = quality_of(trace);
    e.behavior = bc_nav(trace, static_cast<std::size_t>(task.horizon));
    return e;
  }
};

enum class Method { FS, CA, IwiesN, IwiesQu, IwiesMix };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::FS: return "fs";
    case Method::CA: return "ca";
    case Method::IwiesN: return "iwies-n";
    case Method::IwiesQu: return "iwies-qu";
    case Method::IwiesMix: return "iwies-mix";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  for (Method m : {Method::FS, Method::CA, Method::IwiesN, Method::IwiesQu, Method::IwiesMix})
    if (to_string(m) == s) return m;
  throw config_error("unknown method '" + std::string(s) +
                     "' (expected fs, ca, iwies-n, iwies-qu or iwies-mix)");
}

inline WeightMetric metric_for(Method m) {
  switch (m) {
    case Method::IwiesN: return WeightMetric::Novelty;
    case Method::IwiesQu: return WeightMetric::Quality;
    case Method::IwiesMix: return WeightMetric::Mix;
    default: return WeightMetric::Uniform;
  }
}

/// ES noise schedule for phase t (1-based). Shared by every method so runs
/// are paired.
inline SeedSchedule phase_schedule(std::uint64_t master_seed, std::size_t phase) {
  return SeedSchedule(master_seed).fork(phase);
}

inline std::uint64_t phase_init_seed(std::uint64_t master_seed, std::size_t phase) {
  return mix64(master_seed ^ mix64(0xf5f5f5f5ULL + phase));
}

inline PhaseResult train_from_scratch(const TaskSpec& task, const EsConfig& config,
                                      std::size_t phase = 1) {
  const NavigationProblem problem{task, config.policy};
  return train_from_scratch(problem,
                            init_random(config.policy, phase_init_seed(config.master_seed, phase),
                                        config.bias_scale),
                            config, phase_schedule(config.master_seed, phase));
}

inline PhaseResult adapt(const ParameterVector& theta_prev,
                         const std::optional<BehaviorCharacterization>& bc_prev,
                         const TaskSpec& task, const EsConfig& config, std::size_t phase = 2) {
  const NavigationProblem problem{task, config.policy};
  return adapt(problem, theta_prev, bc_prev, config, phase_schedule(config.master_seed, phase));
}

/// One phase of `method` on `task`, continuing from `previous` when given.
inline PhaseResult run_method_phase(Method method, const TaskSpec& task, EsConfig config,
                                    std::size_t phase, const PhaseResult* previous) {
  if (phase == 1 || previous == nullptr || method == Method::FS)
    return train_from_scratch(task, config, phase);
  config.weighting.metric = metric_for(method);
  return adapt(previous->theta_star, previous->bc_star, task, config, phase);
}

inline std::vector<PhaseResult> run_incremental(std::span<const TaskSpec> tasks,
                                                const EsConfig& config, Method method) {
  if (tasks.empty()) throw input_error("run_incremental: need at least one task");
  std::vector<PhaseResult> phases;
  phases.reserve(tasks.size());
  for (std::size_t t = 0; t < tasks.size(); ++t)
    phases.push_back(
        run_method_phase(method, tasks[t], config, t + 1, t ? &phases.back() : nullptr));
  return phases;
}

}  // namespace iwies
