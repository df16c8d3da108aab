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

// Worker protocol for population evaluation. Every party holds the same
// SeedSchedule, so perturbation i of generation g can be regenerated anywhere
// from (g, i) alone; workers only hand back one ScalarPacket per instance.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "iwies/behavior.hpp"
#include "iwies/errors.hpp"
#include "iwies/policy_net.hpp"
#include "iwies/random.hpp"
#include "iwies/text.hpp"

namespace iwies {

/// Outcome of evaluating one parameter vector.
struct Evaluation {
  double fitness = 0.0;
  double quality = 0.0;
  std::optional<BehaviorCharacterization> behavior;
};

/// Anything that scores a flat parameter vector. evaluate() must be
/// deterministic and safe to call concurrently.
template <class P>
concept Problem = requires(const P& p, std::span<const double> z) {
  { p.dimension() } -> std::convertible_to<std::size_t>;
  { p.evaluate(z) } -> std::convertible_to<Evaluation>;
};

struct ScalarPacket {
  std::uint64_t generation = 0;
  std::size_t worker_index = 0;
  double fitness = 0.0;
  double novelty = 0.0;
  double quality = 0.0;

  friend bool operator==(const ScalarPacket&, const ScalarPacket&) = default;
};

/// "gen=<g> worker=<i> f=<v> n=<v> q=<v>"
inline std::string to_string(const ScalarPacket& p) {
  using text::format_double;
  return "gen=" + std::to_string(p.generation) + " worker=" + std::to_string(p.worker_index) +
         " f=" + format_double(p.fitness) + " n=" + format_double(p.novelty) +
         " q=" + format_double(p.quality);
}

inline ScalarPacket parse_packet(std::string_view line) {
  auto fail = [&] { return parse_error("malformed scalar packet '" + std::string(line) + "'"); };
  const auto fields = text::tokens(text::trim(line));
  static constexpr std::string_view keys[] = {"gen=", "worker=", "f=", "n=", "q="};
  if (fields.size() != 5) throw fail();
  std::string_view vals[5];
  for (std::size_t i = 0; i < 5; ++i) {
    if (!fields[i].starts_with(keys[i])) throw fail();
    vals[i] = fields[i].substr(keys[i].size());
  }
  ScalarPacket p;
  auto gen = text::parse_int<std::uint64_t>(vals[0]);
  auto worker = text::parse_int<std::size_t>(vals[1]);
  auto f = text::parse_double(vals[2]);
  auto n = text::parse_double(vals[3]);
  auto q = text::parse_double(vals[4]);
  if (!gen || !worker || !f || !n || !q) throw fail();
  p.generation = *gen;
  p.worker_index = *worker;
  p.fitness = *f;
  p.novelty = *n;
  p.quality = *q;
  return p;
}

inline void fill_perturbation(const SeedSchedule& schedule, std::uint64_t generation,
                              std::size_t worker_index, std::span<double> out) {
  fill_standard_normal(schedule.stream_seed(generation, worker_index), out);
}

inline std::vector<double> derive_perturbation(const SeedSchedule& schedule,
                                               std::uint64_t generation,
                                               std::size_t worker_index, std::size_t d) {
  std::vector<double> eps(d);
  fill_perturbation(schedule, generation, worker_index, eps);
  return eps;
}

/// Runs job(k) for k = 0..workers-1 on separate threads (k = 0 on the calling
/// thread) and rethrows the lowest-indexed failure after all have joined.
template <class Job>
void run_workers(std::size_t workers, Job&& job) {
  if (workers <= 1) {
    job(std::size_t{0});
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers - 1);
    for (std::size_t k = 1; k < workers; ++k)
      threads.emplace_back([&, k] {
        try {
          job(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    try {
      job(std::size_t{0});
    } catch (...) {
      errors[0] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Evaluates theta + sigma * eps_i for i < m. Instance i runs on worker
/// i mod workers; the result is ordered by instance index.
template <Problem P>
std::vector<ScalarPacket> evaluate_population(
    const P& problem, const ParameterVector& theta, double sigma, std::uint64_t generation,
    std::size_t m, std::size_t workers, const BehaviorCharacterization* bc_prev,
    const SeedSchedule& schedule) {
  if (workers == 0) throw config_error("evaluate_population: workers must be >= 1");
  if (m == 0) throw config_error("evaluate_population: population must be >= 1");
  const std::size_t d = problem.dimension();
  if (theta.size() != d)
    throw input_error("evaluate_population: parameter length " + std::to_string(theta.size()) +
                      " does not match problem dimension " + std::to_string(d));

  std::vector<ScalarPacket> packets(m);
  const std::size_t active = std::min(workers, m);
  run_workers(active, [&](std::size_t worker) {
    std::vector<double> eps(d), z(d);
    for (std::size_t i = worker; i < m; i += active) {
      fill_perturbation(schedule, generation, i, eps);
      for (std::size_t j = 0; j < d; ++j) z[j] = theta[j] + sigma * eps[j];
      const Evaluation e = problem.evaluate(std::span<const double>(z));
      ScalarPacket& p = packets[i];
      p.generation = generation;
      p.worker_index = i;
      p.fitness = e.fitness;
      p.quality = e.quality;
      p.novelty = (bc_prev && e.behavior) ? behavior_distance(*e.behavior, *bc_prev) : 0.0;
    }
  });
  return packets;
}

inline void check_packets(std::span<const ScalarPacket> packets, std::size_t m,
                          std::uint64_t generation) {
  if (packets.size() != m)
    throw Error(ErrorCategory::Protocol, "expected " + std::to_string(m) + " packets, got " +
                                             std::to_string(packets.size()));
  for (std::size_t i = 0; i < m; ++i) {
    if (packets[i].worker_index != i)
      throw Error(ErrorCategory::Protocol,
                  "missing or out-of-order packet for worker " + std::to_string(i));
    if (packets[i].generation != generation)
      throw Error(ErrorCategory::Protocol,
                  "packet from worker " + std::to_string(i) + " belongs to generation " +
                      std::to_string(packets[i].generation));
  }
}

/// theta + alpha * (1 / (m sigma)) * sum_i coeff_i * eps_i, with each eps_i
/// regenerated from the schedule and the sum taken in index order.
inline ParameterVector apply_update(const ParameterVector& theta,
                                    std::span<const double> coeff, double sigma, double alpha,
                                    std::uint64_t generation, const SeedSchedule& schedule) {
  const std::size_t d = theta.size();
  const std::size_t m = coeff.size();
  std::vector<double> acc(d, 0.0), eps(d);
  for (std::size_t i = 0; i < m; ++i) {
    fill_perturbation(schedule, generation, i, eps);
    const double c = coeff[i];
    for (std::size_t j = 0; j < d; ++j) acc[j] += c * eps[j];
  }
  const double scale = 1.0 / (static_cast<double>(m) * sigma);
  ParameterVector next(d);
  for (std::size_t j = 0; j < d; ++j) next[j] = theta[j] + alpha * (acc[j] * scale);
  return next;
}

/// Update from gathered packets, using `fitness` in place of the packets'
/// raw fitness (e.g. after shaping).
inline ParameterVector reconstruct_and_update(const ParameterVector& theta,
                                              std::span<const ScalarPacket> packets,
                                              std::span<const double> fitness,
                                              std::span<const double> weights, double sigma,
                                              double alpha, std::uint64_t generation,
                                              const SeedSchedule& schedule) {
  const std::size_t m = weights.size();
  check_packets(packets, m, generation);
  if (fitness.size() != m) throw input_error("reconstruct_and_update: fitness length mismatch");
  std::vector<double> coeff(m);
  for (std::size_t i = 0; i < m; ++i) coeff[i] = weights[i] * fitness[i];
  return apply_update(theta, coeff, sigma, alpha, generation, schedule);
}

inline ParameterVector reconstruct_and_update(const ParameterVector& theta,
                                              std::span<const ScalarPacket> packets,
                                              std::span<const double> weights, double sigma,
                                              double alpha, std::uint64_t generation,
                                              const SeedSchedule& schedule) {
  std::vector<double> fitness;
  fitness.reserve(packets.size());
  for (const auto& p : packets) fitness.push_back(p.fitness);
  return reconstruct_and_update(theta, packets, fitness, weights, sigma, alpha, generation,
                                schedule);
}

}  // namespace iwies
