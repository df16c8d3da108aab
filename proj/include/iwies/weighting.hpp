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
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iwies/behavior.hpp"
#include "iwies/environments.hpp"
#include "iwies/errors.hpp"

namespace iwies {

enum class WeightMetric { Uniform, Novelty, Quality, Mix };

inline std::string_view to_string(WeightMetric m) {
  switch (m) {
    case WeightMetric::Uniform: return "uniform";
    case WeightMetric::Novelty: return "novelty";
    case WeightMetric::Quality: return "quality";
    case WeightMetric::Mix: return "mix";
  }
  return "?";
}

struct WeightingConfig {
  WeightMetric metric = WeightMetric::Uniform;
  double rho0 = 1.0;
  double delta_rho = 0.01;
  bool normalize_metrics = true;

  void validate() const {
    if (!(rho0 > 0.0) || !std::isfinite(rho0)) throw config_error("weighting: rho0 must be > 0");
    if (!(delta_rho >= 0.0) || !std::isfinite(delta_rho))
      throw config_error("weighting: delta_rho must be >= 0");
  }
};

struct PopulationMetrics {
  std::vector<double> novelty;
  std::vector<double> quality;

  std::size_t size() const { return novelty.size(); }

  void validate() const {
    if (novelty.size() != quality.size())
      throw input_error("population metrics: novelty and quality lengths differ");
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(novelty.begin(), novelty.end(), finite) ||
        !std::all_of(quality.begin(), quality.end(), finite))
      throw input_error("population metrics: non-finite entry");
  }
};

inline double novelty_of(const BehaviorCharacterization& bc,
                         const BehaviorCharacterization& bc_prev_opt) {
  return behavior_distance(bc, bc_prev_opt);
}

inline double quality_of(const EpisodeTrace& trace) { return trace.episode_return; }

/// m * exp(v_i / rho) / sum_j exp(v_j / rho), evaluated after subtracting
/// max(v) so large values cannot overflow.
inline std::vector<double> softmax_weights(std::span<const double> values, double rho) {
  if (values.empty()) throw input_error("softmax_weights: empty population");
  if (!(rho > 0.0) || std::isnan(rho)) throw input_error("softmax_weights: rho must be > 0");
  for (double v : values)
    if (!std::isfinite(v)) throw input_error("softmax_weights: non-finite value");

  const double vmax = *std::max_element(values.begin(), values.end());
  std::vector<double> w(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    w[i] = std::exp((values[i] - vmax) / rho);
    total += w[i];
  }
  const double scale = static_cast<double>(values.size()) / total;
  for (double& x : w) x *= scale;
  return w;
}

/// Min-max rescale to [0, 1]; a constant list maps to zeros.
inline std::vector<double> min_max_normalize(std::span<const double> v) {
  std::vector<double> out(v.size(), 0.0);
  if (v.empty()) return out;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / range;
  return out;
}

/// Per-instance novelty x quality, optionally on min-max rescaled inputs.
inline std::vector<double> mix_values(const PopulationMetrics& metrics, bool normalize) {
  metrics.validate();
  const std::size_t m = metrics.size();
  std::vector<double> out(m);
  if (normalize) {
    const auto n = min_max_normalize(metrics.novelty);
    const auto q = min_max_normalize(metrics.quality);
    for (std::size_t i = 0; i < m; ++i) out[i] = n[i] * q[i];
  } else {
    for (std::size_t i = 0; i < m; ++i) out[i] = metrics.novelty[i] * metrics.quality[i];
  }
  return out;
}

inline std::vector<double> compute_weights(const PopulationMetrics& metrics,
                                           const WeightingConfig& config, double rho) {
  metrics.validate();
  if (metrics.size() == 0) throw input_error("compute_weights: empty population");
  auto prepared = [&](const std::vector<double>& v) {
    return config.normalize_metrics ? min_max_normalize(v) : v;
  };
  switch (config.metric) {
    case WeightMetric::Uniform:
      if (!(rho > 0.0)) throw input_error("compute_weights: rho must be > 0");
      return std::vector<double>(metrics.size(), 1.0);
    case WeightMetric::Novelty:
      return softmax_weights(prepared(metrics.novelty), rho);
    case WeightMetric::Quality:
      return softmax_weights(prepared(metrics.quality), rho);
    case WeightMetric::Mix:
      return softmax_weights(mix_values(metrics, config.normalize_metrics), rho);
  }
  return {};
}

inline double anneal(double rho, double delta_rho) { return rho + delta_rho; }

}  // namespace iwies
