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

#include <cmath>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "iwies/environments.hpp"
#include "iwies/errors.hpp"
#include "iwies/geometry.hpp"

namespace iwies {

/// Agent positions after each of H steps.
struct PointTrace {
  std::vector<Vec2> points;
  friend bool operator==(const PointTrace&, const PointTrace&) = default;
};

/// Progress along one axis relative to the initial coordinate, per step.
struct OffsetTrace {
  std::vector<double> offsets;
  friend bool operator==(const OffsetTrace&, const OffsetTrace&) = default;
};

using BehaviorCharacterization = std::variant<PointTrace, OffsetTrace>;

inline std::size_t horizon_of(const BehaviorCharacterization& bc) {
  return std::visit(
      [](const auto& t) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(t)>, PointTrace>)
          return t.points.size();
        else
          return t.offsets.size();
      },
      bc);
}

/// Post-step positions of a navigation episode, padded with the final
/// position when the episode stopped before H steps.
inline PointTrace bc_nav(const EpisodeTrace& trace, std::size_t horizon) {
  if (trace.states.empty()) throw input_error("bc_nav: empty trace");
  if (horizon == 0) throw input_error("bc_nav: horizon must be positive");
  PointTrace bc;
  bc.points.reserve(horizon);
  const std::size_t visited = trace.states.size() - 1;
  for (std::size_t i = 0; i < horizon; ++i)
    bc.points.push_back(i < visited ? trace.states[i + 1] : trace.states.back());
  return bc;
}

/// x^i - x^0 for i = 1..H, padded with the final offset.
inline OffsetTrace bc_offsets(std::span<const double> x_positions, std::size_t horizon) {
  if (x_positions.empty()) throw input_error("bc_offsets: empty input");
  if (horizon == 0) throw input_error("bc_offsets: horizon must be positive");
  OffsetTrace bc;
  bc.offsets.reserve(horizon);
  const double x0 = x_positions.front();
  const std::size_t visited = x_positions.size() - 1;
  for (std::size_t i = 0; i < horizon; ++i)
    bc.offsets.push_back((i < visited ? x_positions[i + 1] : x_positions.back()) - x0);
  return bc;
}

/// Mean Euclidean distance between corresponding positions.
inline double distance_nav(const PointTrace& a, const PointTrace& b) {
  if (a.points.size() != b.points.size())
    throw input_error("distance_nav: traces have different lengths");
  if (a.points.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i) sum += norm(a.points[i] - b.points[i]);
  return sum / static_cast<double>(a.points.size());
}

/// Mean absolute difference between corresponding offsets.
inline double distance_offsets(const OffsetTrace& a, const OffsetTrace& b) {
  if (a.offsets.size() != b.offsets.size())
    throw input_error("distance_offsets: traces have different lengths");
  if (a.offsets.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.offsets.size(); ++i)
    sum += std::abs(a.offsets[i] - b.offsets[i]);
  return sum / static_cast<double>(a.offsets.size());
}

inline double behavior_distance(const BehaviorCharacterization& a,
                                const BehaviorCharacterization& b) {
  if (a.index() != b.index())
    throw input_error("behavior distance: characterization kinds differ");
  if (const auto* pa = std::get_if<PointTrace>(&a))
    return distance_nav(*pa, std::get<PointTrace>(b));
  return distance_offsets(std::get<OffsetTrace>(a), std::get<OffsetTrace>(b));
}

inline std::string to_string(const BehaviorCharacterization& bc) {
  std::string s;
  if (const auto* p = std::get_if<PointTrace>(&bc)) {
    for (const auto& v : p->points)
      s += (s.empty() ? "" : " ") + text::format_double(v.x) + "," + text::format_double(v.y);
  } else {
    for (double v : std::get<OffsetTrace>(bc).offsets)
      s += (s.empty() ? "" : " ") + text::format_double(v);
  }
  return s;
}

}  // namespace iwies
