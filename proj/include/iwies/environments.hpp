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
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "iwies/errors.hpp"
#include "iwies/geometry.hpp"
#include "iwies/policy_net.hpp"
#include "iwies/random.hpp"
#include "iwies/text.hpp"

namespace iwies {

/// The arena every navigation task lives in.
inline constexpr Rect kArena{-0.5, 0.5, -0.5, 0.5};

enum class TaskVariant { GoalNav, ObstacleNav, PuddleNav };

inline std::string_view to_string(TaskVariant v) {
  switch (v) {
    case TaskVariant::GoalNav: return "GoalNav";
    case TaskVariant::ObstacleNav: return "ObstacleNav";
    case TaskVariant::PuddleNav: return "PuddleNav";
  }
  return "?";
}

struct Puddle {
  Vec2 center;
  double radius = 0.0;

  bool covers(Vec2 p) const { return norm(p - center) <= radius; }
  friend bool operator==(const Puddle&, const Puddle&) = default;
};

inline constexpr std::array<double, 3> kPuddleRadii{0.08, 0.12, 0.16};

struct TaskSpec {
  TaskVariant variant = TaskVariant::GoalNav;
  Vec2 start{0.0, 0.0};
  Vec2 goal{0.0, 0.0};
  std::optional<Vec2> obstacle_center;
  double obstacle_half_width = 0.3;
  std::vector<Puddle> puddles;
  int horizon = 100;
  double goal_tolerance = 0.01;
  double control_cost_coeff = 0.05;

  bool in_obstacle(Vec2 p) const {
    if (!obstacle_center) return false;
    return std::abs(p.x - obstacle_center->x) <= obstacle_half_width &&
           std::abs(p.y - obstacle_center->y) <= obstacle_half_width;
  }

  bool blocked(Vec2 p) const {
    if (in_obstacle(p)) return true;
    return std::any_of(puddles.begin(), puddles.end(),
                       [p](const Puddle& d) { return d.covers(p); });
  }

  void validate() const {
    if (!kArena.contains(start) || !kArena.contains(goal))
      throw input_error("task: start and goal must lie inside the arena");
    if (horizon <= 0) throw input_error("task: horizon must be positive");
    if (!(goal_tolerance > 0.0)) throw input_error("task: goal_tolerance must be positive");
    if (!(control_cost_coeff >= 0.0))
      throw input_error("task: control_cost_coeff must be nonnegative");
    if (variant == TaskVariant::PuddleNav) {
      if (puddles.size() != 3) throw input_error("task: PuddleNav needs exactly 3 puddles");
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j)
          if (puddles[i].radius == puddles[j].radius)
            throw input_error("task: puddle radii must be pairwise distinct");
    }
    if (blocked(start) || blocked(goal))
      throw input_error("task: obstacle or puddle covers start or goal");
  }

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct StepResult {
  Vec2 next_state;
  double reward = 0.0;
  bool done = false;
};

struct EpisodeTrace {
  std::vector<Vec2> states;  // includes the reset state
  std::vector<Vec2> actions;
  std::vector<double> rewards;
  double episode_return = 0.0;

  std::size_t steps() const { return rewards.size(); }
};

inline Vec2 reset(const TaskSpec& task) { return task.start; }

inline Vec2 clip_to_arena(Vec2 p) {
  return {std::clamp(p.x, kArena.x_min, kArena.x_max),
          std::clamp(p.y, kArena.y_min, kArena.y_max)};
}

/// One transition. A blocked candidate position bounces the agent back to
/// `state`.
inline StepResult step(const TaskSpec& task, Vec2 state, Vec2 action) {
  if (!std::isfinite(action.x) || !std::isfinite(action.y))
    throw input_error("step: non-finite action");
  const Vec2 candidate = clip_to_arena(state + action);
  const Vec2 next = task.blocked(candidate) ? state : candidate;
  const double dist2 = squared_norm(next - task.goal);
  StepResult r;
  r.next_state = next;
  r.reward = -dist2 - task.control_cost_coeff * squared_norm(action);
  r.done = std::sqrt(dist2) <= task.goal_tolerance;
  return r;
}

/// Canonical fixed parts of each navigation family.
inline TaskSpec base_task(TaskVariant variant) {
  TaskSpec t;
  t.variant = variant;
  switch (variant) {
    case TaskVariant::GoalNav:
      t.start = {0.0, 0.0};
      t.goal = {0.0, 0.0};
      break;
    case TaskVariant::ObstacleNav:
      t.start = {0.0, -0.5};
      t.goal = {0.0, 0.5};
      break;
    case TaskVariant::PuddleNav:
      t.start = {0.0, 0.0};
      t.goal = {0.0, 0.0};
      break;
  }
  return t;
}

inline constexpr int kMaxSamplingAttempts = 10000;

/// Draws a task of the given family. `region` bounds the goal (GoalNav,
/// PuddleNav), the obstacle center (ObstacleNav) and puddle centers.
inline TaskSpec sample_task(TaskVariant kind, std::uint64_t seed, const Rect& region,
                            const TaskSpec& base) {
  if (!region.valid() || !kArena.contains(region))
    throw input_error("sample_task: region must be a valid sub-rectangle of the arena");
  auto rng = make_stream(seed, /*tag=*/0x7a5c);
  auto draw = [&rng](const Rect& r) {
    const double x = rng.uniform(r.x_min, r.x_max);
    const double y = rng.uniform(r.y_min, r.y_max);
    return Vec2{x, y};
  };

  TaskSpec task = base;
  task.variant = kind;
  task.obstacle_center.reset();
  task.puddles.clear();

  switch (kind) {
    case TaskVariant::GoalNav:
      task.goal = draw(region);
      return task;

    case TaskVariant::ObstacleNav: {
      const double hw = task.obstacle_half_width;
      const Rect feasible{std::max(region.x_min, kArena.x_min + hw),
                          std::min(region.x_max, kArena.x_max - hw),
                          std::max(region.y_min, kArena.y_min + hw),
                          std::min(region.y_max, kArena.y_max - hw)};
      if (!feasible.valid())
        throw Error(ErrorCategory::Sampling, "sample_task: no obstacle placement fits the region");
      for (int attempt = 0; attempt < kMaxSamplingAttempts; ++attempt) {
        task.obstacle_center = draw(feasible);
        if (!task.in_obstacle(task.start) && !task.in_obstacle(task.goal)) return task;
      }
      break;
    }

    case TaskVariant::PuddleNav:
      for (int attempt = 0; attempt < kMaxSamplingAttempts; ++attempt) {
        task.goal = draw(region);
        task.puddles.clear();
        for (double radius : kPuddleRadii) task.puddles.push_back({draw(region), radius});
        if (!task.blocked(task.start) && !task.blocked(task.goal)) return task;
      }
      break;
  }
  throw Error(ErrorCategory::Sampling,
              "sample_task: rejection sampling exceeded " +
                  std::to_string(kMaxSamplingAttempts) + " attempts");
}

inline TaskSpec sample_task(TaskVariant kind, std::uint64_t seed,
                            const Rect& region = kArena) {
  return sample_task(kind, seed, region, base_task(kind));
}

/// Runs the deterministic policy until the goal is reached or the horizon ends.
inline EpisodeTrace rollout(const TaskSpec& task, const MlpArchitecture& arch,
                            std::span<const double> theta, MlpWorkspace& ws) {
  if (arch.input_dim != 2 || arch.output_dim != 2)
    throw input_error("rollout: navigation policies map 2D states to 2D actions");
  EpisodeTrace trace;
  trace.states.reserve(static_cast<std::size_t>(task.horizon) + 1);
  trace.actions.reserve(static_cast<std::size_t>(task.horizon));
  trace.rewards.reserve(static_cast<std::size_t>(task.horizon));

  Vec2 s = reset(task);
  trace.states.push_back(s);
  if (norm(s - task.goal) <= task.goal_tolerance) return trace;

  std::array<double, 2> obs{}, act{};
  double total = 0.0;
  for (int t = 0; t < task.horizon; ++t) {
    obs = {s.x, s.y};
    forward_into(arch, theta, obs, act, ws);
    const Vec2 a{act[0], act[1]};
    const StepResult r = step(task, s, a);
    trace.actions.push_back(a);
    trace.rewards.push_back(r.reward);
    trace.states.push_back(r.next_state);
    total += r.reward;
    s = r.next_state;
    if (r.done) break;
  }
  trace.episode_return = total;
  return trace;
}

inline EpisodeTrace rollout(const TaskSpec& task, const MlpArchitecture& arch,
                            const ParameterVector& theta) {
  MlpWorkspace ws(arch);
  return rollout(task, arch, theta.span(), ws);
}

// One-line record, e.g.
//   ObstacleNav start=0,-0.5 goal=0,0.5 obstacle=0.1,0 hw=0.3 H=100 tol=0.01 cc=0.05
//   PuddleNav start=0,0 goal=0.2,0.3 puddles=x,y,r;x,y,r;x,y,r H=100 tol=0.01 cc=0.05
inline std::string serialize_task(const TaskSpec& t) {
  using text::format_double;
  auto point = [](Vec2 p) { return format_double(p.x) + "," + format_double(p.y); };
  std::string s(to_string(t.variant));
  s += " start=" + point(t.start) + " goal=" + point(t.goal);
  if (t.obstacle_center)
    s += " obstacle=" + point(*t.obstacle_center) + " hw=" + format_double(t.obstacle_half_width);
  if (!t.puddles.empty()) {
    s += " puddles=";
    for (std::size_t i = 0; i < t.puddles.size(); ++i) {
      if (i) s += ';';
      s += point(t.puddles[i].center) + "," + format_double(t.puddles[i].radius);
    }
  }
  s += " H=" + std::to_string(t.horizon) + " tol=" + format_double(t.goal_tolerance) +
       " cc=" + format_double(t.control_cost_coeff);
  return s;
}

inline TaskSpec parse_task(std::string_view line) {
  auto fail = [&](const std::string& why) {
    return parse_error("task record '" + std::string(line) + "': " + why);
  };
  auto numbers = [&](std::string_view s, std::size_t n) {
    std::vector<double> out;
    for (auto f : text::split(s, ',')) {
      auto v = text::parse_double(f);
      if (!v) throw fail("bad number '" + std::string(f) + "'");
      out.push_back(*v);
    }
    if (out.size() != n) throw fail("expected " + std::to_string(n) + " numbers");
    return out;
  };

  const auto fields = text::tokens(text::trim(line));
  if (fields.empty()) throw fail("empty");
  TaskSpec t;
  if (fields[0] == "GoalNav") t.variant = TaskVariant::GoalNav;
  else if (fields[0] == "ObstacleNav") t.variant = TaskVariant::ObstacleNav;
  else if (fields[0] == "PuddleNav") t.variant = TaskVariant::PuddleNav;
  else throw fail("unknown variant");

  for (std::size_t i = 1; i < fields.size(); ++i) {
    const auto eq = fields[i].find('=');
    if (eq == std::string_view::npos) throw fail("expected key=value");
    const auto key = fields[i].substr(0, eq);
    const auto val = fields[i].substr(eq + 1);
    if (key == "start") {
      auto v = numbers(val, 2);
      t.start = {v[0], v[1]};
    } else if (key == "goal") {
      auto v = numbers(val, 2);
      t.goal = {v[0], v[1]};
    } else if (key == "obstacle") {
      auto v = numbers(val, 2);
      t.obstacle_center = Vec2{v[0], v[1]};
    } else if (key == "hw") {
      t.obstacle_half_width = numbers(val, 1)[0];
    } else if (key == "puddles") {
      for (auto p : text::split(val, ';')) {
        auto v = numbers(p, 3);
        t.puddles.push_back({{v[0], v[1]}, v[2]});
      }
    } else if (key == "H") {
      auto h = text::parse_int<int>(val);
      if (!h) throw fail("bad horizon");
      t.horizon = *h;
    } else if (key == "tol") {
      t.goal_tolerance = numbers(val, 1)[0];
    } else if (key == "cc") {
      t.control_cost_coeff = numbers(val, 1)[0];
    } else {
      throw fail("unknown key '" + std::string(key) + "'");
    }
  }
  return t;
}

}  // namespace iwies
