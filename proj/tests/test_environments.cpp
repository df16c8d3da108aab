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

#include <gtest/gtest.h>

#include "iwies/iwies.hpp"

namespace iwies {
namespace {

TaskSpec goal_task(Vec2 goal) {
  TaskSpec t = base_task(TaskVariant::GoalNav);
  t.goal = goal;
  return t;
}

TEST(Reset, FixedStarts) {
  EXPECT_EQ(reset(base_task(TaskVariant::GoalNav)), (Vec2{0.0, 0.0}));
  EXPECT_EQ(reset(base_task(TaskVariant::ObstacleNav)), (Vec2{0.0, -0.5}));
  EXPECT_EQ(base_task(TaskVariant::ObstacleNav).goal, (Vec2{0.0, 0.5}));
}

TEST(Step, RewardHandValue) {
  const auto r = step(goal_task({0.3, 0.3}), {0.0, 0.0}, {0.1, 0.1});
  EXPECT_NEAR(r.next_state.x, 0.1, 1e-15);
  EXPECT_NEAR(r.next_state.y, 0.1, 1e-15);
  EXPECT_NEAR(r.reward, -0.081, 1e-12);
  EXPECT_FALSE(r.done);
}

TEST(Step, AtGoalWithZeroAction) {
  const auto r = step(goal_task({0.3, 0.3}), {0.3, 0.3}, {0.0, 0.0});
  EXPECT_EQ(r.reward, 0.0);
  EXPECT_TRUE(r.done);
}

TEST(Step, ObstacleBounce) {
  TaskSpec t = base_task(TaskVariant::ObstacleNav);
  t.obstacle_center = Vec2{0.0, 0.0};
  const Vec2 s{0.0, -0.32};
  const auto r = step(t, s, {0.0, 0.05});
  EXPECT_EQ(r.next_state, s);
}

TEST(Step, ClipsAtWalls) {
  const auto r = step(goal_task({0.0, 0.0}), {0.45, -0.48}, {0.1, -0.1});
  EXPECT_EQ(r.next_state, (Vec2{0.5, -0.5}));
}

TEST(Step, PuddleBlocks) {
  TaskSpec t = goal_task({0.4, 0.4});
  t.puddles = {{{0.2, 0.0}, 0.08}};
  const Vec2 s{0.05, 0.0};
  EXPECT_EQ(step(t, s, {0.1, 0.0}).next_state, s);
  EXPECT_NE(step(t, s, {0.0, 0.1}).next_state, s);
}

TEST(Step, RejectsNonFiniteAction) {
  EXPECT_THROW(step(goal_task({0.1, 0.1}), {0, 0}, {std::nan(""), 0.0}), Error);
}

TEST(Step, RewardNonPositiveAndBounceProperty) {
  auto rng = make_stream(4);
  for (int k = 0; k < 2000; ++k) {
    TaskSpec t = base_task(TaskVariant::ObstacleNav);
    t.obstacle_center = Vec2{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
    const Vec2 s{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    const Vec2 a{rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)};
    const auto r = step(t, s, a);
    EXPECT_LE(r.reward, 0.0);
    EXPECT_TRUE(kArena.contains(r.next_state));
    if (t.blocked(clip_to_arena(s + a))) {
      EXPECT_EQ(r.next_state, s);
    }
  }
}

TEST(SampleTask, DeterministicPerSeed) {
  for (auto kind : {TaskVariant::GoalNav, TaskVariant::ObstacleNav, TaskVariant::PuddleNav}) {
    EXPECT_EQ(sample_task(kind, 12), sample_task(kind, 12));
    EXPECT_NE(sample_task(kind, 12), sample_task(kind, 13));
  }
}

TEST(SampleTask, GoalRespectsRegion) {
  const Rect first_quadrant{0.0, 0.5, 0.0, 0.5};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto t = sample_task(TaskVariant::GoalNav, seed, first_quadrant);
    EXPECT_GE(t.goal.x, 0.0);
    EXPECT_GE(t.goal.y, 0.0);
    EXPECT_EQ(t.start, (Vec2{0.0, 0.0}));
  }
}

TEST(SampleTask, ObstacleStaysInArenaAndClearOfEndpoints) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto t = sample_task(TaskVariant::ObstacleNav, seed);
    ASSERT_TRUE(t.obstacle_center);
    EXPECT_LE(std::abs(t.obstacle_center->x), 0.2 + 1e-12);
    EXPECT_LE(std::abs(t.obstacle_center->y), 0.2 + 1e-12);
    EXPECT_NO_THROW(t.validate());
  }
}

TEST(SampleTask, PuddlesAvoidStartAndGoal) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto t = sample_task(TaskVariant::PuddleNav, seed);
    ASSERT_EQ(t.puddles.size(), 3u);
    for (const auto& p : t.puddles) {
      EXPECT_FALSE(p.covers(t.start));
      EXPECT_FALSE(p.covers(t.goal));
    }
    EXPECT_NO_THROW(t.validate());
  }
}

TEST(SampleTask, InfeasibleRegion) {
  // an obstacle of half-width 0.3 cannot be centered near the wall
  EXPECT_THROW(sample_task(TaskVariant::ObstacleNav, 1, Rect{0.4, 0.5, 0.4, 0.5}), Error);
  // every placement covers the start
  try {
    sample_task(TaskVariant::ObstacleNav, 1, Rect{-0.1, 0.1, -0.2, -0.2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Sampling);
  }
  EXPECT_THROW(sample_task(TaskVariant::GoalNav, 1, Rect{0.0, 0.9, 0.0, 0.1}), Error);
}

TEST(Rollout, ZeroPolicyClosedForm) {
  const MlpArchitecture arch;
  const ParameterVector theta(param_count(arch));
  const auto trace = rollout(goal_task({0.3, 0.3}), arch, theta);
  EXPECT_EQ(trace.steps(), 100u);
  EXPECT_NEAR(trace.episode_return, -18.0, 1e-9);
  for (const auto& s : trace.states) EXPECT_EQ(s, (Vec2{0.0, 0.0}));
}

TEST(Rollout, EarlyTerminationTruncatesTrace) {
  // constant action (0.1, 0) from a 1 -> bias-only head: reaches x = 0.3 in 3 steps
  MlpArchitecture arch;
  arch.hidden = {1};
  ParameterVector theta(param_count(arch));
  theta[theta.size() - 2] = 0.1;  // output bias x
  const auto trace = rollout(goal_task({0.3, 0.0}), arch, theta);
  EXPECT_EQ(trace.steps(), 3u);
  EXPECT_EQ(trace.states.size(), 4u);
  EXPECT_GE(trace.episode_return, -100.0);
}

TEST(Rollout, DeterministicAndBounded) {
  const MlpArchitecture arch;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto theta = init_random(arch, seed);
    const auto task = sample_task(TaskVariant::ObstacleNav, seed);
    const auto a = rollout(task, arch, theta);
    const auto b = rollout(task, arch, theta);
    EXPECT_EQ(a.states, b.states);
    EXPECT_EQ(a.rewards, b.rewards);
    EXPECT_LE(a.rewards.size(), 100u);
    for (double r : a.rewards) EXPECT_LE(std::abs(r), 100.0);
    for (const auto& s : a.states) EXPECT_TRUE(kArena.contains(s));
  }
}

TEST(TaskRecord, RoundTrip) {
  for (auto kind : {TaskVariant::GoalNav, TaskVariant::ObstacleNav, TaskVariant::PuddleNav}) {
    const auto t = sample_task(kind, 77);
    EXPECT_EQ(parse_task(serialize_task(t)), t) << serialize_task(t);
  }
  EXPECT_THROW(parse_task("GoalNav start=0 goal=0,0"), Error);
  EXPECT_THROW(parse_task("Swamp start=0,0 goal=0,0"), Error);
}

}  // namespace
}  // namespace iwies
