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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "iwies/iwies.hpp"

namespace iwies {
namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.runs = 2;
  c.generations_per_phase = 3;
  c.phase1_generations = 4;
  c.es.m = 4;
  c.es.policy.hidden = {8, 8};
  c.methods = {Method::FS, Method::CA, Method::IwiesMix};
  return c;
}

TEST(Config, EmptyFileGivesDefaults) {
  std::istringstream in("# nothing here\n\n");
  const auto c = parse_config(in);
  EXPECT_EQ(c.task_kind, TaskVariant::GoalNav);
  EXPECT_EQ(c.adapt_generations(), 200u);
  EXPECT_EQ(c.runs, 10u);
  EXPECT_EQ(c.es.m, 16u);
  EXPECT_EQ(c.es.sigma, 0.05);
  EXPECT_EQ(c.methods.size(), 5u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, DottedKeys) {
  std::istringstream in(
      "task = case2\n"
      "es.sigma = 0.1   # wider noise\n"
      "es.workers = 4\n"
      "weighting.rho0 = 2.5\n"
      "weighting.normalize = false\n"
      "methods = ca, iwies-mix\n"
      "region.phase2 = 0,0.5,0,0.5\n"
      "policy.hidden = 16,16\n");
  const auto c = parse_config(in);
  EXPECT_EQ(c.task_kind, TaskVariant::ObstacleNav);
  EXPECT_EQ(c.adapt_generations(), 1000u);
  EXPECT_EQ(c.es.sigma, 0.1);
  EXPECT_EQ(c.es.workers, 4u);
  EXPECT_EQ(c.es.weighting.rho0, 2.5);
  EXPECT_FALSE(c.es.weighting.normalize_metrics);
  EXPECT_EQ(c.methods, (std::vector<Method>{Method::CA, Method::IwiesMix}));
  EXPECT_EQ(c.goal_region_phase2.x_min, 0.0);
  EXPECT_EQ(c.es.policy.hidden, (std::vector<std::size_t>{16, 16}));
}

TEST(Config, ErrorsCarryLineNumbers) {
  auto category_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_config(in).validate();
    } catch (const Error& e) {
      return std::make_pair(e.category(), std::string(e.what()));
    }
    return std::make_pair(ErrorCategory::Input, std::string("no error"));
  };
  auto [cat, msg] = category_of("runs = 3\nes.sigmaa = 0.1\n");
  EXPECT_EQ(cat, ErrorCategory::Config);
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_EQ(category_of("es.m = -4\n").first, ErrorCategory::Config);
  EXPECT_EQ(category_of("es.sigma = 0\n").first, ErrorCategory::Config);
  EXPECT_EQ(category_of("region.phase1 = 0,0.7,0,0.5\n").first, ErrorCategory::Config);
  EXPECT_EQ(category_of("just words\n").first, ErrorCategory::Config);
}

TEST(Config, MissingFileIsIoError) {
  try {
    load_config("/nonexistent/iwies.conf");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Io);
    EXPECT_EQ(e.exit_code(), static_cast<int>(ErrorCategory::Io));
  }
}

TEST(Csv, StripWallClock) {
  EXPECT_EQ(strip_wall_clock("a,b,c\n1,2,3.5\n"), "a,b\n1,2\n");
}

TEST(Experiment, ReproducibleCsvBody) {
  const auto a = run_experiment_in_memory(tiny_config());
  const auto b = run_experiment_in_memory(tiny_config());
  EXPECT_EQ(strip_wall_clock(a.csv), strip_wall_clock(b.csv));
  EXPECT_EQ(a.csv.substr(0, kCsvHeader.size()), kCsvHeader);
  // header + 2 runs * (4 shared + 3 methods * 3) rows
  EXPECT_EQ(std::count(a.csv.begin(), a.csv.end(), '\n'), 1 + 2 * (4 + 9));
}

TEST(Experiment, RowsMonotoneInRunAndPhase) {
  const auto out = run_experiment_in_memory(tiny_config());
  std::istringstream in(out.csv);
  std::string line;
  std::getline(in, line);
  std::pair<long, long> last{-1, -1};
  while (std::getline(in, line)) {
    const auto f = text::split(line, ',');
    ASSERT_EQ(f.size(), 10u);
    const std::pair<long, long> key{*text::parse_int(f[0]), *text::parse_int(f[2])};
    EXPECT_GE(key, last);
    last = key;
  }
}

TEST(Experiment, MethodsArePaired) {
  auto c = tiny_config();
  c.runs = 1;
  const auto out = run_experiment_in_memory(c);
  // CA and Mix start phase 2 from the same optimum: identical generation-0 return
  EXPECT_EQ(out.summary.at(Method::CA).jumpstarts, out.summary.at(Method::IwiesMix).jumpstarts);
  EXPECT_EQ(out.summary.at(Method::CA).average_returns.size(), 1u);
}

TEST(Experiment, WritesOutputsAndPartialMarker) {
  const auto dir = std::filesystem::temp_directory_path() / "iwies_harness_test";
  std::filesystem::remove_all(dir);
  auto c = tiny_config();
  c.runs = 1;
  c.output_dir = dir / "ok";
  const auto summary = run_experiment(c);
  EXPECT_TRUE(std::filesystem::exists(c.output_dir / "generations.csv"));
  EXPECT_TRUE(std::filesystem::exists(c.output_dir / "summary.txt"));
  std::ifstream js(c.output_dir / "summary.json");
  const auto j = nlohmann::json::parse(js);
  EXPECT_EQ(j["methods"].size(), 3u);
  EXPECT_EQ(j["task"], "case1");

  c.task_kind = TaskVariant::ObstacleNav;
  c.goal_region_phase1 = {0.45, 0.5, 0.45, 0.5};
  c.output_dir = dir / "fail";
  EXPECT_THROW(run_experiment(c), Error);
  EXPECT_TRUE(std::filesystem::exists(c.output_dir / "PARTIAL"));
  std::filesystem::remove_all(dir);
}

TEST(Timing, ParametersAgreeAcrossWorkerCounts) {
  auto c = tiny_config();
  c.methods = {Method::CA, Method::IwiesN};
  const auto t = timing_sweep(c, {1, 2, 3});
  EXPECT_EQ(t.rows.size(), 6u);
  EXPECT_GE(t.seconds(Method::IwiesN, 3), 0.0);
  EXPECT_NE(format_timing_table(t, {1, 2, 3}, c.methods).find("iwies-n"), std::string::npos);
}

TEST(Stats, PooledStandardError) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(mean(v), 2.5);
  EXPECT_NEAR(sample_stddev(v), std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_NEAR(standard_error(v), std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(pooled_standard_error(3.0, 4.0), 5.0);
}

}  // namespace
}  // namespace iwies
