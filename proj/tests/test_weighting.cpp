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

#include <numeric>

#include "iwies/iwies.hpp"

namespace iwies {
namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Direct softmax without max-subtraction, for comparison on small values.
std::vector<double> reference_softmax(const std::vector<double>& v, double rho) {
  std::vector<double> e(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) total += e[i] = std::exp(v[i] / rho);
  for (double& x : e) x *= static_cast<double>(v.size()) / total;
  return e;
}

TEST(Softmax, HandValues) {
  const auto w = softmax_weights(std::vector<double>{0, 1, 2}, 1.0);
  EXPECT_NEAR(w[0], 0.27009171951114136, 1e-12);
  EXPECT_NEAR(w[1], 0.734185413164393, 1e-12);
  EXPECT_NEAR(w[2], 1.9957228673244656, 1e-12);
  EXPECT_NEAR(sum(w), 3.0, 1e-12);
}

TEST(Softmax, EqualValuesGiveOnes) {
  for (double w : softmax_weights(std::vector<double>(5, -3.25), 0.7)) EXPECT_DOUBLE_EQ(w, 1.0);
}

TEST(Softmax, HugeTemperatureIsNearlyUniform) {
  for (double w : softmax_weights(std::vector<double>{-50, 0, 3, 80}, 1e9))
    EXPECT_NEAR(w, 1.0, 1e-6);
}

TEST(Softmax, LargeValuesDoNotOverflow) {
  const auto w = softmax_weights(std::vector<double>{1e4, 1e4 - 1, -1e4}, 1.0);
  EXPECT_TRUE(std::all_of(w.begin(), w.end(), [](double x) { return std::isfinite(x); }));
  EXPECT_NEAR(sum(w), 3.0, 1e-12);
}

TEST(Softmax, Errors) {
  EXPECT_THROW(softmax_weights(std::vector<double>{}, 1.0), Error);
  EXPECT_THROW(softmax_weights(std::vector<double>{1, 2}, 0.0), Error);
  EXPECT_THROW(softmax_weights(std::vector<double>{1, 2}, -1.0), Error);
  EXPECT_THROW(softmax_weights(std::vector<double>{1, std::nan("")}, 1.0), Error);
}

TEST(Softmax, Properties) {
  auto rng = make_stream(8);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 1 + rng() % 40;
    std::vector<double> v(m);
    for (double& x : v) x = rng.uniform(-5, 5);
    const double rho = rng.uniform(0.05, 5.0);
    const auto w = softmax_weights(v, rho);

    EXPECT_NEAR(sum(w), static_cast<double>(m), 1e-9 * static_cast<double>(m));
    const auto ref = reference_softmax(v, rho);
    for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(w[i], ref[i], 1e-9 * (1 + ref[i]));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (v[i] > v[j]) {
          EXPECT_GT(w[i], w[j]);
        }

    std::vector<double> shifted(v);
    const double c = rng.uniform(-100, 100);
    for (double& x : shifted) x += c;
    const auto ws = softmax_weights(shifted, rho);
    for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(ws[i], w[i], 1e-9 * (1 + w[i]));

    auto spread = [](const std::vector<double>& x) {
      double s = 0.0;
      for (double y : x) s = std::max(s, std::abs(y - 1.0));
      return s;
    };
    EXPECT_LE(spread(softmax_weights(v, rho * 1.5)), spread(w) + 1e-12);
  }
}

TEST(MinMax, Examples) {
  EXPECT_EQ(min_max_normalize(std::vector<double>{-2, -1}), (std::vector<double>{0, 1}));
  EXPECT_EQ(min_max_normalize(std::vector<double>{4}), (std::vector<double>{0}));
  EXPECT_EQ(min_max_normalize(std::vector<double>{1, 1, 1}), (std::vector<double>{0, 0, 0}));
  const auto n = min_max_normalize(std::vector<double>{0, 2, 8});
  EXPECT_DOUBLE_EQ(n[1], 0.25);
}

TEST(Mix, NormalizedProduct) {
  const PopulationMetrics pm{{0, 1}, {-2, -1}};
  EXPECT_EQ(mix_values(pm, true), (std::vector<double>{0, 1}));
  EXPECT_EQ(mix_values(pm, false), (std::vector<double>{0, -1}));
  const PopulationMetrics single{{3}, {-7}};
  EXPECT_EQ(mix_values(single, true), (std::vector<double>{0}));
}

TEST(Mix, NormalizedOutputsInUnitInterval) {
  auto rng = make_stream(17);
  for (int trial = 0; trial < 200; ++trial) {
    PopulationMetrics pm;
    for (int i = 0; i < 16; ++i) {
      pm.novelty.push_back(rng.uniform(0, 3));
      pm.quality.push_back(rng.uniform(-100, 0));
    }
    for (double v : mix_values(pm, true)) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(ComputeWeights, MetricDispatch) {
  const PopulationMetrics pm{{0.0, 0.5, 2.0}, {-4.0, -3.0, -2.0}};
  WeightingConfig cfg;
  cfg.metric = WeightMetric::Uniform;
  EXPECT_EQ(compute_weights(pm, cfg, 0.3), (std::vector<double>{1, 1, 1}));

  cfg.metric = WeightMetric::Novelty;
  EXPECT_EQ(compute_weights(pm, cfg, 1.0), softmax_weights(std::vector<double>{0, 0.25, 1}, 1.0));
  cfg.metric = WeightMetric::Quality;
  EXPECT_EQ(compute_weights(pm, cfg, 1.0), softmax_weights(std::vector<double>{0, 0.5, 1}, 1.0));
  cfg.metric = WeightMetric::Mix;
  const auto w = compute_weights(pm, cfg, 1.0);
  EXPECT_EQ(w, softmax_weights(std::vector<double>{0, 0.125, 1}, 1.0));
  EXPECT_NEAR(sum(w), 3.0, 1e-12);

  cfg.metric = WeightMetric::Novelty;
  EXPECT_EQ(compute_weights(PopulationMetrics{{2, 2, 2}, {0, 1, 2}}, cfg, 1.0),
            (std::vector<double>{1, 1, 1}));
  cfg.normalize_metrics = false;
  EXPECT_EQ(compute_weights(pm, cfg, 1.0), softmax_weights(pm.novelty, 1.0));
}

TEST(ComputeWeights, RejectsMismatchedMetrics) {
  WeightingConfig cfg;
  cfg.metric = WeightMetric::Mix;
  EXPECT_THROW(compute_weights(PopulationMetrics{{1, 2}, {1}}, cfg, 1.0), Error);
}

TEST(Anneal, Increments) {
  EXPECT_DOUBLE_EQ(anneal(1.0, 0.01), 1.01);
  EXPECT_EQ(anneal(0.4, 0.0), 0.4);
}

}  // namespace
}  // namespace iwies
