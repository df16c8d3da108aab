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

namespace iwies {

inline double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
inline double sample_stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline double standard_error(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  return sample_stddev(v) / std::sqrt(static_cast<double>(v.size()));
}

/// Standard error of a difference of two independent means.
inline double pooled_standard_error(double se_a, double se_b) {
  return std::sqrt(se_a * se_a + se_b * se_b);
}

}  // namespace iwies
