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
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "iwies/errors.hpp"
#include "iwies/random.hpp"

namespace iwies {

/// Fully connected ReLU network with a linear, clipped output head.
struct MlpArchitecture {
  std::size_t input_dim = 2;
  std::vector<std::size_t> hidden = {128, 128};
  std::size_t output_dim = 2;
  double action_clip = 0.1;

  /// input_dim, hidden..., output_dim
  std::vector<std::size_t> layer_sizes() const {
    std::vector<std::size_t> sizes;
    sizes.reserve(hidden.size() + 2);
    sizes.push_back(input_dim);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(output_dim);
    return sizes;
  }

  void validate() const {
    if (input_dim == 0 || output_dim == 0)
      throw config_error("architecture: input and output dims must be positive");
    for (auto h : hidden)
      if (h == 0) throw config_error("architecture: hidden widths must be positive");
    if (!(action_clip > 0.0) || !std::isfinite(action_clip))
      throw config_error("architecture: action_clip must be positive and finite");
  }

  std::size_t widest() const {
    std::size_t w = std::max(input_dim, output_dim);
    for (auto h : hidden) w = std::max(w, h);
    return w;
  }

  friend bool operator==(const MlpArchitecture&, const MlpArchitecture&) = default;
};

inline std::size_t param_count(const MlpArchitecture& arch) {
  arch.validate();
  const auto sizes = arch.layer_sizes();
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
    n += (sizes[l] + 1) * sizes[l + 1];
  return n;
}

/// Flat search point. Layer l occupies fan_out * fan_in weights (row-major,
/// one row per output unit) followed by fan_out biases.
class ParameterVector {
 public:
  ParameterVector() = default;
  explicit ParameterVector(std::size_t n, double fill = 0.0) : values_(n, fill) {}
  explicit ParameterVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const ParameterVector&, const ParameterVector&) = default;

 private:
  std::vector<double> values_;
};

/// Glorot-uniform weights. Biases are uniform in
/// [-bias_scale / sqrt(fan_in), bias_scale / sqrt(fan_in)], exactly zero when
/// bias_scale is 0.
inline ParameterVector init_random(const MlpArchitecture& arch, std::uint64_t seed,
                                   double bias_scale = 0.0) {
  if (!(bias_scale >= 0.0) || !std::isfinite(bias_scale))
    throw input_error("init_random: bias_scale must be finite and nonnegative");
  arch.validate();
  ParameterVector theta(param_count(arch));
  auto rng = make_stream(seed, /*tag=*/0x1417);
  const auto sizes = arch.layer_sizes();
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t fan_in = sizes[l];
    const std::size_t fan_out = sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t k = 0; k < fan_in * fan_out; ++k)
      theta[offset++] = rng.uniform(-limit, limit);
    const double bias_limit = bias_scale / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t k = 0; k < fan_out; ++k)
      theta[offset++] = bias_scale == 0.0 ? 0.0 : rng.uniform(-bias_limit, bias_limit);
  }
  return theta;
}

/// Scratch buffers for allocation-free forward passes.
class MlpWorkspace {
 public:
  explicit MlpWorkspace(const MlpArchitecture& arch)
      : a_(arch.widest()), b_(arch.widest()) {}

  std::span<double> front() { return a_; }
  std::span<double> back() { return b_; }
  void swap() { a_.swap(b_); }

 private:
  std::vector<double> a_, b_;
};

/// Writes the clipped action for `state` into `action`. No allocation.
inline void forward_into(const MlpArchitecture& arch, std::span<const double> theta,
                         std::span<const double> state, std::span<double> action,
                         MlpWorkspace& ws) {
  if (state.size() != arch.input_dim)
    throw input_error("forward: state has " + std::to_string(state.size()) +
                      " entries, architecture expects " +
                      std::to_string(arch.input_dim));
  if (action.size() != arch.output_dim)
    throw input_error("forward: action buffer has wrong length");
  if (theta.size() != param_count(arch))
    throw input_error("forward: parameter vector has " +
                      std::to_string(theta.size()) + " entries, expected " +
                      std::to_string(param_count(arch)));

  std::copy(state.begin(), state.end(), ws.front().begin());
  std::size_t fan_in = arch.input_dim;
  const double* p = theta.data();
  const std::size_t layers = arch.hidden.size() + 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const bool last = l + 1 == layers;
    const std::size_t fan_out = last ? arch.output_dim : arch.hidden[l];
    const double* in = ws.front().data();
    double* out = ws.back().data();
    const double* bias = p + fan_in * fan_out;
    for (std::size_t o = 0; o < fan_out; ++o) {
      const double* row = p + o * fan_in;
      // Four interleaved partial sums; the summation order is fixed.
      double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
      std::size_t i = 0;
      for (; i + 4 <= fan_in; i += 4) {
        s0 += row[i] * in[i];
        s1 += row[i + 1] * in[i + 1];
        s2 += row[i + 2] * in[i + 2];
        s3 += row[i + 3] * in[i + 3];
      }
      for (; i < fan_in; ++i) s0 += row[i] * in[i];
      const double acc = ((s0 + s1) + (s2 + s3)) + bias[o];
      out[o] = (!last && acc < 0.0) ? 0.0 : acc;
    }
    p = bias + fan_out;
    fan_in = fan_out;
    ws.swap();
  }
  const double clip = arch.action_clip;
  const double* result = ws.front().data();
  for (std::size_t k = 0; k < arch.output_dim; ++k)
    action[k] = std::clamp(result[k], -clip, clip);
}

inline std::vector<double> forward(const MlpArchitecture& arch,
                                   const ParameterVector& theta,
                                   std::span<const double> state) {
  MlpWorkspace ws(arch);
  std::vector<double> action(arch.output_dim);
  forward_into(arch, theta.span(), state, action, ws);
  return action;
}

/// theta + sigma * eps, elementwise.
inline ParameterVector perturb(const ParameterVector& theta,
                               std::span<const double> eps, double sigma) {
  if (eps.size() != theta.size())
    throw input_error("perturb: noise length " + std::to_string(eps.size()) +
                      " does not match parameter length " +
                      std::to_string(theta.size()));
  ParameterVector z(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) z[i] = theta[i] + sigma * eps[i];
  return z;
}

}  // namespace iwies
