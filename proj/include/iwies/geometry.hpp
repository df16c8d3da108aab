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

namespace iwies {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double squared_norm(Vec2 v) { return v.x * v.x + v.y * v.y; }
inline double norm(Vec2 v) { return std::sqrt(squared_norm(v)); }

/// Axis-aligned rectangle, bounds inclusive.
struct Rect {
  double x_min = -0.5;
  double x_max = 0.5;
  double y_min = -0.5;
  double y_max = 0.5;

  bool contains(Vec2 p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  bool contains(const Rect& r) const {
    return r.x_min >= x_min && r.x_max <= x_max && r.y_min >= y_min &&
           r.y_max <= y_max;
  }
  bool valid() const { return x_min <= x_max && y_min <= y_max; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

}  // namespace iwies
