// Copyright 2026 The disprod Authors
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
#include <string>
#include <vector>

#include "disprod/envs/model.hpp"

namespace disprod::envs {

struct Obstacle {
  enum class Kind { kCircle, kRect };
  Kind kind = Kind::kCircle;
  double cx = 0.0, cy = 0.0, radius = 0.0;      // circle
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;  // axis-aligned rectangle

  // Exact penetration depth (> 0 inside).
  double penetration(double x, double y) const;
};

struct DubinsMap {
  std::string name;
  double start_x = 0.0, start_y = 0.0, start_theta = 0.0;
  double goal_x = 0.0, goal_y = 0.0;
  double goal_radius = 0.5;
  std::vector<Obstacle> obstacles;
};

// Map files are JSON:
//   {"name": "...", "start": [x, y, theta], "goal": [x, y], "goal_radius": r,
//    "obstacles": [{"type": "circle", "center": [x, y], "radius": r},
//                  {"type": "rect", "min": [x, y], "max": [x, y]}]}
DubinsMap parse_map(const std::string& text, const std::string& origin = "<string>");
DubinsMap load_map(const std::string& path);
std::string serialize_map(const DubinsMap& map);
// Resolves a bundled map name ("no-ob-1") or a path to a .json file.
DubinsMap find_map(const std::string& name_or_path);
std::vector<std::string> bundled_map_names();
std::string maps_directory();

// Planar car whose controls are changes of linear and angular velocity:
//   v' = v + dv,  w' = w + dw
//   x' = x + v' cos(theta) dt + alpha eps_0,  y' = y + v' sin(theta) dt + alpha eps_1
//   theta' = theta + w' dt
// Noise only displaces the position, so |v' - v| <= max_dv holds for any alpha.
// The transition ignores obstacles; the reward sees them:
//   R = -dist(goal) - C * softplus(k * depth) / k, summed over obstacles.
class Dubins final : public ModelBase<Dubins> {
 public:
  static constexpr double kDt = 0.2;
  static constexpr double kMaxDeltaV = 0.2;
  static constexpr double kMaxDeltaW = 0.5;
  static constexpr double kCollisionCost = 10.0;
  static constexpr double kPenetrationSharpness = 20.0;
  static constexpr double kDistanceSmoothing = 0.05;

  Dubins(DubinsMap map, double alpha, double max_dv = kMaxDeltaV, double max_dw = kMaxDeltaW);

  const DubinsMap& map() const { return map_; }

  template <class X>
  void dynamics(std::span<const X> s, std::span<const X> a, std::span<const X> eps,
                std::span<X> out) const {
    using namespace ad;
    const X v = s[3] + a[0];
    const X w = s[4] + a[1];
    out[0] = s[0] + v * cos(s[2]) * kDt + eps[0] * alpha_;
    out[1] = s[1] + v * sin(s[2]) * kDt + eps[1] * alpha_;
    out[2] = s[2] + w * kDt;
    out[3] = v;
    out[4] = w;
  }

  template <class X>
  X reward_fn(std::span<const X> s, std::span<const X> a) const {
    using namespace ad;
    (void)a;
    const X dx = s[0] - map_.goal_x;
    const X dy = s[1] - map_.goal_y;
    X r = -sqrt(dx * dx + dy * dy + kDistanceSmoothing * kDistanceSmoothing);
    for (const Obstacle& o : map_.obstacles) {
      r = r - softplus(smooth_penetration(o, s[0], s[1]) * kPenetrationSharpness) *
                  (kCollisionCost / kPenetrationSharpness);
    }
    return r;
  }

  std::vector<double> initial_state(Rng& rng) const override;
  Outcome classify(std::span<const double> s) const override;
  std::optional<std::pair<std::size_t, std::size_t>> position_indices() const override {
    return std::pair<std::size_t, std::size_t>{0, 1};
  }
  std::optional<std::pair<double, double>> goal_position() const override {
    return std::pair<double, double>{map_.goal_x, map_.goal_y};
  }
  double goal_radius() const override { return map_.goal_radius; }

 private:
  template <class X>
  static X smooth_penetration(const Obstacle& o, const X& x, const X& y) {
    using namespace ad;
    if (o.kind == Obstacle::Kind::kCircle) {
      const X dx = x - o.cx;
      const X dy = y - o.cy;
      return o.radius - sqrt(dx * dx + dy * dy + kDistanceSmoothing * kDistanceSmoothing);
    }
    // Soft minimum of the four signed side distances.
    const double k = kPenetrationSharpness;
    const X args[4] = {(x - o.x0) * (-k), (o.x1 - x) * (-k), (y - o.y0) * (-k),
                       (o.y1 - y) * (-k)};
    double shift = primal(args[0]);
    for (const X& z : args) shift = std::max(shift, primal(z));
    X sum = exp(args[0] - shift);
    for (int i = 1; i < 4; ++i) sum = sum + exp(args[i] - shift);
    return (log(sum) + shift) * (-1.0 / k);
  }

  DubinsMap map_;
  double alpha_;
};

}  // namespace disprod::envs
