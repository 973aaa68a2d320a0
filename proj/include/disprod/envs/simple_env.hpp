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

#include "disprod/envs/model.hpp"

namespace disprod::envs {

// Two-dimensional point mass where every partial that the propagation uses
// is non-zero:
//   x' = x + dx + alpha (0.1 eps + eps^2)
//   y' = y + dy
// Reward: sigmoid(10 (r^2 - |p - goal|^2)), a smoothed 0-1 goal indicator.
class SimpleEnv final : public ModelBase<SimpleEnv> {
 public:
  static constexpr double kGoalX = 4.0;
  static constexpr double kGoalY = 4.0;
  static constexpr double kGoalRadius = 0.5;
  static constexpr double kMaxStep = 0.5;

  explicit SimpleEnv(double alpha);

  template <class X>
  void dynamics(std::span<const X> s, std::span<const X> a, std::span<const X> eps,
                std::span<X> out) const {
    out[0] = s[0] + a[0] + (eps[0] * 0.1 + eps[0] * eps[0]) * alpha_;
    out[1] = s[1] + a[1];
  }

  template <class X>
  X reward_fn(std::span<const X> s, std::span<const X> a) const {
    (void)a;
    const X dx = s[0] - kGoalX;
    const X dy = s[1] - kGoalY;
    return ad::smooth_ge(-(dx * dx + dy * dy), -kGoalRadius * kGoalRadius, 1.0);
  }

  std::vector<double> initial_state(Rng& rng) const override;
  Outcome classify(std::span<const double> s) const override;
  std::optional<std::pair<std::size_t, std::size_t>> position_indices() const override {
    return std::pair<std::size_t, std::size_t>{0, 1};
  }
  std::optional<std::pair<double, double>> goal_position() const override {
    return std::pair<double, double>{kGoalX, kGoalY};
  }

 private:
  double alpha_;
};

}  // namespace disprod::envs
