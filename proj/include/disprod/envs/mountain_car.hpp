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

#include <cmath>

#include "disprod/envs/model.hpp"

namespace disprod::envs {

// Continuous mountain car.
//   v' = clamp(v + u * power - 0.0025 cos(3x)) + alpha * eps
//   x' = clamp(x + v')
// Clamps are smooth (softplus) so the same function serves as simulator and
// model. Reward: 100 * smooth_ge(x, goal, beta) - 0.1 u^2, minus
// 0.1 * sum(r_i^2) over the redundant action variables r_i, which never
// enter the dynamics.
class MountainCar final : public ModelBase<MountainCar> {
 public:
  static constexpr double kMinPosition = -1.2;
  static constexpr double kMaxPosition = 0.6;
  static constexpr double kMaxSpeed = 0.07;
  static constexpr double kGoalPosition = 0.45;
  static constexpr double kPower = 0.0015;
  static constexpr double kGoalReward = 100.0;
  static constexpr double kActionCost = 0.1;
  static constexpr double kRedundantCost = 0.1;
  static constexpr double kSpeedSharpness = 2000.0;
  static constexpr double kPositionSharpness = 200.0;

  MountainCar(std::string name, double alpha, double beta, int n_redundant);

  double beta() const { return beta_; }
  int n_redundant() const { return n_redundant_; }

  template <class X>
  void dynamics(std::span<const X> s, std::span<const X> a, std::span<const X> eps,
                std::span<X> out) const {
    using namespace ad;
    const X v_det = s[1] + a[0] * kPower - cos(s[0] * 3.0) * 0.0025;
    const X v = smooth_clamp(v_det, -kMaxSpeed, kMaxSpeed, kSpeedSharpness) + eps[0] * alpha_;
    out[0] = smooth_clamp(s[0] + v, kMinPosition, kMaxPosition, kPositionSharpness);
    out[1] = v;
  }

  template <class X>
  X reward_fn(std::span<const X> s, std::span<const X> a) const {
    using namespace ad;
    X r = smooth_ge(s[0], kGoalPosition, beta_) * kGoalReward - a[0] * a[0] * kActionCost;
    for (std::size_t i = 1; i < a.size(); ++i) r = r - a[i] * a[i] * kRedundantCost;
    return r;
  }

  std::vector<double> initial_state(Rng& rng) const override;
  Outcome classify(std::span<const double> s) const override;
  bool transition_uses_action(std::size_t k) const override { return k == 0; }

 private:
  double alpha_;
  double beta_;
  int n_redundant_;
};

}  // namespace disprod::envs
