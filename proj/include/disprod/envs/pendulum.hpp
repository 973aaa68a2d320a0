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

enum class PendulumNoise {
  kExp,       // theta' = theta + (theta_dot' + alpha * exp(eps)) * dt
  kAdditive,  // theta' = theta + (theta_dot' + alpha * eps) * dt
};

// Pendulum swing-up, theta = 0 upright.
//   theta_dot' = theta_dot + (-c1 sin(theta + pi) + c2 a) dt
//   theta'     = theta + (theta_dot' + noise) dt
// with c1 = 3g/2l and c2 = 3/(m l^2). No velocity clip, so the model stays
// smooth and the closed-form partials below are exact.
// Reward: -(2(1 - cos theta) + 0.1 theta_dot^2 + 0.001 a^2).
class Pendulum final : public ModelBase<Pendulum> {
 public:
  static constexpr double kGravity = 9.81;
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kDt = 0.05;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kC1 = 3.0 * kGravity / (2.0 * kLength);
  static constexpr double kC2 = 3.0 / (kMass * kLength * kLength);
  static constexpr double kPi = 3.14159265358979323846;

  Pendulum(double alpha, PendulumNoise noise);

  double alpha() const { return alpha_; }
  PendulumNoise noise() const { return noise_; }

  template <class X>
  void dynamics(std::span<const X> s, std::span<const X> a, std::span<const X> eps,
                std::span<X> out) const {
    using namespace ad;
    const X theta_dot_next = s[1] + (sin(s[0] + kPi) * (-kC1) + a[0] * kC2) * kDt;
    const X noise = noise_ == PendulumNoise::kExp ? exp(eps[0]) * alpha_ : eps[0] * alpha_;
    out[0] = s[0] + (theta_dot_next + noise) * kDt;
    out[1] = theta_dot_next;
  }

  template <class X>
  X reward_fn(std::span<const X> s, std::span<const X> a) const {
    using namespace ad;
    return -((1.0 - cos(s[0])) * 2.0 + s[1] * s[1] * 0.1 + a[0] * a[0] * 0.001);
  }

  std::vector<double> initial_state(Rng& rng) const override;

 private:
  double alpha_;
  PendulumNoise noise_;
};

// Closed-form Jacobians and diagonal Hessians of the pendulum transition at
// (state, action, eps). With the additive recipe and alpha = 1 these are
// the textbook matrices: J_eps = [dt, 0], H_a = H_eps = 0.
ad::PartialsBundle<double> pendulum_analytic_partials(const Pendulum& model,
                                                      std::span<const double> state,
                                                      std::span<const double> action,
                                                      std::span<const double> eps);

}  // namespace disprod::envs
