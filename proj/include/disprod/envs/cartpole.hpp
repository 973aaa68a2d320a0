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

// Continuous cart-pole with the classic-control constants. The applied force
// is kForceMag * a + alpha * eps. The reward is a smoothed survival
// indicator: the product of soft within-bounds gates on x and theta.
//
// The hybrid variant appends a binary state variable that is 1 when the cart
// is right of the reward marker; the step reward is 3 when it is set, else 1.
// The simulator sets it with the exact indicator, the encapsulated model with
// smooth_ge so the propagated value stays a probability.
class CartPole final : public ModelBase<CartPole> {
 public:
  static constexpr double kGravity = 9.8;
  static constexpr double kMassCart = 1.0;
  static constexpr double kMassPole = 0.1;
  static constexpr double kTotalMass = kMassCart + kMassPole;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kPoleMassLength = kMassPole * kHalfLength;
  static constexpr double kForceMag = 10.0;
  static constexpr double kTau = 0.02;
  static constexpr double kXThreshold = 2.4;
  static constexpr double kThetaThreshold = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
  static constexpr double kRewardMarker = 0.5;
  static constexpr double kMarkerSharpness = 5.0;  // beta of the smooth marker indicator

  CartPole(double alpha, bool hybrid);

  bool hybrid() const { return hybrid_; }

  template <class X>
  void dynamics(std::span<const X> s, std::span<const X> a, std::span<const X> eps,
                std::span<X> out) const {
    using namespace ad;
    const X& x = s[0];
    const X& x_dot = s[1];
    const X& theta = s[2];
    const X& theta_dot = s[3];
    const X force = a[0] * kForceMag + eps[0] * alpha_;
    const X cos_t = cos(theta);
    const X sin_t = sin(theta);
    const X temp = (force + theta_dot * theta_dot * sin_t * kPoleMassLength) * (1.0 / kTotalMass);
    const X theta_acc = (sin_t * kGravity - cos_t * temp) /
                        ((4.0 / 3.0 - cos_t * cos_t * (kMassPole / kTotalMass)) * kHalfLength);
    const X x_acc = temp - theta_acc * cos_t * (kPoleMassLength / kTotalMass);
    out[0] = x + x_dot * kTau;
    out[1] = x_dot + x_acc * kTau;
    out[2] = theta + theta_dot * kTau;
    out[3] = theta_dot + theta_acc * kTau;
    if (hybrid_) out[4] = smooth_ge(out[0], kRewardMarker, kMarkerSharpness);
  }

  template <class X>
  X reward_fn(std::span<const X> s, std::span<const X> a) const {
    (void)a;
    X r = within(s[0], kXThreshold) * within(s[2], kThetaThreshold);
    if (hybrid_) r = r * (s[4] * 2.0 + 1.0);
    return r;
  }

  std::vector<double> initial_state(Rng& rng) const override;
  void simulate(std::span<const double> s, std::span<const double> a,
                std::span<const double> eps, std::span<double> out) const override;
  Outcome classify(std::span<const double> s) const override;

 private:
  // Soft indicator of |v| < limit, 0.5 at the boundary.
  template <class X>
  static X within(const X& v, double limit) {
    const double beta = 1.0 / limit;
    return ad::smooth_ge(v, -limit, beta) * ad::smooth_ge(-v, -limit, beta);
  }

  double alpha_;
  bool hybrid_;
};

}  // namespace disprod::envs
