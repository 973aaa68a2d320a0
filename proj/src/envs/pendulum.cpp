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

#include "disprod/envs/pendulum.hpp"

#include <cmath>

namespace disprod::envs {

namespace {

ModelInfo pendulum_info(double alpha) {
  ModelInfo info;
  info.name = "pendulum";
  info.dims = {2, 1, 1};
  info.state_names = {"theta", "theta_dot"};
  info.state_kinds.assign(2, VarKind::kContinuous);
  info.action_names = {"torque"};
  info.action_kinds = {VarKind::kContinuous};
  info.action_bounds = {{-Pendulum::kMaxTorque, Pendulum::kMaxTorque}};
  info.alpha = alpha;
  info.horizon_default = 25;
  info.episode_cap = 200;
  info.success_rule = SuccessRule::kNone;
  return info;
}

}  // namespace

Pendulum::Pendulum(double alpha, PendulumNoise noise)
    : ModelBase(pendulum_info(alpha)), alpha_(alpha), noise_(noise) {}

std::vector<double> Pendulum::initial_state(Rng& rng) const {
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> speed(-1.0, 1.0);
  const double theta = angle(rng);
  return {theta, speed(rng)};
}

ad::PartialsBundle<double> pendulum_analytic_partials(const Pendulum& model,
                                                      std::span<const double> state,
                                                      std::span<const double> action,
                                                      std::span<const double> eps) {
  constexpr double dt = Pendulum::kDt;
  constexpr double c1 = Pendulum::kC1;
  constexpr double c2 = Pendulum::kC2;
  const double theta = state[0];
  const double theta_dot = state[1];
  const double a = action[0];
  const double e = eps[0];
  const double alpha = model.alpha();

  ad::PartialsBundle<double> p(model.dims());
  const double theta_dot_next = theta_dot + (-c1 * std::sin(theta + Pendulum::kPi) + c2 * a) * dt;
  const bool exp_noise = model.noise() == PendulumNoise::kExp;
  const double noise = exp_noise ? alpha * std::exp(e) : alpha * e;
  p.value = {theta + (theta_dot_next + noise) * dt, theta_dot_next};

  const double cos_term = std::cos(theta + Pendulum::kPi);
  const double sin_term = std::sin(theta + Pendulum::kPi);
  p.j_s(0, 0) = 1.0 - c1 * cos_term * dt * dt;
  p.j_s(0, 1) = dt;
  p.j_s(1, 0) = -c1 * cos_term * dt;
  p.j_s(1, 1) = 1.0;

  p.j_a(0, 0) = c2 * dt * dt;
  p.j_a(1, 0) = c2 * dt;

  p.j_eps(0, 0) = exp_noise ? alpha * std::exp(e) * dt : alpha * dt;
  p.j_eps(1, 0) = 0.0;

  p.h_s(0, 0) = c1 * sin_term * dt * dt;
  p.h_s(0, 1) = 0.0;
  p.h_s(1, 0) = c1 * sin_term * dt;
  p.h_s(1, 1) = 0.0;

  p.h_a(0, 0) = 0.0;
  p.h_a(1, 0) = 0.0;

  p.h_eps(0, 0) = exp_noise ? alpha * std::exp(e) * dt : 0.0;
  p.h_eps(1, 0) = 0.0;
  return p;
}

}  // namespace disprod::envs
