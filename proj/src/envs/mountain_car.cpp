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

#include "disprod/envs/mountain_car.hpp"

#include <string>
#include <utility>

namespace disprod::envs {

namespace {

ModelInfo mountain_car_info(std::string name, double alpha, int n_redundant) {
  ModelInfo info;
  info.name = std::move(name);
  const std::size_t n_a = 1 + static_cast<std::size_t>(n_redundant);
  info.dims = {2, n_a, 1};
  info.state_names = {"x", "v"};
  info.state_kinds.assign(2, VarKind::kContinuous);
  info.action_names = {"force"};
  for (int i = 0; i < n_redundant; ++i) info.action_names.push_back("redundant_" + std::to_string(i));
  info.action_kinds.assign(n_a, VarKind::kContinuous);
  info.action_bounds.assign(n_a, Bounds{-1.0, 1.0});
  info.alpha = alpha;
  info.horizon_default = 100;
  info.episode_cap = 200;
  info.success_rule = SuccessRule::kReachGoal;
  return info;
}

}  // namespace

MountainCar::MountainCar(std::string name, double alpha, double beta, int n_redundant)
    : ModelBase(mountain_car_info(std::move(name), alpha, n_redundant)),
      alpha_(alpha),
      beta_(beta),
      n_redundant_(n_redundant) {}

std::vector<double> MountainCar::initial_state(Rng& rng) const {
  std::uniform_real_distribution<double> u(-0.6, -0.4);
  const double x = u(rng);
  return {x, 0.0};
}

Outcome MountainCar::classify(std::span<const double> s) const {
  const bool reached = s[0] >= kGoalPosition;
  return {reached, reached};
}

}  // namespace disprod::envs
