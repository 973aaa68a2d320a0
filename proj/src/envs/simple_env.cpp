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

#include "disprod/envs/simple_env.hpp"

#include <cmath>

namespace disprod::envs {

namespace {

ModelInfo simple_info(double alpha) {
  ModelInfo info;
  info.name = "simple_env";
  info.dims = {2, 2, 1};
  info.state_names = {"x", "y"};
  info.state_kinds.assign(2, VarKind::kContinuous);
  info.action_names = {"dx", "dy"};
  info.action_kinds.assign(2, VarKind::kContinuous);
  info.action_bounds.assign(2, Bounds{-SimpleEnv::kMaxStep, SimpleEnv::kMaxStep});
  info.alpha = alpha;
  info.horizon_default = 20;
  info.episode_cap = 200;
  info.success_rule = SuccessRule::kReachGoal;
  return info;
}

}  // namespace

SimpleEnv::SimpleEnv(double alpha) : ModelBase(simple_info(alpha)), alpha_(alpha) {}

std::vector<double> SimpleEnv::initial_state(Rng& rng) const {
  (void)rng;
  return {0.0, 0.0};
}

Outcome SimpleEnv::classify(std::span<const double> s) const {
  const bool reached = std::hypot(s[0] - kGoalX, s[1] - kGoalY) <= kGoalRadius;
  return {reached, reached};
}

}  // namespace disprod::envs
