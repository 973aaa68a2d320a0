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

#include "disprod/envs/cartpole.hpp"

#include <cmath>

namespace disprod::envs {

namespace {

ModelInfo cartpole_info(double alpha, bool hybrid) {
  ModelInfo info;
  info.name = hybrid ? "cartpole_hybrid" : "cartpole";
  info.dims = {hybrid ? 5u : 4u, 1, 1};
  info.state_names = {"x", "x_dot", "theta", "theta_dot"};
  info.state_kinds.assign(4, VarKind::kContinuous);
  if (hybrid) {
    info.state_names.push_back("right_of_marker");
    info.state_kinds.push_back(VarKind::kBinary);
  }
  info.action_names = {"force"};
  info.action_kinds = {VarKind::kContinuous};
  info.action_bounds = {{-1.0, 1.0}};
  info.alpha = alpha;
  info.horizon_default = 25;
  info.episode_cap = 200;
  info.success_rule = SuccessRule::kSurvive;
  return info;
}

}  // namespace

CartPole::CartPole(double alpha, bool hybrid)
    : ModelBase(cartpole_info(alpha, hybrid)), alpha_(alpha), hybrid_(hybrid) {}

std::vector<double> CartPole::initial_state(Rng& rng) const {
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  std::vector<double> s(dims().n_s, 0.0);
  for (std::size_t i = 0; i < 4; ++i) s[i] = u(rng);
  if (hybrid_) s[4] = s[0] >= kRewardMarker ? 1.0 : 0.0;
  return s;
}

void CartPole::simulate(std::span<const double> s, std::span<const double> a,
                        std::span<const double> eps, std::span<double> out) const {
  dynamics<double>(s, a, eps, out);
  if (hybrid_) out[4] = out[0] >= kRewardMarker ? 1.0 : 0.0;
}

Outcome CartPole::classify(std::span<const double> s) const {
  const bool fallen = std::abs(s[0]) > kXThreshold || std::abs(s[2]) > kThetaThreshold;
  return {fallen, false};
}

}  // namespace disprod::envs
