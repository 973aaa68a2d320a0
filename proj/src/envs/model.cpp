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

#include "disprod/envs/model.hpp"

#include <algorithm>

#include "disprod/errors.hpp"

namespace disprod::envs {

std::vector<double> draw_noise(const Model& model, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> eps(model.dims().n_eps);
  for (double& e : eps) e = normal(rng);
  return eps;
}

StepResult step_sim_with_noise(const Model& model, std::span<const double> state,
                               std::span<const double> action, std::span<const double> eps) {
  const auto& info = model.info();
  if (state.size() != info.dims.n_s || action.size() != info.dims.n_a ||
      eps.size() != info.dims.n_eps) {
    throw ArgumentError("step_sim: dimension mismatch for " + info.name);
  }
  StepResult result;
  std::vector<double> act(action.begin(), action.end());
  for (std::size_t i = 0; i < act.size(); ++i) {
    const Bounds& b = info.action_bounds[i];
    const double clamped = std::clamp(act[i], b.lo, b.hi);
    if (clamped != act[i]) result.action_clamped = true;
    act[i] = clamped;
  }
  result.next_state.resize(info.dims.n_s);
  model.simulate(state, act, eps, result.next_state);
  result.reward = model.reward(state, act);
  return result;
}

StepResult step_sim(const Model& model, std::span<const double> state,
                    std::span<const double> action, Rng& rng) {
  const std::vector<double> eps = draw_noise(model, rng);
  return step_sim_with_noise(model, state, action, eps);
}

}  // namespace disprod::envs
