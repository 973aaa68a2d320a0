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

// The encapsulated environment model. Every environment exposes
//  - a deterministic transition T(s, a, eps) where all stochasticity enters
//    through a standard-normal input eps, scaled internally by alpha;
//  - a smooth reward R(s, a);
//  - variable kinds, action bounds and episode conventions for the simulator.
//
// T and R are written once as templates over the scalar type in each
// environment and instantiated for double, HyperDual<double> (partials) and
// HyperDual<Var> (partials that are differentiated again for policy gradients).

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "disprod/autodiff/hyperdual.hpp"
#include "disprod/autodiff/partials.hpp"

namespace disprod::envs {

using Rng = std::mt19937_64;
using HD = ad::HyperDual<double>;
using HDV = ad::HyperDual<ad::Var>;

enum class VarKind { kContinuous, kBinary };

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;

  double range() const { return hi - lo; }
};

// How an episode is scored as a success.
enum class SuccessRule {
  kNone,        // return only (Pendulum)
  kSurvive,     // reaching the episode cap without a terminal state
  kReachGoal,   // entering a terminal success state
};

struct ModelInfo {
  std::string name;
  ad::Dims dims;
  std::vector<VarKind> state_kinds;
  std::vector<VarKind> action_kinds;
  std::vector<std::string> state_names;
  std::vector<std::string> action_names;
  std::vector<Bounds> action_bounds;
  double alpha = 0.0;
  double gamma = 1.0;
  int horizon_default = 25;
  int episode_cap = 200;
  SuccessRule success_rule = SuccessRule::kNone;
};

struct Outcome {
  bool terminal = false;
  bool success = false;
};

class Model {
 public:
  explicit Model(ModelInfo info) : info_(std::move(info)) {}
  virtual ~Model() = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelInfo& info() const { return info_; }
  const ad::Dims& dims() const { return info_.dims; }

  virtual void transition(std::span<const double> s, std::span<const double> a,
                          std::span<const double> eps, std::span<double> out) const = 0;
  virtual void transition(std::span<const HD> s, std::span<const HD> a, std::span<const HD> eps,
                          std::span<HD> out) const = 0;
  virtual void transition(std::span<const HDV> s, std::span<const HDV> a,
                          std::span<const HDV> eps, std::span<HDV> out) const = 0;

  virtual double reward(std::span<const double> s, std::span<const double> a) const = 0;
  virtual HD reward(std::span<const HD> s, std::span<const HD> a) const = 0;
  virtual HDV reward(std::span<const HDV> s, std::span<const HDV> a) const = 0;

  // Simulator side. The default simulator is the encapsulated transition fed
  // with the drawn noise; environments whose simulator differs (exact
  // indicators) override it.
  virtual std::vector<double> initial_state(Rng& rng) const = 0;
  virtual void simulate(std::span<const double> s, std::span<const double> a,
                        std::span<const double> eps, std::span<double> out) const {
    transition(s, a, eps, out);
  }
  virtual Outcome classify(std::span<const double> s) const {
    (void)s;
    return {};
  }
  // Indices of the planar position, for path-length metrics.
  virtual std::optional<std::pair<std::size_t, std::size_t>> position_indices() const {
    return std::nullopt;
  }
  virtual std::optional<std::pair<double, double>> goal_position() const { return std::nullopt; }
  // Success is declared within this distance of goal_position().
  virtual double goal_radius() const { return 0.0; }
  // False when the transition provably ignores action k; its partial
  // columns are then known to be zero and need no pass.
  virtual bool transition_uses_action(std::size_t k) const {
    (void)k;
    return true;
  }

 private:
  ModelInfo info_;
};

// Wires the scalar-generic `dynamics` and `reward_fn` templates of an
// environment class to the virtual interface.
template <class Derived>
class ModelBase : public Model {
 public:
  using Model::Model;

  void transition(std::span<const double> s, std::span<const double> a,
                  std::span<const double> eps, std::span<double> out) const override {
    self().template dynamics<double>(s, a, eps, out);
  }
  void transition(std::span<const HD> s, std::span<const HD> a, std::span<const HD> eps,
                  std::span<HD> out) const override {
    self().template dynamics<HD>(s, a, eps, out);
  }
  void transition(std::span<const HDV> s, std::span<const HDV> a, std::span<const HDV> eps,
                  std::span<HDV> out) const override {
    self().template dynamics<HDV>(s, a, eps, out);
  }
  double reward(std::span<const double> s, std::span<const double> a) const override {
    return self().template reward_fn<double>(s, a);
  }
  HD reward(std::span<const HD> s, std::span<const HD> a) const override {
    return self().template reward_fn<HD>(s, a);
  }
  HDV reward(std::span<const HDV> s, std::span<const HDV> a) const override {
    return self().template reward_fn<HDV>(s, a);
  }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

// Partials of the model's transition at (s, a, eps) via autodiff.
template <class S>
ad::PartialsBundle<S> eval_partials(const Model& model, std::span<const S> s,
                                    std::span<const S> a, std::span<const S> eps,
                                    std::span<const char> active = {}) {
  using H = ad::HyperDual<S>;
  auto f = [&model](std::span<const H> hs, std::span<const H> ha, std::span<const H> he,
                    std::span<H> out) { model.transition(hs, ha, he, out); };
  return ad::eval_partials<S>(f, model.dims(), s, a, eps, active);
}

template <class S>
ad::RewardPartials<S> eval_reward_partials(const Model& model, std::span<const S> s,
                                           std::span<const S> a,
                                           std::span<const char> active = {}) {
  using H = ad::HyperDual<S>;
  auto r = [&model](std::span<const H> hs, std::span<const H> ha) { return model.reward(hs, ha); };
  return ad::eval_reward_partials<S>(r, s, a, active);
}

struct StepResult {
  std::vector<double> next_state;
  double reward = 0.0;
  bool action_clamped = false;
};

// One simulator step: clamp the action into bounds (flagged, never thrown),
// draw eps ~ N(0, I), apply the simulator and score R(s, a).
StepResult step_sim(const Model& model, std::span<const double> state,
                    std::span<const double> action, Rng& rng);

// Same, with the noise supplied instead of drawn.
StepResult step_sim_with_noise(const Model& model, std::span<const double> state,
                               std::span<const double> action, std::span<const double> eps);

std::vector<double> draw_noise(const Model& model, Rng& rng);

}  // namespace disprod::envs
