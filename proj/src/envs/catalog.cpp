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

#include "disprod/envs/catalog.hpp"

#include <cmath>

#include "disprod/autodiff/hyperdual.hpp"
#include "disprod/envs/cartpole.hpp"
#include "disprod/envs/dubins.hpp"
#include "disprod/envs/mountain_car.hpp"
#include "disprod/envs/pendulum.hpp"
#include "disprod/envs/simple_env.hpp"
#include "disprod/errors.hpp"

namespace disprod::envs {

namespace {

// Upper bound on redundant actions: keeps per-step partial passes bounded.
constexpr int kMaxRedundant = 64;

void validate(const EnvParams& p) {
  if (!(p.alpha >= 0.0) || !std::isfinite(p.alpha)) {
    throw ArgumentError("env param 'alpha' must be a finite value >= 0");
  }
  if (!(p.beta > 0.0) || !std::isfinite(p.beta)) {
    throw ArgumentError("env param 'beta' must be a finite value > 0");
  }
  if (p.n_redundant < 0 || p.n_redundant > kMaxRedundant) {
    throw ArgumentError("env param 'n_redundant' must be in [0, 64]");
  }
  if (!(p.gamma > 0.0 && p.gamma <= 1.0)) {
    throw ArgumentError("env param 'gamma' must be in (0, 1]");
  }
  if (p.pendulum_noise != "exp" && p.pendulum_noise != "additive") {
    throw ArgumentError("env param 'pendulum_noise' must be 'exp' or 'additive'");
  }
}

}  // namespace

const std::vector<std::string>& env_names() {
  static const std::vector<std::string> names = {
      "cartpole",        "pendulum", "mountain_car", "mountain_car_sparse", "mountain_car_highdim",
      "cartpole_hybrid", "dubins",   "simple_env"};
  return names;
}

std::unique_ptr<Model> make_env(const std::string& name, const EnvParams& params) {
  validate(params);
  std::unique_ptr<Model> model;
  if (name == "cartpole" || name == "cartpole_hybrid") {
    model = std::make_unique<CartPole>(params.alpha, name == "cartpole_hybrid");
  } else if (name == "pendulum") {
    const auto noise =
        params.pendulum_noise == "exp" ? PendulumNoise::kExp : PendulumNoise::kAdditive;
    model = std::make_unique<Pendulum>(params.alpha, noise);
  } else if (name == "mountain_car") {
    model = std::make_unique<MountainCar>(name, params.alpha, 1.0, 0);
  } else if (name == "mountain_car_sparse") {
    model = std::make_unique<MountainCar>(name, params.alpha, params.beta, 0);
  } else if (name == "mountain_car_highdim") {
    model = std::make_unique<MountainCar>(name, params.alpha, params.beta, params.n_redundant);
  } else if (name == "dubins") {
    model = std::make_unique<Dubins>(find_map(params.map), params.alpha);
  } else if (name == "simple_env") {
    model = std::make_unique<SimpleEnv>(params.alpha);
  } else {
    throw ArgumentError("unknown environment '" + name + "'");
  }
  return model;
}

double smooth_ge(double x, double target, double beta) {
  if (!(beta > 0.0)) throw ArgumentError("smooth_ge: 'beta' must be > 0");
  return ad::smooth_ge(x, target, beta);
}

}  // namespace disprod::envs
