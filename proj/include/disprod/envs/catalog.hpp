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

#include <memory>
#include <string>
#include <vector>

#include "disprod/envs/model.hpp"

namespace disprod::envs {

struct EnvParams {
  double alpha = 0.0;
  double beta = 1.0;            // reward sparsity multiplier (mountain car)
  int n_redundant = 0;          // extra action variables (mountain_car_highdim)
  std::string map = "no-ob-1";  // dubins map name or path
  std::string pendulum_noise = "exp";  // "exp" or "additive"
  double gamma = 1.0;

  bool operator==(const EnvParams&) const = default;
};

// Names accepted by make_env.
const std::vector<std::string>& env_names();

// Builds a fully wired, immutable model. Throws ArgumentError on an unknown
// name or an invalid parameter (the message names the field).
std::unique_ptr<Model> make_env(const std::string& name, const EnvParams& params = {});

// sigmoid(10 beta (x - target)). Requires beta > 0.
double smooth_ge(double x, double target, double beta);

}  // namespace disprod::envs
