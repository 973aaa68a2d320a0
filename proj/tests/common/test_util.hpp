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
#include <random>
#include <string>
#include <vector>

#include "disprod/envs/catalog.hpp"
#include "disprod/envs/model.hpp"

namespace disprod::testutil {

struct Point {
  std::vector<double> s, a, eps;
};

inline double uniform(envs::Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// A random point inside the region where the environment is meant to be
// evaluated (away from the smoothed clamps).
inline Point random_point(const envs::Model& m, envs::Rng& rng) {
  const std::string& name = m.info().name;
  Point p;
  if (name == "cartpole" || name == "cartpole_hybrid") {
    p.s = {uniform(rng, -2, 2), uniform(rng, -1, 1), uniform(rng, -0.2, 0.2), uniform(rng, -1, 1)};
    if (name == "cartpole_hybrid") p.s.push_back(uniform(rng, 0, 1));
  } else if (name == "pendulum") {
    p.s = {uniform(rng, -3.1, 3.1), uniform(rng, -3, 3)};
  } else if (name.rfind("mountain_car", 0) == 0) {
    p.s = {uniform(rng, -1.0, 0.4), uniform(rng, -0.06, 0.06)};
  } else if (name == "dubins") {
    p.s = {uniform(rng, 0, 10), uniform(rng, 0, 10), uniform(rng, -3, 3), uniform(rng, -1, 1),
           uniform(rng, -1, 1)};
  } else {
    p.s = {uniform(rng, -1, 5), uniform(rng, -1, 5)};
  }
  for (const auto& b : m.info().action_bounds) p.a.push_back(uniform(rng, b.lo, b.hi));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < m.dims().n_eps; ++k) p.eps.push_back(normal(rng));
  return p;
}

inline envs::EnvParams default_params(const std::string& name) {
  envs::EnvParams p;
  if (name == "cartpole" || name == "cartpole_hybrid") p.alpha = 2.0;
  if (name == "pendulum") p.alpha = 1.0;
  if (name.rfind("mountain_car", 0) == 0) p.alpha = 0.002;
  if (name == "mountain_car_sparse") p.beta = 2.0;
  if (name == "mountain_car_highdim") p.n_redundant = 3;
  if (name == "dubins") {
    p.alpha = 0.05;
    p.map = "ob-9";
  }
  if (name == "simple_env") p.alpha = 0.2;
  return p;
}

inline double rel_err(double analytic, double reference) {
  return std::abs(analytic - reference) / std::max(1.0, std::abs(reference));
}

}  // namespace disprod::testutil

#include "disprod/optimizer/planner.hpp"
#include "disprod/propagate/propagate.hpp"

namespace disprod::testutil {

// Per-step action marginals from one policy row.
template <class S>
std::vector<prop::ActionMarginal<S>> marginals_of(std::span<const S> row, int depth, int n_a) {
  std::vector<prop::ActionMarginal<S>> out(depth);
  for (int t = 0; t < depth; ++t) {
    for (int j = 0; j < n_a; ++j) {
      out[t].mean.push_back(row[2 * (t * n_a + j)]);
      out[t].var.push_back(row[2 * (t * n_a + j) + 1]);
    }
  }
  return out;
}

// One random admissible policy row.
inline std::vector<double> random_row(const envs::Model& m, int depth, std::uint64_t seed) {
  opt::PlannerConfig cfg;
  cfg.depth = depth;
  cfg.restarts = 1;
  envs::Rng rng(seed);
  const auto p = opt::init_policy(m, cfg, {}, rng);
  return {p.data.begin(), p.data.end()};
}

// A random row whose entries keep a margin from their bounds: means in the
// central 80% of the action range, variances in [0.1, 0.9] of their maximum.
// Finite differences with small steps stay admissible there.
inline std::vector<double> random_interior_row(const envs::Model& m, int depth,
                                               std::uint64_t seed) {
  envs::Rng rng(seed);
  const auto& bounds = m.info().action_bounds;
  const std::size_t n_a = bounds.size();
  std::vector<double> row(2 * depth * n_a);
  for (int t = 0; t < depth; ++t) {
    for (std::size_t j = 0; j < n_a; ++j) {
      const auto& b = bounds[j];
      const double mean = b.lo + uniform(rng, 0.1, 0.9) * (b.hi - b.lo);
      row[2 * (t * n_a + j)] = mean;
      row[2 * (t * n_a + j) + 1] = uniform(rng, 0.1, 0.9) * opt::max_variance(mean, b);
    }
  }
  return row;
}

}  // namespace disprod::testutil
