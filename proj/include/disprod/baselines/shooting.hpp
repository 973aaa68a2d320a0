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

// Sampling-based shooting planners over the true simulator: the
// cross-entropy method (CEM) and model predictive path integral (MPPI).

#include <cstdint>
#include <span>
#include <vector>

#include "disprod/envs/model.hpp"
#include "disprod/optimizer/planner.hpp"

namespace disprod::base {

struct ShootingConfig {
  int depth = 25;
  int population = 200;
  int iterations = 10;
  int elite_count = 20;        // CEM
  double temperature = 10.0;   // MPPI inverse temperature; weights exp(lambda (R - R_max))
  double init_std = 0.25;      // sampling std as a fraction of the half action range
  bool save_actions = true;
  double gamma = 1.0;
  std::uint64_t rng_seed = 0;

  // Throws ArgumentError naming the offending field.
  void validate() const;
};

struct ShootingResult {
  std::vector<double> action;
  opt::SavedActions saved;  // steps 1..depth-1 of the final mean / nominal sequence
  double best_return = 0.0;
  bool fallback = false;  // MPPI weights collapsed; best sample used instead
  // Final per-step means and stds (CEM) or nominal sequence (MPPI), step-major.
  std::vector<double> means;
  std::vector<double> stds;
};

// Sum of gamma^t rewards of an action sequence (step-major, n_a per step)
// under the simulator with freshly drawn noise. Terminal states do not stop
// the rollout.
double rollout_return(const envs::Model& model, std::span<const double> state,
                      std::span<const double> actions, double gamma, envs::Rng& rng);

ShootingResult cem_plan(const envs::Model& model, std::span<const double> state,
                        const ShootingConfig& cfg, const opt::SavedActions& saved,
                        envs::Rng& rng);

ShootingResult mppi_plan(const envs::Model& model, std::span<const double> state,
                         const ShootingConfig& cfg, const opt::SavedActions& saved,
                         envs::Rng& rng);

// Softmax weights exp(lambda (R_k - max R)), normalized. Returns false (and
// leaves `weights` unspecified) when they cannot be formed, which includes
// an infinite lambda.
bool mppi_weights(std::span<const double> returns, double lambda, std::vector<double>& weights);

struct EliteFit {
  std::vector<double> mean;
  std::vector<double> std;  // population std over the elites, floored at 1e-3
};

// Refits per-entry mean and std from the elite_count samples with the
// highest returns (stable order on ties).
EliteFit cem_refit(const std::vector<std::vector<double>>& samples,
                   std::span<const double> returns, int elite_count);

enum class Planner { kCem, kMppi };

opt::EpisodeResult run_shooting_episode(const envs::Model& model, Planner planner,
                                        const ShootingConfig& cfg, int episode_cap,
                                        envs::Rng& rng);

}  // namespace disprod::base
