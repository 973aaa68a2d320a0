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

// Experiment configuration, episode batches, sweeps and metrics.
//
// Config files are JSON objects:
//   {
//     "id": "cartpole_alpha",
//     "env": {"name": "cartpole", "alpha": 0.0, "beta": 1.0, "n_redundant": 0,
//             "map": "no-ob-1", "pendulum_noise": "exp", "gamma": 1.0},
//     "planner": "disprod",                      // disprod | cem | mppi
//     "disprod": {"depth": 25, "restarts": 200, "max_steps": 10, "step_size": 0.1,
//                 "conv_tol": 0.1, "mode": "complete", "save_actions": true},
//     "shooting": {"depth": 25, "population": 200, "iterations": 10, "elite_count": 20,
//                  "temperature": 10.0, "init_std": 0.25, "save_actions": true},
//     "sweep": {"axis": "alpha", "values": [0, 2.5, 5]},
//     "repetitions": 8, "runs": 6, "seed": 1, "episode_cap": 0, "record_timing": false
//   }
// Every key except "planner" and "env.name" is optional. A depth of 0 (or an
// absent depth) means the environment's default horizon; an episode_cap of 0
// means the environment's cap. Unknown keys are errors.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "disprod/baselines/shooting.hpp"
#include "disprod/envs/catalog.hpp"
#include "disprod/optimizer/planner.hpp"

namespace disprod::harness {

struct ExperimentSpec {
  std::string id = "experiment";
  std::string env;
  envs::EnvParams env_params;
  std::string planner;  // disprod | cem | mppi
  opt::PlannerConfig disprod;
  base::ShootingConfig shooting;
  std::string axis = "none";  // none | alpha | depth | beta | n_redundant | restarts | map
  std::vector<std::string> values;
  int repetitions = 1;
  int runs = 1;
  std::uint64_t seed = 0;
  int episode_cap = 0;
  bool record_timing = false;

  // Throws ConfigError naming the offending key.
  void validate() const;
};

bool operator==(const ExperimentSpec& a, const ExperimentSpec& b);

ExperimentSpec parse_config_text(const std::string& text, const std::string& origin = "<config>");
ExperimentSpec parse_config(const std::string& path);
std::string write_config(const ExperimentSpec& spec);

// Applies one axis value to a copy of the spec (env params or planner config).
ExperimentSpec apply_axis(const ExperimentSpec& spec, const std::string& value);

// Seed of run m in repetition r; independent of R and M.
std::uint64_t derive_seed(std::uint64_t base, int repetition, int run);

struct EpisodeRecord {
  std::string value;
  int repetition = 0;
  int run = 0;
  std::uint64_t seed = 0;
  double total_reward = 0.0;
  int steps = 0;
  bool success = false;
  std::optional<double> sl;
  double plan_ms = 0.0;  // mean per planning call, 0 unless timing is recorded
  // Mean over steps of the mean |action| of every action dimension but the
  // first; 0 when there is only one.
  double mean_abs_secondary_action = 0.0;
};

struct MetricsRow {
  std::string experiment_id;
  std::string axis;
  std::string value;
  std::string planner;
  double mean_return = 0.0;
  double std_return = 0.0;
  std::optional<double> sr;  // percent; absent when the env has no success notion
  std::optional<double> sl;  // absent when no episode succeeded
  double mean_steps = 0.0;
  double wall_ms = 0.0;
  int episodes = 0;  // completed episodes; return and step columns are NA when 0
  bool partial = false;
};

struct ExperimentResult {
  std::vector<MetricsRow> rows;
  std::vector<EpisodeRecord> episodes;
  bool partial = false;
};

// Planar path length over the shortest start-to-goal-region distance
// (|goal - start| - goal_radius) for successful episodes; nullopt for failures
// or when the start already lies in the goal region.
std::optional<double> compute_sl(const std::vector<std::vector<double>>& trajectory,
                                 std::size_t x_index, std::size_t y_index, double goal_x,
                                 double goal_y, bool success, bool* degenerate = nullptr,
                                 double goal_radius = 0.0);

// Runs one episode of the spec's planner on `model`.
opt::EpisodeResult run_planner_episode(const ExperimentSpec& spec, const envs::Model& model,
                                       std::uint64_t seed);

ExperimentResult run_experiment(const ExperimentSpec& spec);

inline constexpr const char* kResultsHeader =
    "experiment_id,axis,value,planner,mean_return,std_return,sr,sl,mean_steps,wall_ms,partial";

void write_results(const std::vector<MetricsRow>& rows, std::ostream& out);
void write_results(const std::vector<MetricsRow>& rows, const std::string& path);
void write_episodes(const ExperimentSpec& spec, const std::vector<EpisodeRecord>& episodes,
                    std::ostream& out);

struct StudySpec {
  std::string env = "simple_env";
  envs::EnvParams env_params;
  std::vector<double> alphas;
  int depth = 20;
  std::string policy = "random";  // random | degenerate
  int n_samples = 100000;
  std::uint64_t seed = 0;
};

struct StudyTable {
  double alpha = 0.0;
  prop::EmpiricalReport report;
};

// Fixes a start state and a sequence of action distributions (drawn once from
// the seed) and compares propagated and empirical moments at each alpha.
std::vector<StudyTable> run_distribution_study(const StudySpec& spec);

// Columns: alpha,step,variable,empirical_mean,empirical_var,complete_mean,
// complete_var,nv_mean,nv_var.
void write_study(const envs::Model& model, const std::vector<StudyTable>& tables,
                 std::ostream& out);

}  // namespace disprod::harness
