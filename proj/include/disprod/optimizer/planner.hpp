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

// Multi-restart gradient ascent over stochastic open-loop policies: each
// restart (row) holds per-step action means and variances, is scored by the
// propagated rollout value, and is updated with Adam under a projected,
// accept-if-improves rule.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "disprod/envs/model.hpp"
#include "disprod/propagate/propagate.hpp"

namespace disprod::opt {

struct PlannerConfig {
  int depth = 25;
  int restarts = 200;
  int max_steps = 10;      // K, gradient steps per planning call
  double step_size = 0.1;  // Adam learning rate on normalized ranges
  double conv_tol = 0.1;   // infinity-norm on normalized means and 12 * vars
  prop::PropagationMode mode = prop::PropagationMode::kComplete;
  double gamma = 1.0;
  std::uint64_t rng_seed = 0;
  bool save_actions = true;

  // Throws ArgumentError naming the offending field.
  void validate() const;
};

// n_r x n_o matrix, n_o = 2 * depth * n_a. Entry layout per row: step t,
// action j -> columns 2 (t n_a + j) (mean) and 2 (t n_a + j) + 1 (var).
struct PolicyParams {
  int restarts = 0;
  int depth = 0;
  int n_a = 0;
  std::vector<double> data;

  PolicyParams() = default;
  PolicyParams(int n_r, int d, int na)
      : restarts(n_r), depth(d), n_a(na), data(static_cast<std::size_t>(n_r) * 2 * d * na, 0.0) {}

  std::size_t cols() const { return static_cast<std::size_t>(2 * depth * n_a); }
  std::span<double> row(int r) { return {data.data() + r * cols(), cols()}; }
  std::span<const double> row(int r) const { return {data.data() + r * cols(), cols()}; }
  double& mean(int r, int t, int j) { return data[r * cols() + 2 * (t * n_a + j)]; }
  double& var(int r, int t, int j) { return data[r * cols() + 2 * (t * n_a + j) + 1]; }
  double mean(int r, int t, int j) const { return data[r * cols() + 2 * (t * n_a + j)]; }
  double var(int r, int t, int j) const { return data[r * cols() + 2 * (t * n_a + j) + 1]; }
};

// Steps 1..depth-1 of the previous best restart; empty before the first call.
struct SavedActions {
  int n_a = 0;
  std::vector<double> means;  // step-major, n_a per step
  std::vector<double> vars;

  bool empty() const { return means.empty(); }
  int steps() const { return n_a == 0 ? 0 : static_cast<int>(means.size()) / n_a; }
};

struct AdamState {
  std::vector<double> m;  // same layout as PolicyParams::data
  std::vector<double> v;
  std::vector<int> t;  // per row

  AdamState() = default;
  explicit AdamState(const PolicyParams& p)
      : m(p.data.size(), 0.0), v(p.data.size(), 0.0), t(p.restarts, 0) {}
};

struct PlanDiagnostics {
  // q_history[i][r]: row r's accepted value after iteration i (entry 0 is the
  // initialization).
  std::vector<std::vector<double>> q_history;
  int iterations = 0;
  bool converged = false;
  int best_row = -1;
  double best_q = 0.0;
  int frozen_rows = 0;
  bool degraded = false;
  int accepted_updates = 0;
  prop::Trace<double> best_trace;  // expected-state sequence of the best row
};

struct PlanResult {
  std::vector<double> action;
  SavedActions saved;
  PlanDiagnostics diagnostics;
};

// Row-wise evaluation of the rollout value; returns -inf when the row cannot
// be propagated.
using RowEvaluator = std::function<double(std::span<const double> row)>;

PolicyParams init_policy(const envs::Model& model, const PlannerConfig& config,
                         const SavedActions& saved, envs::Rng& rng);

// Largest admissible variance for a mean in [lo, hi], in raw units.
double max_variance(double mean, const envs::Bounds& b);

// Rollout value of one row and its exact gradient with respect to the row.
// Throws PropagationError on a non-finite value.
double row_value_and_gradient(const envs::Model& model, std::span<const double> s0,
                              const PlannerConfig& config, std::span<const double> row,
                              std::span<double> grad);
double row_value(const envs::Model& model, std::span<const double> s0, const PlannerConfig& config,
                 std::span<const double> row);

// Gradient of an arbitrary differentiable loss of one policy row. Throws
// ArgumentError when the row violates the policy bounds.
std::vector<double> grad_policy_loss(
    const envs::Model& model, int depth,
    const std::function<ad::Var(std::span<const ad::Var>)>& loss, std::span<const double> row);

struct UpdateResult {
  std::vector<double> q_after;
  std::vector<char> accepted;
  int newly_frozen = 0;
};

// One Adam ascent step per row in normalized coordinates, followed by
// projection; a row is replaced only if its value strictly improves, and a
// rejected row's Adam state is restored. Rows with a non-finite gradient are
// marked frozen and skipped from then on.
UpdateResult safe_update(const envs::Model& model, PolicyParams& params, AdamState& adam,
                         std::span<const double> grads, double step_size,
                         std::span<const double> q_before, const RowEvaluator& q_eval,
                         std::vector<char>& frozen);

// Clips means to bounds and variances to [0, max_variance] in place.
void project(const envs::Model& model, PolicyParams& params);

bool converged(const envs::Model& model, const PolicyParams& old_params,
               const PolicyParams& new_params, double conv_tol);

// Optimizes given initial params in place; no randomness involved.
PlanDiagnostics optimize_policy(const envs::Model& model, std::span<const double> state,
                                const PlannerConfig& config, PolicyParams& params,
                                std::vector<double>& q);

// Index of the largest finite value, ties broken uniformly at random; a
// uniformly random row when no value is finite.
int select_best_row(std::span<const double> q, envs::Rng& rng);

PlanResult plan_one_step(const envs::Model& model, std::span<const double> state,
                         const PlannerConfig& config, const SavedActions& saved, envs::Rng& rng);

struct EpisodeResult {
  double total_reward = 0.0;
  int steps = 0;
  bool success = false;
  bool terminal = false;
  int degraded_plans = 0;
  int clamped_actions = 0;
  std::vector<std::vector<double>> trajectory;  // states, including the initial one
  std::vector<std::vector<double>> actions;
  std::vector<double> plan_ms;  // wall time per planning call
};

// Generic MPC loop: plan, execute the first action in the simulator, repeat
// until a terminal state or the cap. `plan` returns the action to execute.
using StepPlanner = std::function<std::vector<double>(std::span<const double> state, int step,
                                                      bool& degraded)>;
EpisodeResult run_mpc_episode(const envs::Model& model, int episode_cap, envs::Rng& rng,
                              const StepPlanner& plan);

EpisodeResult run_episode(const envs::Model& model, const PlannerConfig& config, int episode_cap,
                          envs::Rng& rng);

}  // namespace disprod::opt
