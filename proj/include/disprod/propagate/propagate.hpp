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

// Moment propagation of product-form marginals through the second-order
// Taylor expansion of a model's transition, plus the expected reward and the
// discounted rollout value used as the planning objective.
//
// Everything is templated on the scalar S: double for evaluation, ad::Var when
// the rollout value is differentiated with respect to the policy.

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "disprod/autodiff/partials.hpp"
#include "disprod/envs/model.hpp"

namespace disprod::prop {

enum class PropagationMode {
  kComplete,       // state, action and noise variances
  kNoVariance,     // means only
  kStateVariance,  // action variance zeroed
};

std::string to_string(PropagationMode mode);
// Accepts "complete", "no_variance", "state_variance".
PropagationMode parse_mode(const std::string& text);

template <class S>
struct MarginalState {
  std::vector<S> mean;
  std::vector<S> var;
  std::vector<envs::VarKind> kinds;
};

template <class S>
struct ActionMarginal {
  std::vector<S> mean;
  std::vector<S> var;
};

template <class S>
struct Trace {
  std::vector<MarginalState<S>> marginals;  // depth + 1 entries
  std::vector<S> expected_rewards;          // depth entries
  S q_value{};
};

// Replaces autodiff for the transition partials (e.g. closed forms). Called
// with the point (mean state, mean action, eps = 0).
template <class S>
using PartialsProvider = std::function<ad::PartialsBundle<S>(
    std::span<const S>, std::span<const S>, std::span<const S>)>;

// Exact initial marginal: mean s0, zero variance.
template <class S>
MarginalState<S> point_marginal(const envs::Model& model, std::span<const double> s0);

// One step of moment propagation:
//   mean' = T(mu_s, mu_a, 0) + 1/2 (H_s v_s + H_a v_a + H_eps v_eps)
//   var'  = (J_s . J_s) v_s + (J_a . J_a) v_a + (J_eps . J_eps) v_eps
// with v_eps = 1, mode-dependent zeroing, binary means clamped to [0, 1] with
// var = p (1 - p), and var clamped at 0. `step` only labels errors.
template <class S>
MarginalState<S> propagate_step(const envs::Model& model, const MarginalState<S>& s,
                                const ActionMarginal<S>& a, PropagationMode mode,
                                const PartialsProvider<S>& provider = {}, int step = 0);

// E[R] ~ R(mu_s, mu_a) + 1/2 (H^R_s v_s + H^R_a v_a).
template <class S>
S expected_reward(const envs::Model& model, const MarginalState<S>& s, const ActionMarginal<S>& a,
                  PropagationMode mode, int step = 0);

// Propagates from the exact state s0 under the per-step action marginals and
// sums gamma^i E[R_i].
template <class S>
Trace<S> rollout_q(const envs::Model& model, std::span<const double> s0,
                   std::span<const ActionMarginal<S>> policy, double gamma, PropagationMode mode,
                   const PartialsProvider<S>& provider = {});

// Rollout value only, without keeping the marginals.
template <class S>
S rollout_value(const envs::Model& model, std::span<const double> s0,
                std::span<const ActionMarginal<S>> policy, double gamma, PropagationMode mode);

// Columns: step,variable,mean,var.
void write_trace_csv(const envs::Model& model, const Trace<double>& trace, std::ostream& out);

struct StepComparison {
  int step = 0;
  std::vector<double> empirical_mean, empirical_var;
  std::vector<double> complete_mean, complete_var;
  std::vector<double> nv_mean, nv_var;
};

struct EmpiricalReport {
  std::vector<StepComparison> steps;  // depth + 1 entries, step 0 is s0

  // max over variables of |propagated - empirical| mean at `step`.
  double complete_mean_error(std::size_t step) const;
  double nv_mean_error(std::size_t step) const;
};

// Samples n_samples simulator trajectories from s0, drawing each action
// uniformly on mean +- sqrt(3 var) and noise from the simulator, and reports
// per-step empirical moments next to the complete and no-variance
// propagations. Requires n_samples >= 100.
EmpiricalReport compare_to_empirical(const envs::Model& model, std::span<const double> s0,
                                     std::span<const ActionMarginal<double>> policy,
                                     int n_samples, envs::Rng& rng);

}  // namespace disprod::prop
