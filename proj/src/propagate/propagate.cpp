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

#include "disprod/propagate/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "disprod/autodiff/tape.hpp"
#include "disprod/errors.hpp"

namespace disprod::prop {

using ad::Var;
using envs::VarKind;

std::string to_string(PropagationMode mode) {
  switch (mode) {
    case PropagationMode::kComplete:
      return "complete";
    case PropagationMode::kNoVariance:
      return "no_variance";
    case PropagationMode::kStateVariance:
      return "state_variance";
  }
  return "complete";
}

PropagationMode parse_mode(const std::string& text) {
  if (text == "complete") return PropagationMode::kComplete;
  if (text == "no_variance") return PropagationMode::kNoVariance;
  if (text == "state_variance") return PropagationMode::kStateVariance;
  throw ArgumentError("mode: expected complete, no_variance or state_variance, got '" + text +
                      "'");
}

namespace {

// True when x is exactly zero and carries no derivative, so every term it
// multiplies can be dropped without changing values or gradients.
bool structurally_zero(double x) { return x == 0.0; }
bool structurally_zero(const Var& x) { return x.is_constant() && x.value == 0.0; }

template <class S>
S clamp_probability(const S& p) {
  if (ad::primal(p) < 0.0) return S(0.0);
  if (ad::primal(p) > 1.0) return S(1.0);
  return p;
}

template <class S>
void check_sizes(const envs::Model& model, const MarginalState<S>& s, const ActionMarginal<S>& a) {
  const auto& d = model.dims();
  if (s.mean.size() != d.n_s || s.var.size() != d.n_s) {
    throw ArgumentError("state marginal has " + std::to_string(s.mean.size()) +
                        " variables, model expects " + std::to_string(d.n_s));
  }
  if (a.mean.size() != d.n_a || a.var.size() != d.n_a) {
    throw ArgumentError("action marginal has " + std::to_string(a.mean.size()) +
                        " variables, model expects " + std::to_string(d.n_a));
  }
}

bool uses_state_variance(PropagationMode mode) { return mode != PropagationMode::kNoVariance; }
bool uses_action_variance(PropagationMode mode) { return mode == PropagationMode::kComplete; }

}  // namespace

template <class S>
MarginalState<S> point_marginal(const envs::Model& model, std::span<const double> s0) {
  if (s0.size() != model.dims().n_s) {
    throw ArgumentError("initial state has " + std::to_string(s0.size()) +
                        " variables, model expects " + std::to_string(model.dims().n_s));
  }
  MarginalState<S> m;
  m.mean.assign(s0.begin(), s0.end());
  m.var.assign(s0.size(), S(0.0));
  m.kinds = model.info().state_kinds;
  return m;
}

template <class S>
MarginalState<S> propagate_step(const envs::Model& model, const MarginalState<S>& s,
                                const ActionMarginal<S>& a, PropagationMode mode,
                                const PartialsProvider<S>& provider, int step) {
  check_sizes(model, s, a);
  const auto& d = model.dims();
  const bool state_var = uses_state_variance(mode);
  const bool action_var = uses_action_variance(mode);

  std::vector<S> v_s(d.n_s, S(0.0));
  std::vector<S> v_a(d.n_a, S(0.0));
  std::vector<char> active(d.total(), 0);
  if (state_var) {
    for (std::size_t k = 0; k < d.n_s; ++k) {
      v_s[k] = s.var[k];
      active[k] = !structurally_zero(v_s[k]);
    }
    for (std::size_t k = 0; k < d.n_eps; ++k) active[d.n_s + d.n_a + k] = 1;
  }
  if (action_var) {
    for (std::size_t k = 0; k < d.n_a; ++k) {
      v_a[k] = a.var[k];
      active[d.n_s + k] = !structurally_zero(v_a[k]) && model.transition_uses_action(k);
    }
  }
  const double v_eps = state_var ? 1.0 : 0.0;

  const std::vector<S> eps(d.n_eps, S(0.0));
  ad::PartialsBundle<S> p;
  try {
    p = provider ? provider(s.mean, a.mean, eps)
                 : envs::eval_partials<S>(model, std::span<const S>(s.mean),
                                          std::span<const S>(a.mean), std::span<const S>(eps),
                                          std::span<const char>(active));
  } catch (const PropagationError& e) {
    throw PropagationError("step " + std::to_string(step) + ": " + e.what());
  }

  MarginalState<S> next;
  next.mean.resize(d.n_s);
  next.var.resize(d.n_s);
  next.kinds = model.info().state_kinds;
  for (std::size_t j = 0; j < d.n_s; ++j) {
    S curvature(0.0);
    S var(0.0);
    for (std::size_t k = 0; k < d.n_s; ++k) {
      if (structurally_zero(v_s[k])) continue;
      curvature += p.h_s(j, k) * v_s[k];
      var += p.j_s(j, k) * p.j_s(j, k) * v_s[k];
    }
    for (std::size_t k = 0; k < d.n_a; ++k) {
      if (structurally_zero(v_a[k]) || !active[d.n_s + k]) continue;
      curvature += p.h_a(j, k) * v_a[k];
      var += p.j_a(j, k) * p.j_a(j, k) * v_a[k];
    }
    if (v_eps != 0.0) {
      for (std::size_t k = 0; k < d.n_eps; ++k) {
        curvature += p.h_eps(j, k) * v_eps;
        var += p.j_eps(j, k) * p.j_eps(j, k) * v_eps;
      }
    }
    S mean = p.value[j] + curvature * 0.5;
    if (!std::isfinite(ad::primal(mean)) || !std::isfinite(ad::primal(var))) {
      throw PropagationError("step " + std::to_string(step) + ": non-finite moment for " +
                             model.info().state_names[j]);
    }
    if (ad::primal(var) < 0.0 || !state_var) var = S(0.0);
    if (next.kinds[j] == VarKind::kBinary) {
      mean = clamp_probability(mean);
      var = mean * (1.0 - mean);
    }
    next.mean[j] = mean;
    next.var[j] = var;
  }
  return next;
}

template <class S>
S expected_reward(const envs::Model& model, const MarginalState<S>& s, const ActionMarginal<S>& a,
                  PropagationMode mode, int step) {
  check_sizes(model, s, a);
  const auto& d = model.dims();
  const bool state_var = uses_state_variance(mode);
  const bool action_var = uses_action_variance(mode);
  std::vector<char> active(d.n_s + d.n_a, 0);
  for (std::size_t k = 0; k < d.n_s; ++k) active[k] = state_var && !structurally_zero(s.var[k]);
  for (std::size_t k = 0; k < d.n_a; ++k) {
    active[d.n_s + k] = action_var && !structurally_zero(a.var[k]);
  }
  ad::RewardPartials<S> r;
  try {
    r = envs::eval_reward_partials<S>(model, std::span<const S>(s.mean),
                                      std::span<const S>(a.mean), std::span<const char>(active));
  } catch (const PropagationError& e) {
    throw PropagationError("step " + std::to_string(step) + ": " + e.what());
  }
  S curvature(0.0);
  for (std::size_t k = 0; k < d.n_s; ++k) {
    if (active[k]) curvature += r.h_s[k] * s.var[k];
  }
  for (std::size_t k = 0; k < d.n_a; ++k) {
    if (active[d.n_s + k]) curvature += r.h_a[k] * a.var[k];
  }
  return r.value + curvature * 0.5;
}

template <class S>
Trace<S> rollout_q(const envs::Model& model, std::span<const double> s0,
                   std::span<const ActionMarginal<S>> policy, double gamma, PropagationMode mode,
                   const PartialsProvider<S>& provider) {
  Trace<S> trace;
  trace.marginals.reserve(policy.size() + 1);
  trace.marginals.push_back(point_marginal<S>(model, s0));
  trace.expected_rewards.reserve(policy.size());
  S q(0.0);
  double discount = 1.0;
  for (std::size_t t = 0; t < policy.size(); ++t) {
    const int step = static_cast<int>(t);
    const S r = expected_reward(model, trace.marginals.back(), policy[t], mode, step);
    trace.expected_rewards.push_back(r);
    q += r * discount;
    discount *= gamma;
    trace.marginals.push_back(
        propagate_step(model, trace.marginals.back(), policy[t], mode, provider, step));
  }
  trace.q_value = q;
  return trace;
}

template <class S>
S rollout_value(const envs::Model& model, std::span<const double> s0,
                std::span<const ActionMarginal<S>> policy, double gamma, PropagationMode mode) {
  MarginalState<S> m = point_marginal<S>(model, s0);
  S q(0.0);
  double discount = 1.0;
  for (std::size_t t = 0; t < policy.size(); ++t) {
    const int step = static_cast<int>(t);
    q += expected_reward(model, m, policy[t], mode, step) * discount;
    discount *= gamma;
    if (t + 1 < policy.size()) m = propagate_step(model, m, policy[t], mode, {}, step);
  }
  return q;
}

void write_trace_csv(const envs::Model& model, const Trace<double>& trace, std::ostream& out) {
  out << "step,variable,mean,var\n";
  out.precision(17);
  const auto& names = model.info().state_names;
  for (std::size_t t = 0; t < trace.marginals.size(); ++t) {
    const auto& m = trace.marginals[t];
    for (std::size_t j = 0; j < m.mean.size(); ++j) {
      out << t << ',' << names[j] << ',' << m.mean[j] << ',' << m.var[j] << '\n';
    }
  }
}

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

double EmpiricalReport::complete_mean_error(std::size_t step) const {
  const auto& s = steps.at(step);
  return max_abs_diff(s.complete_mean, s.empirical_mean);
}

double EmpiricalReport::nv_mean_error(std::size_t step) const {
  const auto& s = steps.at(step);
  return max_abs_diff(s.nv_mean, s.empirical_mean);
}

EmpiricalReport compare_to_empirical(const envs::Model& model, std::span<const double> s0,
                                     std::span<const ActionMarginal<double>> policy,
                                     int n_samples, envs::Rng& rng) {
  if (n_samples < 100) throw ArgumentError("compare_to_empirical: n_samples must be >= 100");
  const auto& d = model.dims();
  const std::size_t depth = policy.size();

  // Welford accumulators per step and variable.
  std::vector<std::vector<double>> mean(depth + 1, std::vector<double>(d.n_s, 0.0));
  std::vector<std::vector<double>> m2(depth + 1, std::vector<double>(d.n_s, 0.0));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> action(d.n_a);
  for (int i = 0; i < n_samples; ++i) {
    std::vector<double> state(s0.begin(), s0.end());
    const double n = i + 1;
    for (std::size_t t = 0; t <= depth; ++t) {
      for (std::size_t j = 0; j < d.n_s; ++j) {
        const double delta = state[j] - mean[t][j];
        mean[t][j] += delta / n;
        m2[t][j] += delta * (state[j] - mean[t][j]);
      }
      if (t == depth) break;
      for (std::size_t j = 0; j < d.n_a; ++j) {
        action[j] = policy[t].mean[j] + std::sqrt(3.0 * policy[t].var[j]) * unit(rng);
      }
      state = envs::step_sim(model, state, action, rng).next_state;
    }
  }

  const Trace<double> complete =
      rollout_q<double>(model, s0, policy, 1.0, PropagationMode::kComplete);
  const Trace<double> nv = rollout_q<double>(model, s0, policy, 1.0, PropagationMode::kNoVariance);

  EmpiricalReport report;
  for (std::size_t t = 0; t <= depth; ++t) {
    StepComparison c;
    c.step = static_cast<int>(t);
    c.empirical_mean = mean[t];
    c.empirical_var = m2[t];
    for (double& v : c.empirical_var) v /= n_samples;
    c.complete_mean = complete.marginals[t].mean;
    c.complete_var = complete.marginals[t].var;
    c.nv_mean = nv.marginals[t].mean;
    c.nv_var = nv.marginals[t].var;
    report.steps.push_back(std::move(c));
  }
  return report;
}

#define DISPROD_INSTANTIATE(S)                                                                   \
  template MarginalState<S> point_marginal<S>(const envs::Model&, std::span<const double>);      \
  template MarginalState<S> propagate_step<S>(const envs::Model&, const MarginalState<S>&,       \
                                              const ActionMarginal<S>&, PropagationMode,         \
                                              const PartialsProvider<S>&, int);                  \
  template S expected_reward<S>(const envs::Model&, const MarginalState<S>&,                     \
                                const ActionMarginal<S>&, PropagationMode, int);                 \
  template Trace<S> rollout_q<S>(const envs::Model&, std::span<const double>,                    \
                                 std::span<const ActionMarginal<S>>, double, PropagationMode,    \
                                 const PartialsProvider<S>&);                                    \
  template S rollout_value<S>(const envs::Model&, std::span<const double>,                       \
                              std::span<const ActionMarginal<S>>, double, PropagationMode);

DISPROD_INSTANTIATE(double)
DISPROD_INSTANTIATE(Var)

#undef DISPROD_INSTANTIATE

}  // namespace disprod::prop
