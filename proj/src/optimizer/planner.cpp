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

#include "disprod/optimizer/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "disprod/autodiff/gradient.hpp"
#include "disprod/errors.hpp"

namespace disprod::opt {

using ad::Var;
using envs::Bounds;
using envs::VarKind;

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool is_binary(const envs::Model& model, int j) {
  return model.info().action_kinds[j] == VarKind::kBinary;
}

Bounds bounds_of(const envs::Model& model, int j) {
  if (is_binary(model, j)) return {0.0, 1.0};
  return model.info().action_bounds[j];
}

// Converts a row into per-step action marginals. Binary dimensions take
// var = p (1 - p) from the mean, so their stored var carries no gradient.
template <class S>
std::vector<prop::ActionMarginal<S>> to_marginals(const envs::Model& model, int depth,
                                                  std::span<const S> row) {
  const int n_a = static_cast<int>(model.dims().n_a);
  std::vector<prop::ActionMarginal<S>> policy(depth);
  for (int t = 0; t < depth; ++t) {
    policy[t].mean.reserve(n_a);
    policy[t].var.reserve(n_a);
    for (int j = 0; j < n_a; ++j) {
      const S& mean = row[2 * (t * n_a + j)];
      policy[t].mean.push_back(mean);
      policy[t].var.push_back(is_binary(model, j) ? mean * (1.0 - mean)
                                                  : row[2 * (t * n_a + j) + 1]);
    }
  }
  return policy;
}

void fresh_entry(const envs::Model& model, int t, int j, envs::Rng& rng, double& mean,
                 double& var) {
  const Bounds b = bounds_of(model, j);
  if (is_binary(model, j)) {
    if (t == 0) {
      mean = std::bernoulli_distribution(0.5)(rng) ? 1.0 : 0.0;
    } else {
      mean = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    }
    var = mean * (1.0 - mean);
    return;
  }
  if (b.range() == 0.0) {
    mean = b.lo;
    var = 0.0;
    return;
  }
  mean = std::uniform_real_distribution<double>(b.lo, b.hi)(rng);
  const double half = std::min(b.hi - mean, mean - b.lo);
  var = half * half / 12.0;
}

void check_row_size(const envs::Model& model, int depth, std::span<const double> row) {
  const std::size_t expected = 2 * static_cast<std::size_t>(depth) * model.dims().n_a;
  if (row.size() != expected) {
    throw ArgumentError("policy row has " + std::to_string(row.size()) + " entries, expected " +
                        std::to_string(expected));
  }
}

}  // namespace

void PlannerConfig::validate() const {
  if (depth < 1) throw ArgumentError("planner config 'depth' must be >= 1");
  if (restarts < 1) throw ArgumentError("planner config 'restarts' must be >= 1");
  if (max_steps < 1) throw ArgumentError("planner config 'max_steps' must be >= 1");
  if (!(step_size >= 0.0)) throw ArgumentError("planner config 'step_size' must be >= 0");
  if (!(conv_tol > 0.0)) throw ArgumentError("planner config 'conv_tol' must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ArgumentError("planner config 'gamma' must be in (0, 1]");
}

double max_variance(double mean, const Bounds& b) {
  const double range = b.range();
  const double half = std::max(0.0, std::min(mean - b.lo, b.hi - mean));
  return std::min(range * range / 12.0, half * half / 12.0);
}

PolicyParams init_policy(const envs::Model& model, const PlannerConfig& config,
                         const SavedActions& saved, envs::Rng& rng) {
  config.validate();
  const int n_a = static_cast<int>(model.dims().n_a);
  PolicyParams p(config.restarts, config.depth, n_a);
  for (int r = 0; r < p.restarts; ++r) {
    for (int t = 0; t < p.depth; ++t) {
      for (int j = 0; j < n_a; ++j) fresh_entry(model, t, j, rng, p.mean(r, t, j), p.var(r, t, j));
    }
  }
  if (!saved.empty()) {
    if (saved.n_a != n_a) throw ArgumentError("saved actions have the wrong action dimension");
    // Row 0 continues the previous plan; the steps past the saved ones keep
    // their fresh draws.
    const int steps = std::min(saved.steps(), p.depth - 1);
    for (int t = 0; t < steps; ++t) {
      for (int j = 0; j < n_a; ++j) {
        p.mean(0, t, j) = saved.means[t * n_a + j];
        p.var(0, t, j) = saved.vars[t * n_a + j];
      }
    }
    project(model, p);
  }
  return p;
}

void project(const envs::Model& model, PolicyParams& params) {
  for (int r = 0; r < params.restarts; ++r) {
    for (int t = 0; t < params.depth; ++t) {
      for (int j = 0; j < params.n_a; ++j) {
        const Bounds b = bounds_of(model, j);
        double& mean = params.mean(r, t, j);
        double& var = params.var(r, t, j);
        mean = std::clamp(mean, b.lo, b.hi);
        if (is_binary(model, j)) {
          var = mean * (1.0 - mean);
        } else {
          var = std::clamp(var, 0.0, max_variance(mean, b));
        }
      }
    }
  }
}

double row_value_and_gradient(const envs::Model& model, std::span<const double> s0,
                              const PlannerConfig& config, std::span<const double> row,
                              std::span<double> grad) {
  check_row_size(model, config.depth, row);
  auto loss = [&](std::span<const Var> x) {
    const auto policy = to_marginals<Var>(model, config.depth, x);
    return prop::rollout_value<Var>(model, s0, policy, config.gamma, config.mode);
  };
  return ad::value_and_gradient(loss, row, grad);
}

double row_value(const envs::Model& model, std::span<const double> s0, const PlannerConfig& config,
                 std::span<const double> row) {
  check_row_size(model, config.depth, row);
  const auto policy = to_marginals<double>(model, config.depth, row);
  return prop::rollout_value<double>(model, s0, policy, config.gamma, config.mode);
}

std::vector<double> grad_policy_loss(const envs::Model& model, int depth,
                                     const std::function<Var(std::span<const Var>)>& loss,
                                     std::span<const double> row) {
  check_row_size(model, depth, row);
  const int n_a = static_cast<int>(model.dims().n_a);
  for (int t = 0; t < depth; ++t) {
    for (int j = 0; j < n_a; ++j) {
      const Bounds b = bounds_of(model, j);
      const double mean = row[2 * (t * n_a + j)];
      const double var = row[2 * (t * n_a + j) + 1];
      const double slack = 1e-12 * std::max(1.0, b.range() * b.range());
      if (mean < b.lo || mean > b.hi) {
        throw ArgumentError("policy mean at step " + std::to_string(t) + ", action " +
                            std::to_string(j) + " is outside the action bounds");
      }
      if (!is_binary(model, j) && (var < 0.0 || var > max_variance(mean, b) + slack)) {
        throw ArgumentError("policy variance at step " + std::to_string(t) + ", action " +
                            std::to_string(j) + " is outside [0, max_variance]");
      }
    }
  }
  return ad::gradient(loss, row);
}

UpdateResult safe_update(const envs::Model& model, PolicyParams& params, AdamState& adam,
                         std::span<const double> grads, double step_size,
                         std::span<const double> q_before, const RowEvaluator& q_eval,
                         std::vector<char>& frozen) {
  const std::size_t cols = params.cols();
  if (grads.size() != params.data.size() || q_before.size() != std::size_t(params.restarts) ||
      frozen.size() != std::size_t(params.restarts) || adam.m.size() != params.data.size()) {
    throw ArgumentError("safe_update: shape mismatch");
  }
  UpdateResult result;
  result.q_after.assign(q_before.begin(), q_before.end());
  result.accepted.assign(params.restarts, 0);

  std::vector<double> saved_row(cols), saved_m(cols), saved_v(cols);
  for (int r = 0; r < params.restarts; ++r) {
    if (frozen[r]) continue;
    const std::span<const double> g = grads.subspan(r * cols, cols);
    if (!std::all_of(g.begin(), g.end(), [](double x) { return std::isfinite(x); })) {
      frozen[r] = 1;
      ++result.newly_frozen;
      continue;
    }
    std::span<double> row = params.row(r);
    std::copy(row.begin(), row.end(), saved_row.begin());
    std::copy_n(adam.m.begin() + r * cols, cols, saved_m.begin());
    std::copy_n(adam.v.begin() + r * cols, cols, saved_v.begin());
    const int saved_t = adam.t[r];

    const int t = ++adam.t[r];
    const double c1 = 1.0 - std::pow(kBeta1, t);
    const double c2 = 1.0 - std::pow(kBeta2, t);
    for (int step = 0; step < params.depth; ++step) {
      for (int j = 0; j < params.n_a; ++j) {
        const Bounds b = bounds_of(model, j);
        const double range = b.range();
        if (range == 0.0) continue;
        for (int which = 0; which < 2; ++which) {
          if (which == 1 && is_binary(model, j)) continue;
          const std::size_t c = 2 * (step * params.n_a + j) + which;
          const double scale = which == 0 ? range : range * range;
          const double gn = g[c] * scale;  // gradient in normalized units
          double& m = adam.m[r * cols + c];
          double& v = adam.v[r * cols + c];
          m = kBeta1 * m + (1.0 - kBeta1) * gn;
          v = kBeta2 * v + (1.0 - kBeta2) * gn * gn;
          const double delta = step_size * (m / c1) / (std::sqrt(v / c2) + kAdamEps);
          row[c] += delta * scale;  // ascent
        }
      }
    }
    // Project this row only.
    for (int step = 0; step < params.depth; ++step) {
      for (int j = 0; j < params.n_a; ++j) {
        const Bounds b = bounds_of(model, j);
        double& mean = row[2 * (step * params.n_a + j)];
        double& var = row[2 * (step * params.n_a + j) + 1];
        mean = std::clamp(mean, b.lo, b.hi);
        var = is_binary(model, j) ? mean * (1.0 - mean)
                                  : std::clamp(var, 0.0, max_variance(mean, b));
      }
    }

    const double q = q_eval(row);
    if (q > q_before[r]) {
      result.q_after[r] = q;
      result.accepted[r] = 1;
    } else {
      std::copy(saved_row.begin(), saved_row.end(), row.begin());
      std::copy(saved_m.begin(), saved_m.end(), adam.m.begin() + r * cols);
      std::copy(saved_v.begin(), saved_v.end(), adam.v.begin() + r * cols);
      adam.t[r] = saved_t;
    }
  }
  return result;
}

bool converged(const envs::Model& model, const PolicyParams& old_params,
               const PolicyParams& new_params, double conv_tol) {
  if (old_params.data.size() != new_params.data.size() ||
      old_params.restarts != new_params.restarts || old_params.depth != new_params.depth) {
    throw ArgumentError("converged: shape mismatch");
  }
  double worst = 0.0;
  for (int r = 0; r < old_params.restarts; ++r) {
    for (int t = 0; t < old_params.depth; ++t) {
      for (int j = 0; j < old_params.n_a; ++j) {
        const double range = bounds_of(model, j).range();
        if (range == 0.0) continue;
        worst = std::max(worst,
                         std::abs(new_params.mean(r, t, j) - old_params.mean(r, t, j)) / range);
        if (is_binary(model, j)) continue;
        worst = std::max(worst, 12.0 * std::abs(new_params.var(r, t, j) - old_params.var(r, t, j)) /
                                    (range * range));
      }
    }
  }
  return worst <= conv_tol;
}

PlanDiagnostics optimize_policy(const envs::Model& model, std::span<const double> state,
                                const PlannerConfig& config, PolicyParams& params,
                                std::vector<double>& q) {
  config.validate();
  const int n_r = params.restarts;
  const std::size_t cols = params.cols();
  PlanDiagnostics diag;
  std::vector<char> frozen(n_r, 0);
  // Rows whose last candidate was rejected: with unchanged parameters,
  // gradient and Adam state, the next candidate would be identical and be
  // rejected again, so they are not re-evaluated.
  std::vector<char> stalled(n_r, 0);
  std::vector<double> grads(params.data.size(), 0.0);
  q.assign(n_r, kNegInf);

  auto compute_gradient = [&](int r) {
    try {
      q[r] = row_value_and_gradient(model, state, config, params.row(r),
                                    std::span<double>(grads).subspan(r * cols, cols));
    } catch (const PropagationError&) {
      frozen[r] = 1;
      q[r] = kNegInf;
    } catch (const DomainError&) {
      frozen[r] = 1;
      q[r] = kNegInf;
    }
  };
  for (int r = 0; r < n_r; ++r) compute_gradient(r);
  diag.q_history.push_back(q);

  const RowEvaluator q_eval = [&](std::span<const double> row) {
    try {
      const double v = row_value(model, state, config, row);
      return std::isfinite(v) ? v : kNegInf;
    } catch (const PropagationError&) {
      return kNegInf;
    } catch (const DomainError&) {
      return kNegInf;
    }
  };

  AdamState adam(params);
  for (int it = 0; it < config.max_steps; ++it) {
    if (it > 0) {
      for (int r = 0; r < n_r; ++r) {
        if (!frozen[r] && !stalled[r]) {
          const double accepted_q = q[r];
          compute_gradient(r);
          if (!frozen[r]) q[r] = accepted_q;
        }
      }
    }
    const PolicyParams old = params;
    std::vector<char> skip(n_r);
    for (int r = 0; r < n_r; ++r) skip[r] = frozen[r] || stalled[r];
    std::vector<char> frozen_view = skip;
    const UpdateResult upd =
        safe_update(model, params, adam, grads, config.step_size, q, q_eval, frozen_view);
    for (int r = 0; r < n_r; ++r) {
      if (skip[r]) continue;
      if (frozen_view[r]) {
        frozen[r] = 1;
      } else if (upd.accepted[r]) {
        ++diag.accepted_updates;
      } else {
        stalled[r] = 1;
      }
    }
    q = upd.q_after;
    diag.q_history.push_back(q);
    ++diag.iterations;
    if (converged(model, old, params, config.conv_tol)) {
      diag.converged = true;
      break;
    }
  }
  diag.frozen_rows = static_cast<int>(std::count(frozen.begin(), frozen.end(), 1));
  return diag;
}

int select_best_row(std::span<const double> q, envs::Rng& rng) {
  if (q.empty()) throw ArgumentError("select_best_row: no rows");
  double best = kNegInf;
  for (double x : q) {
    if (std::isfinite(x)) best = std::max(best, x);
  }
  std::vector<int> ties;
  for (std::size_t r = 0; r < q.size(); ++r) {
    if (!std::isfinite(best) || q[r] == best) ties.push_back(static_cast<int>(r));
  }
  return ties[std::uniform_int_distribution<std::size_t>(0, ties.size() - 1)(rng)];
}

PlanResult plan_one_step(const envs::Model& model, std::span<const double> state,
                         const PlannerConfig& config, const SavedActions& saved, envs::Rng& rng) {
  PolicyParams params = init_policy(model, config, saved, rng);
  std::vector<double> q;
  PlanResult result;
  result.diagnostics = optimize_policy(model, state, config, params, q);
  PlanDiagnostics& diag = result.diagnostics;

  const double best = *std::max_element(q.begin(), q.end());
  const int pick = select_best_row(q, rng);
  diag.best_row = pick;
  diag.best_q = q[pick];
  diag.degraded = !std::isfinite(best) || diag.frozen_rows == params.restarts;

  const int n_a = params.n_a;
  for (int j = 0; j < n_a; ++j) result.action.push_back(params.mean(pick, 0, j));
  result.saved.n_a = n_a;
  for (int t = 1; t < params.depth; ++t) {
    for (int j = 0; j < n_a; ++j) {
      result.saved.means.push_back(params.mean(pick, t, j));
      result.saved.vars.push_back(params.var(pick, t, j));
    }
  }
  if (std::isfinite(best)) {
    const auto policy = to_marginals<double>(model, params.depth, params.row(pick));
    try {
      diag.best_trace = prop::rollout_q<double>(model, state, policy, config.gamma, config.mode);
    } catch (const PropagationError&) {
      diag.degraded = true;
    } catch (const DomainError&) {
      diag.degraded = true;
    }
  }
  return result;
}

EpisodeResult run_mpc_episode(const envs::Model& model, int episode_cap, envs::Rng& rng,
                              const StepPlanner& plan) {
  EpisodeResult ep;
  std::vector<double> state = model.initial_state(rng);
  ep.trajectory.push_back(state);
  for (int step = 0; step < episode_cap; ++step) {
    bool degraded = false;
    const auto start = std::chrono::steady_clock::now();
    const std::vector<double> action = plan(state, step, degraded);
    const auto stop = std::chrono::steady_clock::now();
    ep.plan_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    if (degraded) ++ep.degraded_plans;

    envs::StepResult sr = envs::step_sim(model, state, action, rng);
    if (sr.action_clamped) ++ep.clamped_actions;
    ep.total_reward += sr.reward;
    ++ep.steps;
    state = std::move(sr.next_state);
    ep.trajectory.push_back(state);
    ep.actions.push_back(action);
    const envs::Outcome outcome = model.classify(state);
    if (outcome.terminal) {
      ep.terminal = true;
      ep.success = outcome.success;
      break;
    }
  }
  if (model.info().success_rule == envs::SuccessRule::kSurvive) {
    ep.success = !ep.terminal && ep.steps > 0 && ep.steps == episode_cap;
  } else if (model.info().success_rule == envs::SuccessRule::kNone) {
    ep.success = false;
  }
  return ep;
}

EpisodeResult run_episode(const envs::Model& model, const PlannerConfig& config, int episode_cap,
                          envs::Rng& rng) {
  config.validate();
  envs::Rng planner_rng(rng());
  SavedActions saved;
  const StepPlanner plan = [&](std::span<const double> state, int, bool& degraded) {
    PlanResult r = plan_one_step(model, state, config, saved, planner_rng);
    degraded = r.diagnostics.degraded;
    if (config.save_actions) saved = std::move(r.saved);
    return r.action;
  };
  return run_mpc_episode(model, episode_cap, rng, plan);
}

}  // namespace disprod::opt
