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

#include "disprod/baselines/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "disprod/errors.hpp"

namespace disprod::base {

namespace {

constexpr double kMinStd = 1e-3;

struct Sequence {
  int depth = 0;
  int n_a = 0;
  std::vector<double> mean;  // step-major
  std::vector<double> std;
};

// Initial means: saved actions shifted one step, the rest at the centre of
// the bounds. Stds always start at init_std half-ranges.
Sequence initial_sequence(const envs::Model& model, const ShootingConfig& cfg,
                          const opt::SavedActions& saved) {
  Sequence seq;
  seq.depth = cfg.depth;
  seq.n_a = static_cast<int>(model.dims().n_a);
  const auto& bounds = model.info().action_bounds;
  seq.mean.resize(static_cast<std::size_t>(seq.depth) * seq.n_a);
  seq.std.resize(seq.mean.size());
  for (int t = 0; t < seq.depth; ++t) {
    for (int j = 0; j < seq.n_a; ++j) {
      const auto& b = bounds[j];
      seq.mean[t * seq.n_a + j] = 0.5 * (b.lo + b.hi);
      seq.std[t * seq.n_a + j] = std::max(kMinStd, cfg.init_std * 0.5 * b.range());
    }
  }
  if (cfg.save_actions && !saved.empty() && saved.n_a == seq.n_a) {
    const int steps = std::min(saved.steps(), seq.depth);
    std::copy_n(saved.means.begin(), steps * seq.n_a, seq.mean.begin());
  }
  return seq;
}

void sample(const envs::Model& model, const Sequence& seq, envs::Rng& rng,
            std::vector<double>& out) {
  const auto& bounds = model.info().action_bounds;
  std::normal_distribution<double> normal(0.0, 1.0);
  out.resize(seq.mean.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& b = bounds[i % seq.n_a];
    out[i] = std::clamp(seq.mean[i] + seq.std[i] * normal(rng), b.lo, b.hi);
  }
}

opt::SavedActions shifted(const Sequence& seq) {
  opt::SavedActions s;
  s.n_a = seq.n_a;
  s.means.assign(seq.mean.begin() + seq.n_a, seq.mean.end());
  s.vars.resize(s.means.size());
  for (std::size_t i = 0; i < s.vars.size(); ++i) {
    const double sd = seq.std[i + seq.n_a];
    s.vars[i] = sd * sd;
  }
  return s;
}

std::vector<double> first_action(const envs::Model& model, const Sequence& seq) {
  std::vector<double> a(seq.mean.begin(), seq.mean.begin() + seq.n_a);
  const auto& bounds = model.info().action_bounds;
  for (int j = 0; j < seq.n_a; ++j) a[j] = std::clamp(a[j], bounds[j].lo, bounds[j].hi);
  return a;
}

}  // namespace

void ShootingConfig::validate() const {
  if (depth < 1) throw ArgumentError("shooting config 'depth' must be >= 1");
  if (population < 2) throw ArgumentError("shooting config 'population' must be >= 2");
  if (iterations < 1) throw ArgumentError("shooting config 'iterations' must be >= 1");
  if (elite_count < 1 || elite_count > population) {
    throw ArgumentError("shooting config 'elite_count' must be in [1, population]");
  }
  if (!(temperature > 0.0)) throw ArgumentError("shooting config 'temperature' must be > 0");
  if (!(init_std > 0.0)) throw ArgumentError("shooting config 'init_std' must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ArgumentError("shooting config 'gamma' must be in (0, 1]");
}

double rollout_return(const envs::Model& model, std::span<const double> state,
                      std::span<const double> actions, double gamma, envs::Rng& rng) {
  const auto& d = model.dims();
  const std::size_t depth = actions.size() / d.n_a;
  std::vector<double> s(state.begin(), state.end());
  std::vector<double> next(d.n_s);
  std::vector<double> eps(d.n_eps);
  std::normal_distribution<double> normal(0.0, 1.0);
  double total = 0.0;
  double discount = 1.0;
  for (std::size_t t = 0; t < depth; ++t) {
    const std::span<const double> a = actions.subspan(t * d.n_a, d.n_a);
    total += discount * model.reward(s, a);
    discount *= gamma;
    for (double& e : eps) e = normal(rng);
    model.simulate(s, a, eps, next);
    s.swap(next);
  }
  return total;
}

EliteFit cem_refit(const std::vector<std::vector<double>>& samples,
                   std::span<const double> returns, int elite_count) {
  if (samples.empty() || samples.size() != returns.size() || elite_count < 1 ||
      elite_count > static_cast<int>(samples.size())) {
    throw ArgumentError("cem_refit: need 1 <= elite_count <= number of samples");
  }
  std::vector<int> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return returns[a] > returns[b]; });
  const std::size_t len = samples.front().size();
  const double n = elite_count;
  EliteFit fit;
  fit.mean.resize(len);
  fit.std.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    double mean = 0.0;
    for (int e = 0; e < elite_count; ++e) mean += samples[order[e]][i];
    mean /= n;
    double var = 0.0;
    for (int e = 0; e < elite_count; ++e) {
      const double dlt = samples[order[e]][i] - mean;
      var += dlt * dlt;
    }
    fit.mean[i] = mean;
    fit.std[i] = std::max(kMinStd, std::sqrt(var / n));
  }
  return fit;
}

ShootingResult cem_plan(const envs::Model& model, std::span<const double> state,
                        const ShootingConfig& cfg, const opt::SavedActions& saved,
                        envs::Rng& rng) {
  cfg.validate();
  Sequence seq = initial_sequence(model, cfg, saved);
  std::vector<std::vector<double>> samples(cfg.population);
  std::vector<double> returns(cfg.population);
  ShootingResult result;
  for (int it = 0; it < cfg.iterations; ++it) {
    for (int k = 0; k < cfg.population; ++k) {
      sample(model, seq, rng, samples[k]);
      returns[k] = rollout_return(model, state, samples[k], cfg.gamma, rng);
    }
    result.best_return = *std::max_element(returns.begin(), returns.end());
    EliteFit fit = cem_refit(samples, returns, cfg.elite_count);
    seq.mean = std::move(fit.mean);
    seq.std = std::move(fit.std);
  }
  result.action = first_action(model, seq);
  result.saved = shifted(seq);
  result.means = seq.mean;
  result.stds = seq.std;
  return result;
}

bool mppi_weights(std::span<const double> returns, double lambda, std::vector<double>& weights) {
  if (returns.empty() || !std::isfinite(lambda)) return false;
  const double best = *std::max_element(returns.begin(), returns.end());
  if (!std::isfinite(best)) return false;
  weights.resize(returns.size());
  double total = 0.0;
  for (std::size_t k = 0; k < returns.size(); ++k) {
    weights[k] = std::isfinite(returns[k]) ? std::exp(lambda * (returns[k] - best)) : 0.0;
    total += weights[k];
  }
  if (!(total > 0.0) || !std::isfinite(total)) return false;
  for (double& w : weights) w /= total;
  return true;
}

ShootingResult mppi_plan(const envs::Model& model, std::span<const double> state,
                         const ShootingConfig& cfg, const opt::SavedActions& saved,
                         envs::Rng& rng) {
  cfg.validate();
  Sequence seq = initial_sequence(model, cfg, saved);
  const std::size_t len = seq.mean.size();
  std::vector<std::vector<double>> samples(cfg.population);
  std::vector<double> returns(cfg.population);
  std::vector<double> weights;
  ShootingResult result;
  for (int it = 0; it < cfg.iterations; ++it) {
    for (int k = 0; k < cfg.population; ++k) {
      sample(model, seq, rng, samples[k]);
      returns[k] = rollout_return(model, state, samples[k], cfg.gamma, rng);
    }
    const auto best_it = std::max_element(returns.begin(), returns.end());
    result.best_return = *best_it;
    if (!mppi_weights(returns, cfg.temperature, weights)) {
      result.fallback = true;
      seq.mean = samples[best_it - returns.begin()];
      continue;
    }
    for (std::size_t i = 0; i < len; ++i) {
      double mean = 0.0;
      for (int k = 0; k < cfg.population; ++k) mean += weights[k] * samples[k][i];
      seq.mean[i] = mean;
    }
  }
  result.action = first_action(model, seq);
  result.saved = shifted(seq);
  result.means = seq.mean;
  result.stds = seq.std;
  return result;
}

opt::EpisodeResult run_shooting_episode(const envs::Model& model, Planner planner,
                                        const ShootingConfig& cfg, int episode_cap,
                                        envs::Rng& rng) {
  cfg.validate();
  envs::Rng planner_rng(rng());
  opt::SavedActions saved;
  const opt::StepPlanner plan = [&](std::span<const double> state, int, bool& degraded) {
    ShootingResult r = planner == Planner::kCem ? cem_plan(model, state, cfg, saved, planner_rng)
                                                : mppi_plan(model, state, cfg, saved, planner_rng);
    degraded = r.fallback;
    if (cfg.save_actions) saved = std::move(r.saved);
    return r.action;
  };
  return opt::run_mpc_episode(model, episode_cap, rng, plan);
}

}  // namespace disprod::base
