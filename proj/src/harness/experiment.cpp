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

#include "disprod/harness/experiment.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "disprod/errors.hpp"

namespace disprod::harness {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int resolve_depth(int depth, const envs::Model& model) {
  return depth > 0 ? depth : model.info().horizon_default;
}

std::string format_number(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::string format_optional(const std::optional<double>& x) {
  return x ? format_number(*x) : "NA";
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, int repetition, int run) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ static_cast<std::uint64_t>(repetition));
  return splitmix64(h ^ (static_cast<std::uint64_t>(run) << 32));
}

ExperimentSpec apply_axis(const ExperimentSpec& spec, const std::string& value) {
  ExperimentSpec out = spec;
  if (spec.axis == "none") return out;
  if (spec.axis == "map") {
    out.env_params.map = value;
    return out;
  }
  const double x = std::stod(value);
  if (spec.axis == "alpha") {
    out.env_params.alpha = x;
  } else if (spec.axis == "beta") {
    out.env_params.beta = x;
  } else if (spec.axis == "depth") {
    out.disprod.depth = static_cast<int>(x);
    out.shooting.depth = static_cast<int>(x);
  } else if (spec.axis == "n_redundant") {
    out.env_params.n_redundant = static_cast<int>(x);
  } else if (spec.axis == "restarts") {
    // Restarts for DiSProD, population for the shooting planners.
    out.disprod.restarts = static_cast<int>(x);
    out.shooting.population = static_cast<int>(x);
    out.shooting.elite_count = std::max(1, std::min(out.shooting.elite_count, out.shooting.population));
  }
  return out;
}

std::optional<double> compute_sl(const std::vector<std::vector<double>>& trajectory,
                                 std::size_t x_index, std::size_t y_index, double goal_x,
                                 double goal_y, bool success, bool* degenerate,
                                 double goal_radius) {
  if (trajectory.empty()) throw ArgumentError("compute_sl: trajectory is empty");
  if (degenerate) *degenerate = false;
  const double sx = trajectory.front()[x_index];
  const double sy = trajectory.front()[y_index];
  const double straight = std::hypot(goal_x - sx, goal_y - sy) - goal_radius;
  if (straight <= 0.0) {
    if (degenerate) *degenerate = true;
    return std::nullopt;
  }
  if (!success) return std::nullopt;
  double length = 0.0;
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    length += std::hypot(trajectory[i][x_index] - trajectory[i - 1][x_index],
                         trajectory[i][y_index] - trajectory[i - 1][y_index]);
  }
  return length / straight;
}

opt::EpisodeResult run_planner_episode(const ExperimentSpec& spec, const envs::Model& model,
                                       std::uint64_t seed) {
  envs::Rng rng(seed);
  const int cap = spec.episode_cap > 0 ? spec.episode_cap : model.info().episode_cap;
  if (spec.planner == "disprod") {
    opt::PlannerConfig cfg = spec.disprod;
    cfg.depth = resolve_depth(cfg.depth, model);
    cfg.gamma = spec.env_params.gamma;
    cfg.rng_seed = seed;
    return opt::run_episode(model, cfg, cap, rng);
  }
  base::ShootingConfig cfg = spec.shooting;
  cfg.depth = resolve_depth(cfg.depth, model);
  cfg.gamma = spec.env_params.gamma;
  cfg.rng_seed = seed;
  const base::Planner planner = spec.planner == "cem" ? base::Planner::kCem : base::Planner::kMppi;
  return base::run_shooting_episode(model, planner, cfg, cap, rng);
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentResult result;
  std::vector<std::string> values = spec.values;
  if (spec.axis == "none") values = {""};

  for (const std::string& value : values) {
    const ExperimentSpec run_spec = apply_axis(spec, value);
    MetricsRow row;
    row.experiment_id = spec.id;
    row.axis = spec.axis;
    row.value = value;
    row.planner = spec.planner;

    std::vector<EpisodeRecord> records;
    try {
      const auto model = envs::make_env(run_spec.env, run_spec.env_params);
      const auto pos = model->position_indices();
      const auto goal = model->goal_position();
      for (int r = 0; r < spec.repetitions; ++r) {
        for (int m = 0; m < spec.runs; ++m) {
          EpisodeRecord rec;
          rec.value = value;
          rec.repetition = r;
          rec.run = m;
          rec.seed = derive_seed(spec.seed, r, m);
          const opt::EpisodeResult ep = run_planner_episode(run_spec, *model, rec.seed);
          rec.total_reward = ep.total_reward;
          rec.steps = ep.steps;
          rec.success = ep.success;
          if (pos && goal) {
            rec.sl = compute_sl(ep.trajectory, pos->first, pos->second, goal->first, goal->second,
                                ep.success, nullptr, model->goal_radius());
          }
          if (spec.record_timing) rec.plan_ms = mean_of(ep.plan_ms);
          if (model->dims().n_a > 1 && !ep.actions.empty()) {
            double acc = 0.0;
            for (const auto& a : ep.actions) {
              double s = 0.0;
              for (std::size_t j = 1; j < a.size(); ++j) s += std::abs(a[j]);
              acc += s / static_cast<double>(a.size() - 1);
            }
            rec.mean_abs_secondary_action = acc / static_cast<double>(ep.actions.size());
          }
          spdlog::debug("{} {}={} rep {} run {}: return {:.4f} steps {} success {}", spec.id,
                        spec.axis, value, r, m, rec.total_reward, rec.steps, rec.success);
          records.push_back(rec);
        }
      }
    } catch (const std::exception& e) {
      spdlog::error("{} {}={}: aborted after {} episodes: {}", spec.id, spec.axis, value,
                    records.size(), e.what());
      row.partial = true;
      result.partial = true;
    }

    row.episodes = static_cast<int>(records.size());
    if (!records.empty()) {
      std::vector<double> rep_means;
      for (int r = 0; r < spec.repetitions; ++r) {
        std::vector<double> returns;
        for (const auto& rec : records) {
          if (rec.repetition == r) returns.push_back(rec.total_reward);
        }
        if (!returns.empty()) rep_means.push_back(mean_of(returns));
      }
      row.mean_return = mean_of(rep_means);
      double ss = 0.0;
      for (double x : rep_means) ss += (x - row.mean_return) * (x - row.mean_return);
      row.std_return = std::sqrt(ss / static_cast<double>(rep_means.size()));

      const auto model = envs::make_env(run_spec.env, run_spec.env_params);
      if (model->info().success_rule != envs::SuccessRule::kNone) {
        const auto successes = std::count_if(records.begin(), records.end(),
                                             [](const EpisodeRecord& r) { return r.success; });
        row.sr = 100.0 * static_cast<double>(successes) / static_cast<double>(records.size());
      }
      std::vector<double> sls, steps, ms;
      for (const auto& rec : records) {
        if (rec.sl) sls.push_back(*rec.sl);
        steps.push_back(rec.steps);
        ms.push_back(rec.plan_ms);
      }
      if (!sls.empty()) row.sl = mean_of(sls);
      row.mean_steps = mean_of(steps);
      row.wall_ms = spec.record_timing ? mean_of(ms) : 0.0;
    }
    result.rows.push_back(row);
    result.episodes.insert(result.episodes.end(), records.begin(), records.end());
  }
  return result;
}

void write_results(const std::vector<MetricsRow>& rows, std::ostream& out) {
  out << kResultsHeader << '\n';
  for (const MetricsRow& r : rows) {
    auto stat = [&](double x) { return r.episodes > 0 ? format_number(x) : std::string("NA"); };
    out << r.experiment_id << ',' << r.axis << ',' << r.value << ',' << r.planner << ','
        << stat(r.mean_return) << ',' << stat(r.std_return) << ',' << format_optional(r.sr) << ','
        << format_optional(r.sl) << ',' << stat(r.mean_steps) << ',' << format_number(r.wall_ms)
        << ',' << (r.partial ? 1 : 0) << '\n';
  }
}

void write_results(const std::vector<MetricsRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write results file " + path);
  write_results(rows, out);
}

void write_episodes(const ExperimentSpec& spec, const std::vector<EpisodeRecord>& episodes,
                    std::ostream& out) {
  out << "experiment_id,axis,value,planner,repetition,run,seed,return,steps,success,sl\n";
  for (const EpisodeRecord& e : episodes) {
    out << spec.id << ',' << spec.axis << ',' << e.value << ',' << spec.planner << ','
        << e.repetition << ',' << e.run << ',' << e.seed << ',' << format_number(e.total_reward)
        << ',' << e.steps << ',' << (e.success ? 1 : 0) << ',' << format_optional(e.sl) << '\n';
  }
}

std::vector<StudyTable> run_distribution_study(const StudySpec& spec) {
  if (spec.env != "simple_env" && spec.env != "pendulum") {
    throw ArgumentError("distribution study supports simple_env and pendulum, not '" + spec.env +
                        "'");
  }
  if (spec.alphas.empty()) throw ArgumentError("distribution study needs at least one alpha");
  if (spec.depth < 1) throw ArgumentError("distribution study 'depth' must be >= 1");
  if (spec.policy != "random" && spec.policy != "degenerate") {
    throw ArgumentError("distribution study 'policy' must be random or degenerate");
  }

  // Start state and action distributions are drawn once and shared by all alphas.
  envs::Rng setup(spec.seed);
  const auto reference = envs::make_env(spec.env, spec.env_params);
  const std::vector<double> s0 = reference->initial_state(setup);
  opt::PlannerConfig cfg;
  cfg.depth = spec.depth;
  cfg.restarts = 1;
  const opt::PolicyParams params = opt::init_policy(*reference, cfg, {}, setup);
  const int n_a = params.n_a;
  std::vector<prop::ActionMarginal<double>> policy(spec.depth);
  for (int t = 0; t < spec.depth; ++t) {
    for (int j = 0; j < n_a; ++j) {
      policy[t].mean.push_back(params.mean(0, t, j));
      policy[t].var.push_back(spec.policy == "degenerate" ? 0.0 : params.var(0, t, j));
    }
  }

  std::vector<StudyTable> tables;
  for (std::size_t i = 0; i < spec.alphas.size(); ++i) {
    envs::EnvParams p = spec.env_params;
    p.alpha = spec.alphas[i];
    const auto model = envs::make_env(spec.env, p);
    envs::Rng rng(derive_seed(spec.seed, static_cast<int>(i), 0));
    tables.push_back({spec.alphas[i], prop::compare_to_empirical(*model, s0, policy,
                                                                 spec.n_samples, rng)});
  }
  return tables;
}

void write_study(const envs::Model& model, const std::vector<StudyTable>& tables,
                 std::ostream& out) {
  out << "alpha,step,variable,empirical_mean,empirical_var,complete_mean,complete_var,nv_mean,"
         "nv_var\n";
  const auto& names = model.info().state_names;
  for (const StudyTable& t : tables) {
    for (const prop::StepComparison& s : t.report.steps) {
      for (std::size_t j = 0; j < names.size(); ++j) {
        out << format_number(t.alpha) << ',' << s.step << ',' << names[j] << ','
            << format_number(s.empirical_mean[j]) << ',' << format_number(s.empirical_var[j])
            << ',' << format_number(s.complete_mean[j]) << ',' << format_number(s.complete_var[j])
            << ',' << format_number(s.nv_mean[j]) << ',' << format_number(s.nv_var[j]) << '\n';
      }
    }
  }
}

}  // namespace disprod::harness
