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

// disprod: run planning experiments, sweeps and distribution studies.
//
//   disprod run CONFIG [-o DIR] [--seed N]
//   disprod sweep CONFIG --axis AXIS --values V1,V2,... [-o DIR] [--seed N]
//   disprod study --env simple_env --alphas 0.1,0.2 [--depth 20] [--samples 100000]
//                 [--policy random|degenerate] [--seed N] [-o FILE]
//
// DISPROD_LOG sets the log level (trace, debug, info, warn, error, off).
// Exit codes: 0 success, 1 usage or configuration error, 2 partial results.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "disprod/errors.hpp"
#include "disprod/harness/experiment.hpp"

namespace {

using namespace disprod;

void configure_logging() {
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("DISPROD_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

int write_outputs(const harness::ExperimentSpec& spec, const harness::ExperimentResult& result,
                  const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string results = (std::filesystem::path(dir) / (spec.id + "_results.csv")).string();
  const std::string episodes = (std::filesystem::path(dir) / (spec.id + "_episodes.csv")).string();
  harness::write_results(result.rows, results);
  std::ofstream ep(episodes);
  harness::write_episodes(spec, result.episodes, ep);
  spdlog::info("wrote {} and {}", results, episodes);
  for (const auto& row : result.rows) {
    spdlog::info("{} {}={}: return {:.3f} +- {:.3f}", row.planner, row.axis, row.value,
                 row.mean_return, row.std_return);
  }
  return result.partial ? 2 : 0;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"DiSProD planning experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "results";
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "JSON experiment config")->required();
  run->add_option("-o,--out", out_dir, "Output directory");
  auto* run_seed = run->add_option("--seed", seed, "Override the base seed");

  std::string axis;
  std::string values;
  auto* sweep = app.add_subcommand("sweep", "Run a config over one axis");
  sweep->add_option("config", config_path, "JSON experiment config")->required();
  sweep->add_option("--axis", axis, "alpha, depth, beta, n_redundant, restarts or map")
      ->required();
  sweep->add_option("--values", values, "Comma-separated axis values")->required();
  sweep->add_option("-o,--out", out_dir, "Output directory");
  auto* sweep_seed = sweep->add_option("--seed", seed, "Override the base seed");

  harness::StudySpec study_spec;
  std::string alphas;
  std::string study_out;
  auto* study = app.add_subcommand("study", "Compare propagated and empirical distributions");
  study->add_option("--env", study_spec.env, "simple_env or pendulum");
  study->add_option("--alphas", alphas, "Comma-separated noise levels")->required();
  study->add_option("--depth", study_spec.depth, "Rollout depth");
  study->add_option("--samples", study_spec.n_samples, "Monte-Carlo trajectories");
  study->add_option("--policy", study_spec.policy, "random or degenerate");
  study->add_option("--pendulum-noise", study_spec.env_params.pendulum_noise, "exp or additive");
  study->add_option("--seed", study_spec.seed, "Seed");
  study->add_option("-o,--out", study_out, "Output CSV (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run || *sweep) {
      harness::ExperimentSpec spec = harness::parse_config(config_path);
      if ((*run && run_seed->count() > 0) || (*sweep && sweep_seed->count() > 0)) spec.seed = seed;
      if (*sweep) {
        spec.axis = axis;
        spec.values = split(values);
        spec.validate();
      }
      const harness::ExperimentResult result = harness::run_experiment(spec);
      return write_outputs(spec, result, out_dir);
    }
    for (const std::string& a : split(alphas)) study_spec.alphas.push_back(std::stod(a));
    const auto tables = harness::run_distribution_study(study_spec);
    const auto model = envs::make_env(study_spec.env, study_spec.env_params);
    if (study_out.empty()) {
      harness::write_study(*model, tables, std::cout);
    } else {
      std::ofstream out(study_out);
      harness::write_study(*model, tables, out);
    }
    for (const auto& t : tables) {
      const std::size_t last = t.report.steps.size() - 1;
      spdlog::info("alpha {}: terminal mean error complete {:.4g}, no_variance {:.4g}", t.alpha,
                   t.report.complete_mean_error(last), t.report.nv_mean_error(last));
    }
    return 0;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}
