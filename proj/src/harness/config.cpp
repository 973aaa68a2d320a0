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

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "disprod/errors.hpp"
#include "disprod/harness/experiment.hpp"

namespace disprod::harness {

using nlohmann::json;

namespace {

const std::vector<std::string> kAxes = {"none",        "alpha",    "depth", "beta",
                                        "n_redundant", "restarts", "map"};

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return key == k; });
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": key '" + key + "' has the wrong type");
  }
}

std::string value_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return json(v.get<double>()).dump();
  throw ConfigError("sweep: values must be numbers or strings");
}

}  // namespace

void ExperimentSpec::validate() const {
  if (env.empty()) throw ConfigError("missing key 'env.name'");
  if (planner != "disprod" && planner != "cem" && planner != "mppi") {
    throw ConfigError("key 'planner' must be disprod, cem or mppi");
  }
  if (std::find(kAxes.begin(), kAxes.end(), axis) == kAxes.end()) {
    throw ConfigError("key 'sweep.axis' has unknown axis '" + axis + "'");
  }
  if (axis != "none" && values.empty()) throw ConfigError("key 'sweep.values' must be nonempty");
  if (repetitions < 1) throw ConfigError("key 'repetitions' must be >= 1");
  if (runs < 1) throw ConfigError("key 'runs' must be >= 1");
  if (episode_cap < 0) throw ConfigError("key 'episode_cap' must be >= 0");
  if (axis != "map") {
    for (const std::string& v : values) {
      try {
        std::size_t used = 0;
        std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
      } catch (const std::exception&) {
        throw ConfigError("key 'sweep.values' has non-numeric value '" + v + "'");
      }
    }
  }
}

bool operator==(const ExperimentSpec& a, const ExperimentSpec& b) {
  auto pc = [](const opt::PlannerConfig& c) {
    return std::tie(c.depth, c.restarts, c.max_steps, c.step_size, c.conv_tol, c.mode, c.gamma,
                    c.rng_seed, c.save_actions);
  };
  auto sc = [](const base::ShootingConfig& c) {
    return std::tie(c.depth, c.population, c.iterations, c.elite_count, c.temperature, c.init_std,
                    c.save_actions, c.gamma, c.rng_seed);
  };
  return a.id == b.id && a.env == b.env && a.env_params == b.env_params &&
         a.planner == b.planner && pc(a.disprod) == pc(b.disprod) &&
         sc(a.shooting) == sc(b.shooting) && a.axis == b.axis && a.values == b.values &&
         a.repetitions == b.repetitions && a.runs == b.runs && a.seed == b.seed &&
         a.episode_cap == b.episode_cap && a.record_timing == b.record_timing;
}

ExperimentSpec parse_config_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // The parser message carries the line and column.
    throw ConfigError(origin + ": " + e.what());
  }
  check_keys(j,
             {"id", "env", "planner", "disprod", "shooting", "sweep", "repetitions", "runs", "seed",
              "episode_cap", "record_timing"},
             origin);
  if (!j.contains("planner")) throw ConfigError(origin + ": missing key 'planner'");
  if (!j.contains("env")) throw ConfigError(origin + ": missing key 'env'");

  ExperimentSpec spec;
  // Depths default to the environment horizon, resolved at run time.
  spec.disprod.depth = 0;
  spec.shooting.depth = 0;
  read(j, "id", spec.id, origin);
  read(j, "planner", spec.planner, origin);

  const json& env = j.at("env");
  const std::string env_where = origin + ": env";
  check_keys(env, {"name", "alpha", "beta", "n_redundant", "map", "pendulum_noise", "gamma"},
             env_where);
  if (!env.contains("name")) throw ConfigError(origin + ": missing key 'env.name'");
  read(env, "name", spec.env, env_where);
  read(env, "alpha", spec.env_params.alpha, env_where);
  read(env, "beta", spec.env_params.beta, env_where);
  read(env, "n_redundant", spec.env_params.n_redundant, env_where);
  read(env, "map", spec.env_params.map, env_where);
  read(env, "pendulum_noise", spec.env_params.pendulum_noise, env_where);
  read(env, "gamma", spec.env_params.gamma, env_where);

  if (j.contains("disprod")) {
    const json& d = j.at("disprod");
    const std::string where = origin + ": disprod";
    check_keys(d,
               {"depth", "restarts", "max_steps", "step_size", "conv_tol", "mode", "save_actions"},
               where);
    read(d, "depth", spec.disprod.depth, where);
    read(d, "restarts", spec.disprod.restarts, where);
    read(d, "max_steps", spec.disprod.max_steps, where);
    read(d, "step_size", spec.disprod.step_size, where);
    read(d, "conv_tol", spec.disprod.conv_tol, where);
    read(d, "save_actions", spec.disprod.save_actions, where);
    if (d.contains("mode")) {
      try {
        spec.disprod.mode = prop::parse_mode(d.at("mode").get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError(where + ": key 'mode': " + e.what());
      }
    }
  }
  if (j.contains("shooting")) {
    const json& s = j.at("shooting");
    const std::string where = origin + ": shooting";
    check_keys(s,
               {"depth", "population", "iterations", "elite_count", "temperature", "init_std",
                "save_actions"},
               where);
    read(s, "depth", spec.shooting.depth, where);
    read(s, "population", spec.shooting.population, where);
    read(s, "iterations", spec.shooting.iterations, where);
    read(s, "elite_count", spec.shooting.elite_count, where);
    read(s, "temperature", spec.shooting.temperature, where);
    read(s, "init_std", spec.shooting.init_std, where);
    read(s, "save_actions", spec.shooting.save_actions, where);
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    const std::string where = origin + ": sweep";
    check_keys(s, {"axis", "values"}, where);
    read(s, "axis", spec.axis, where);
    if (s.contains("values")) {
      if (!s.at("values").is_array()) throw ConfigError(where + ": key 'values' must be an array");
      for (const json& v : s.at("values")) spec.values.push_back(value_text(v));
    }
  }
  read(j, "repetitions", spec.repetitions, origin);
  read(j, "runs", spec.runs, origin);
  read(j, "seed", spec.seed, origin);
  read(j, "episode_cap", spec.episode_cap, origin);
  read(j, "record_timing", spec.record_timing, origin);
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return spec;
}

ExperimentSpec parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string write_config(const ExperimentSpec& spec) {
  json j;
  j["id"] = spec.id;
  j["env"] = {{"name", spec.env},
              {"alpha", spec.env_params.alpha},
              {"beta", spec.env_params.beta},
              {"n_redundant", spec.env_params.n_redundant},
              {"map", spec.env_params.map},
              {"pendulum_noise", spec.env_params.pendulum_noise},
              {"gamma", spec.env_params.gamma}};
  j["planner"] = spec.planner;
  j["disprod"] = {{"depth", spec.disprod.depth},
                  {"restarts", spec.disprod.restarts},
                  {"max_steps", spec.disprod.max_steps},
                  {"step_size", spec.disprod.step_size},
                  {"conv_tol", spec.disprod.conv_tol},
                  {"mode", prop::to_string(spec.disprod.mode)},
                  {"save_actions", spec.disprod.save_actions}};
  j["shooting"] = {{"depth", spec.shooting.depth},
                   {"population", spec.shooting.population},
                   {"iterations", spec.shooting.iterations},
                   {"elite_count", spec.shooting.elite_count},
                   {"temperature", spec.shooting.temperature},
                   {"init_std", spec.shooting.init_std},
                   {"save_actions", spec.shooting.save_actions}};
  json values = json::array();
  for (const std::string& v : spec.values) {
    if (spec.axis == "map") {
      values.push_back(v);
    } else {
      values.push_back(json::parse(v));
    }
  }
  j["sweep"] = {{"axis", spec.axis}, {"values", values}};
  j["repetitions"] = spec.repetitions;
  j["runs"] = spec.runs;
  j["seed"] = spec.seed;
  j["episode_cap"] = spec.episode_cap;
  j["record_timing"] = spec.record_timing;
  return j.dump(2);
}

}  // namespace disprod::harness
