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

#include "disprod/envs/dubins.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "disprod/errors.hpp"

#ifndef DISPROD_MAPS_DIR
#define DISPROD_MAPS_DIR "maps"
#endif

namespace disprod::envs {

using nlohmann::json;

double Obstacle::penetration(double x, double y) const {
  if (kind == Kind::kCircle) return radius - std::hypot(x - cx, y - cy);
  return std::min({x - x0, x1 - x, y - y0, y1 - y});
}

namespace {

ModelInfo dubins_info(double alpha, double max_dv, double max_dw) {
  ModelInfo info;
  info.name = "dubins";
  info.dims = {5, 2, 2};
  info.state_names = {"x", "y", "theta", "v", "omega"};
  info.state_kinds.assign(5, VarKind::kContinuous);
  info.action_names = {"delta_v", "delta_omega"};
  info.action_kinds.assign(2, VarKind::kContinuous);
  info.action_bounds = {{-max_dv, max_dv}, {-max_dw, max_dw}};
  info.alpha = alpha;
  info.horizon_default = 100;
  info.episode_cap = 400;
  info.success_rule = SuccessRule::kReachGoal;
  return info;
}

std::pair<double, double> pair_of(const json& j, const char* key, const std::string& origin) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2) {
    throw ConfigError(origin + ": '" + key + "' must be a two-element array");
  }
  return {j[key][0].get<double>(), j[key][1].get<double>()};
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return key == k; });
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

}  // namespace

DubinsMap parse_map(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(origin + ": map must be a JSON object");
  check_keys(j, {"name", "start", "goal", "goal_radius", "obstacles"}, origin);
  DubinsMap map;
  try {
    map.name = j.value("name", std::string{});
    const json& start = j.at("start");
    if (!start.is_array() || start.size() != 3) {
      throw ConfigError(origin + ": 'start' must be [x, y, theta]");
    }
    map.start_x = start[0].get<double>();
    map.start_y = start[1].get<double>();
    map.start_theta = start[2].get<double>();
    std::tie(map.goal_x, map.goal_y) = pair_of(j, "goal", origin);
    map.goal_radius = j.value("goal_radius", 0.5);
    if (!(map.goal_radius > 0.0)) throw ConfigError(origin + ": 'goal_radius' must be positive");
    for (const json& o : j.value("obstacles", json::array())) {
      Obstacle obs;
      const std::string type = o.at("type").get<std::string>();
      if (type == "circle") {
        check_keys(o, {"type", "center", "radius"}, origin + " obstacle");
        obs.kind = Obstacle::Kind::kCircle;
        std::tie(obs.cx, obs.cy) = pair_of(o, "center", origin);
        obs.radius = o.at("radius").get<double>();
      } else if (type == "rect") {
        check_keys(o, {"type", "min", "max"}, origin + " obstacle");
        obs.kind = Obstacle::Kind::kRect;
        std::tie(obs.x0, obs.y0) = pair_of(o, "min", origin);
        std::tie(obs.x1, obs.y1) = pair_of(o, "max", origin);
        if (obs.x1 <= obs.x0 || obs.y1 <= obs.y0) {
          throw ConfigError(origin + ": rect obstacle with empty extent");
        }
      } else {
        throw ConfigError(origin + ": unknown obstacle type '" + type + "'");
      }
      map.obstacles.push_back(obs);
    }
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return map;
}

std::string serialize_map(const DubinsMap& map) {
  json j;
  j["name"] = map.name;
  j["start"] = {map.start_x, map.start_y, map.start_theta};
  j["goal"] = {map.goal_x, map.goal_y};
  j["goal_radius"] = map.goal_radius;
  j["obstacles"] = json::array();
  for (const Obstacle& o : map.obstacles) {
    if (o.kind == Obstacle::Kind::kCircle) {
      j["obstacles"].push_back({{"type", "circle"}, {"center", {o.cx, o.cy}}, {"radius", o.radius}});
    } else {
      j["obstacles"].push_back({{"type", "rect"}, {"min", {o.x0, o.y0}}, {"max", {o.x1, o.y1}}});
    }
  }
  return j.dump(2);
}

DubinsMap load_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open map file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_map(buf.str(), path);
}

std::string maps_directory() {
  if (const char* dir = std::getenv("DISPROD_MAPS_DIR")) return dir;
  return DISPROD_MAPS_DIR;
}

std::vector<std::string> bundled_map_names() {
  return {"no-ob-1", "no-ob-2", "no-ob-3", "no-ob-4", "no-ob-5", "ob-1",  "ob-2",  "ob-3",
          "ob-4",    "ob-6",    "ob-7",    "ob-8",    "ob-9",    "ob-10", "ob-11", "cave-mini"};
}

DubinsMap find_map(const std::string& name_or_path) {
  namespace fs = std::filesystem;
  if (name_or_path.ends_with(".json") || fs::exists(name_or_path)) return load_map(name_or_path);
  const fs::path candidate = fs::path(maps_directory()) / (name_or_path + ".json");
  if (!fs::exists(candidate)) throw ArgumentError("map: unknown map '" + name_or_path + "'");
  return load_map(candidate.string());
}

Dubins::Dubins(DubinsMap map, double alpha, double max_dv, double max_dw)
    : ModelBase(dubins_info(alpha, max_dv, max_dw)), map_(std::move(map)), alpha_(alpha) {}

std::vector<double> Dubins::initial_state(Rng& rng) const {
  (void)rng;
  return {map_.start_x, map_.start_y, map_.start_theta, 0.0, 0.0};
}

Outcome Dubins::classify(std::span<const double> s) const {
  if (std::hypot(s[0] - map_.goal_x, s[1] - map_.goal_y) <= map_.goal_radius) return {true, true};
  for (const Obstacle& o : map_.obstacles) {
    if (o.penetration(s[0], s[1]) > 0.0) return {true, false};
  }
  return {};
}

}  // namespace disprod::envs
