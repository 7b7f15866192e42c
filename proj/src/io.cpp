/*
 * Copyright (C) 2026 The mrplan Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mrplan/io.hpp"

#include <fstream>

namespace mrplan {

using nlohmann::json;

json instance_to_json(const ProblemInstance& instance) {
  json robots = json::array();
  for (const auto& r : instance.robots) {
    robots.push_back({{"radius", r.radius},
                      {"start", {r.start.x, r.start.y}},
                      {"goal", {r.goal.x, r.goal.y}},
                      {"v_max", r.v_max}});
  }
  json obstacles = json::array();
  for (const auto& o : instance.obstacles)
    obstacles.push_back({{"center", {o.center.x, o.center.y}}, {"radius", o.radius}});

  return json{{"workspace_side", instance.workspace_side},
              {"robots", robots},
              {"obstacles", obstacles},
              {"horizon", instance.horizon},
              {"dt", instance.dt},
              {"map_family", to_string(instance.map_family)},
              {"instance_id", instance.instance_id}};
}

ProblemInstance instance_from_json(const json& j) {
  ProblemInstance instance;
  instance.workspace_side = j.at("workspace_side").get<double>();
  instance.horizon = j.at("horizon").get<int>();
  instance.dt = j.at("dt").get<double>();
  instance.map_family = map_family_from_string(j.at("map_family").get<std::string>());
  instance.instance_id = j.at("instance_id").get<std::string>();
  for (const auto& rj : j.at("robots")) {
    RobotSpec r;
    r.radius = rj.at("radius").get<double>();
    r.start = {rj.at("start")[0].get<double>(), rj.at("start")[1].get<double>()};
    r.goal = {rj.at("goal")[0].get<double>(), rj.at("goal")[1].get<double>()};
    r.v_max = rj.at("v_max").get<double>();
    instance.robots.push_back(r);
  }
  for (const auto& oj : j.at("obstacles")) {
    Obstacle o;
    o.center = {oj.at("center")[0].get<double>(), oj.at("center")[1].get<double>()};
    o.radius = oj.at("radius").get<double>();
    instance.obstacles.push_back(o);
  }
  return instance;
}

json trajectory_to_json(const Trajectory& traj, const std::string& instance_id) {
  json positions = json::array();
  for (int i = 0; i < traj.num_robots; ++i) {
    json robot = json::array();
    for (int h = 0; h < traj.horizon; ++h) {
      const Vec2& p = traj.at(i, h);
      robot.push_back({p.x, p.y});
    }
    positions.push_back(std::move(robot));
  }
  return json{{"instance_id", instance_id}, {"positions", positions}};
}

Trajectory trajectory_from_json(const json& j, std::string* instance_id) {
  if (instance_id) *instance_id = j.at("instance_id").get<std::string>();
  const auto& positions = j.at("positions");
  const int n = static_cast<int>(positions.size());
  if (n == 0) throw std::invalid_argument("trajectory has no robots");
  const int h = static_cast<int>(positions[0].size());
  Trajectory traj(n, h);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(positions[i].size()) != h)
      throw std::invalid_argument("ragged trajectory positions");
    for (int s = 0; s < h; ++s)
      traj.at(i, s) = {positions[i][s][0].get<double>(), positions[i][s][1].get<double>()};
  }
  return traj;
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  json j;
  in >> j;
  return j;
}

void save_instance(const ProblemInstance& instance, const std::filesystem::path& path) {
  write_json_file(instance_to_json(instance), path);
}

ProblemInstance load_instance(const std::filesystem::path& path) {
  return instance_from_json(read_json_file(path));
}

void save_trajectory(const Trajectory& traj, const std::string& instance_id,
                     const std::filesystem::path& path) {
  write_json_file(trajectory_to_json(traj, instance_id), path);
}

Trajectory load_trajectory(const std::filesystem::path& path, std::string* instance_id) {
  return trajectory_from_json(read_json_file(path), instance_id);
}

}  // namespace mrplan
