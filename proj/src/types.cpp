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

#include "mrplan/types.hpp"

#include <sstream>

namespace mrplan {

std::string to_string(MapFamily f) {
  switch (f) {
    case MapFamily::empty: return "empty";
    case MapFamily::basic: return "basic";
    case MapFamily::dense: return "dense";
    case MapFamily::corridor: return "corridor";
    case MapFamily::shelf: return "shelf";
    case MapFamily::room: return "room";
  }
  throw std::invalid_argument("unknown MapFamily");
}

MapFamily map_family_from_string(const std::string& s) {
  if (s == "empty") return MapFamily::empty;
  if (s == "basic") return MapFamily::basic;
  if (s == "dense") return MapFamily::dense;
  if (s == "corridor") return MapFamily::corridor;
  if (s == "shelf") return MapFamily::shelf;
  if (s == "room") return MapFamily::room;
  throw std::invalid_argument("unknown map family: " + s);
}

std::vector<double> Trajectory::flatten() const {
  std::vector<double> flat;
  flat.reserve(positions.size() * 2);
  for (const auto& p : positions) {
    flat.push_back(p.x);
    flat.push_back(p.y);
  }
  return flat;
}

Trajectory Trajectory::unflatten(const std::vector<double>& flat, int num_robots, int horizon) {
  if (flat.size() != static_cast<size_t>(num_robots) * horizon * 2)
    throw std::invalid_argument("unflatten: size mismatch");
  Trajectory t(num_robots, horizon);
  for (size_t k = 0; k < t.positions.size(); ++k)
    t.positions[k] = {flat[2 * k], flat[2 * k + 1]};
  return t;
}

void ProblemInstance::validate() const {
  if (workspace_side <= 0.0) throw std::invalid_argument("workspace_side must be > 0");
  if (horizon < 2) throw std::invalid_argument("horizon must be >= 2");
  if (dt <= 0.0) throw std::invalid_argument("dt must be > 0");
  if (robots.empty()) throw std::invalid_argument("instance has no robots");

  auto inside = [&](const Vec2& p) {
    return p.x >= 0.0 && p.x <= workspace_side && p.y >= 0.0 && p.y <= workspace_side &&
           std::isfinite(p.x) && std::isfinite(p.y);
  };

  for (size_t i = 0; i < robots.size(); ++i) {
    const auto& r = robots[i];
    if (r.radius <= 0.0) throw std::invalid_argument("robot radius must be > 0");
    if (r.v_max <= 0.0) throw std::invalid_argument("robot v_max must be > 0");
    if (!inside(r.start) || !inside(r.goal))
      throw std::invalid_argument("robot start/goal outside workspace");
  }
  for (const auto& o : obstacles) {
    if (o.radius <= 0.0) throw std::invalid_argument("obstacle radius must be > 0");
    if (!std::isfinite(o.center.x) || !std::isfinite(o.center.y))
      throw std::invalid_argument("obstacle center not finite");
  }

  auto overlap_error = [](const std::string& what, size_t i, size_t j) {
    std::ostringstream os;
    os << "placement overlap: " << what << " (" << i << ", " << j << ")";
    throw std::invalid_argument(os.str());
  };

  for (size_t i = 0; i < robots.size(); ++i) {
    for (size_t j = i + 1; j < robots.size(); ++j) {
      const double sep = robots[i].radius + robots[j].radius;
      if ((robots[i].start - robots[j].start).norm() < sep) overlap_error("start-start", i, j);
      if ((robots[i].goal - robots[j].goal).norm() < sep) overlap_error("goal-goal", i, j);
    }
    for (size_t j = 0; j < obstacles.size(); ++j) {
      const double sep = robots[i].radius + obstacles[j].radius;
      if ((robots[i].start - obstacles[j].center).norm() < sep) overlap_error("start-obstacle", i, j);
      if ((robots[i].goal - obstacles[j].center).norm() < sep) overlap_error("goal-obstacle", i, j);
    }
  }
}

double separation_radius_robots(int i, int j, const ProblemInstance& instance) {
  if (i == j) throw std::invalid_argument("separation_radius_robots: i == j");
  if (i < 0 || j < 0 || i >= instance.num_robots() || j >= instance.num_robots())
    throw std::out_of_range("separation_radius_robots: robot index out of range");
  return instance.robots[i].radius + instance.robots[j].radius;
}

double separation_radius_obstacle(int i, int j, const ProblemInstance& instance) {
  if (i < 0 || i >= instance.num_robots())
    throw std::out_of_range("separation_radius_obstacle: robot index out of range");
  if (j < 0 || j >= instance.num_obstacles())
    throw std::out_of_range("separation_radius_obstacle: obstacle index out of range");
  return instance.robots[i].radius + instance.obstacles[j].radius;
}

Trajectory straight_line_trajectory(const ProblemInstance& instance) {
  Trajectory traj(instance.num_robots(), instance.horizon);
  const int H = instance.horizon;
  for (int i = 0; i < instance.num_robots(); ++i) {
    const Vec2 b = instance.robots[i].start;
    const Vec2 e = instance.robots[i].goal;
    for (int h = 0; h < H; ++h) {
      const double s = static_cast<double>(h) / (H - 1);
      traj.at(i, h) = b + (e - b) * s;
    }
  }
  return traj;
}

bool straight_line_feasible(const ProblemInstance& instance) {
  const int H = instance.horizon;
  for (const auto& r : instance.robots) {
    const double step = (r.goal - r.start).norm() / (H - 1);
    if (step > r.v_max * instance.dt + 1e-12) return false;
  }
  return true;
}

}  // namespace mrplan
