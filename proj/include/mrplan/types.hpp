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

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrplan {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double squared_norm() const { return x * x + y * y; }
  double norm() const { return std::sqrt(squared_norm()); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

enum class MapFamily { empty, basic, dense, corridor, shelf, room };

std::string to_string(MapFamily f);
MapFamily map_family_from_string(const std::string& s);

/// Positions of all robots over the horizon; robot-major storage.
struct Trajectory {
  int num_robots = 0;
  int horizon = 0;
  std::vector<Vec2> positions;  // size num_robots * horizon

  Trajectory() = default;
  Trajectory(int n, int h) : num_robots(n), horizon(h), positions(static_cast<size_t>(n) * h) {
    if (n <= 0 || h < 2) throw std::invalid_argument("Trajectory: need num_robots > 0 and horizon >= 2");
  }

  Vec2& at(int robot, int step) { return positions[index(robot, step)]; }
  const Vec2& at(int robot, int step) const { return positions[index(robot, step)]; }

  size_t index(int robot, int step) const {
    if (robot < 0 || robot >= num_robots || step < 0 || step >= horizon)
      throw std::out_of_range("Trajectory index out of range");
    return static_cast<size_t>(robot) * horizon + step;
  }

  bool all_finite() const {
    for (const auto& p : positions)
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
    return true;
  }

  std::vector<double> flatten() const;
  static Trajectory unflatten(const std::vector<double>& flat, int num_robots, int horizon);
};

struct RobotSpec {
  double radius = 0.05;
  Vec2 start;
  Vec2 goal;
  double v_max = 0.08;
};

struct Obstacle {
  Vec2 center;
  double radius = 0.05;
};

struct ProblemInstance {
  double workspace_side = 2.0;
  std::vector<RobotSpec> robots;
  std::vector<Obstacle> obstacles;
  int horizon = 64;
  double dt = 1.0;
  MapFamily map_family = MapFamily::empty;
  std::string instance_id;

  int num_robots() const { return static_cast<int>(robots.size()); }
  int num_obstacles() const { return static_cast<int>(obstacles.size()); }

  /// Throws std::invalid_argument when placement invariants are broken.
  void validate() const;
};

/// Minimum center separation for a robot pair: r_i + r_j.
double separation_radius_robots(int i, int j, const ProblemInstance& instance);

/// Minimum center separation between robot i and obstacle j.
double separation_radius_obstacle(int i, int j, const ProblemInstance& instance);

/// Straight line from each robot's start to goal; the canonical Omega_c witness
/// when per-step displacement fits the velocity limit.
Trajectory straight_line_trajectory(const ProblemInstance& instance);

/// True when the straight line satisfies every velocity limit, i.e. Omega_c is
/// known nonempty.
bool straight_line_feasible(const ProblemInstance& instance);

}  // namespace mrplan
