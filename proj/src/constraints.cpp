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

#include "mrplan/constraints.hpp"

#include <algorithm>
#include <limits>

namespace mrplan {

std::string to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::endpoint: return "endpoint";
    case ConstraintKind::velocity: return "velocity";
    case ConstraintKind::workspace: return "workspace";
    case ConstraintKind::robot_pair: return "robot_pair";
    case ConstraintKind::obstacle_pair: return "obstacle_pair";
    case ConstraintKind::none: return "none";
  }
  return "?";
}

void require_shape_match(const Trajectory& traj, const ProblemInstance& instance) {
  if (traj.num_robots != instance.num_robots() || traj.horizon != instance.horizon)
    throw std::invalid_argument("trajectory shape does not match instance");
  if (traj.positions.size() != static_cast<size_t>(traj.num_robots) * traj.horizon)
    throw std::invalid_argument("trajectory storage inconsistent with declared shape");
}

int NonconvexResiduals::robot_pair_index(int i, int j, int h) const {
  if (i > j) std::swap(i, j);
  // pairs (0,1),(0,2),...,(0,n-1),(1,2),... lexicographic
  const int n = num_robots;
  const int pair = i * n - i * (i + 1) / 2 + (j - i - 1);
  return pair * horizon + h;
}

int NonconvexResiduals::obstacle_pair_index(int i, int j, int h) const {
  return (i * num_obstacles + j) * horizon + h;
}

void NonconvexResiduals::robot_pair_from_flat(int flat, int* i, int* j, int* h) const {
  const int pair = flat / horizon;
  *h = flat % horizon;
  int p = pair;
  int a = 0;
  int remaining = num_robots - 1;
  while (p >= remaining) {
    p -= remaining;
    ++a;
    --remaining;
  }
  *i = a;
  *j = a + 1 + p;
}

void NonconvexResiduals::obstacle_pair_from_flat(int flat, int* i, int* j, int* h) const {
  *h = flat % horizon;
  const int pair = flat / horizon;
  *j = pair % num_obstacles;
  *i = pair / num_obstacles;
}

double NonconvexResiduals::min_robot_residual() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : robot_pairs) m = std::min(m, v);
  return m;
}

double NonconvexResiduals::min_obstacle_residual() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : obstacle_pairs) m = std::min(m, v);
  return m;
}

ConvexViolation convex_violation(const Trajectory& traj, const ProblemInstance& instance) {
  require_shape_match(traj, instance);
  ConvexViolation v;
  const int H = traj.horizon;
  for (int i = 0; i < traj.num_robots; ++i) {
    const auto& spec = instance.robots[i];
    v.endpoint_error = std::max(v.endpoint_error, (traj.at(i, 0) - spec.start).norm());
    v.endpoint_error = std::max(v.endpoint_error, (traj.at(i, H - 1) - spec.goal).norm());
    const double limit = spec.v_max * instance.dt;
    for (int h = 1; h < H; ++h) {
      const double step = (traj.at(i, h) - traj.at(i, h - 1)).norm();
      v.velocity_error = std::max(v.velocity_error, std::max(0.0, step - limit));
    }
  }
  const double side = instance.workspace_side;
  for (const auto& p : traj.positions) {
    v.workspace_error = std::max(v.workspace_error, std::max(0.0, -p.x));
    v.workspace_error = std::max(v.workspace_error, std::max(0.0, p.x - side));
    v.workspace_error = std::max(v.workspace_error, std::max(0.0, -p.y));
    v.workspace_error = std::max(v.workspace_error, std::max(0.0, p.y - side));
  }
  return v;
}

NonconvexResiduals nonconvex_residuals(const Trajectory& traj, const ProblemInstance& instance) {
  require_shape_match(traj, instance);
  NonconvexResiduals r;
  r.num_robots = traj.num_robots;
  r.num_obstacles = instance.num_obstacles();
  r.horizon = traj.horizon;
  const int H = traj.horizon;
  const int n = traj.num_robots;

  r.robot_pairs.reserve(static_cast<size_t>(r.num_robot_pairs()) * H);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double R = separation_radius_robots(i, j, instance);
      for (int h = 0; h < H; ++h) {
        const double d2 = (traj.at(i, h) - traj.at(j, h)).squared_norm();
        r.robot_pairs.push_back(d2 - R * R);
      }
    }
  }

  r.obstacle_pairs.reserve(static_cast<size_t>(n) * r.num_obstacles * H);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < r.num_obstacles; ++j) {
      const double R = separation_radius_obstacle(i, j, instance);
      const Vec2 c = instance.obstacles[j].center;
      for (int h = 0; h < H; ++h) {
        const double d2 = (traj.at(i, h) - c).squared_norm();
        r.obstacle_pairs.push_back(d2 - R * R);
      }
    }
  }
  return r;
}

FeasibilityReport is_feasible(const Trajectory& traj, const ProblemInstance& instance, double tol) {
  if (tol < 0.0) throw std::invalid_argument("is_feasible: tol must be >= 0");
  FeasibilityReport report;
  const ConvexViolation cv = convex_violation(traj, instance);

  auto consider_convex = [&](ConstraintKind kind, double value) {
    if (value > tol && value > report.worst.value) {
      report.feasible = false;
      report.worst = {kind, -1, -1, -1, value};
    }
  };
  consider_convex(ConstraintKind::endpoint, cv.endpoint_error);
  consider_convex(ConstraintKind::velocity, cv.velocity_error);
  consider_convex(ConstraintKind::workspace, cv.workspace_error);

  const NonconvexResiduals res = nonconvex_residuals(traj, instance);
  auto consider_residuals = [&](const std::vector<double>& values, bool robot_kind) {
    for (size_t k = 0; k < values.size(); ++k) {
      if (values[k] < -tol && -values[k] > report.worst.value) {
        report.feasible = false;
        WorstConstraint w;
        w.kind = robot_kind ? ConstraintKind::robot_pair : ConstraintKind::obstacle_pair;
        if (robot_kind)
          res.robot_pair_from_flat(static_cast<int>(k), &w.i, &w.j, &w.h);
        else
          res.obstacle_pair_from_flat(static_cast<int>(k), &w.i, &w.j, &w.h);
        w.value = -values[k];
        report.worst = w;
      }
    }
  };
  consider_residuals(res.robot_pairs, true);
  consider_residuals(res.obstacle_pairs, false);
  return report;
}

std::vector<CollisionEvent> check_collisions_interpolated(const Trajectory& traj,
                                                          const ProblemInstance& instance,
                                                          int substeps, double residual_tol) {
  require_shape_match(traj, instance);
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  std::vector<CollisionEvent> events;
  const int H = traj.horizon;
  const int n = traj.num_robots;

  // Sample points: h + k/substeps for every segment, plus the final step.
  auto position = [&](int robot, int seg, int k) {
    if (seg == H - 1) return traj.at(robot, H - 1);
    const double s = static_cast<double>(k) / substeps;
    return traj.at(robot, seg) + (traj.at(robot, seg + 1) - traj.at(robot, seg)) * s;
  };

  for (int seg = 0; seg < H; ++seg) {
    const int kmax = (seg == H - 1) ? 1 : substeps;
    for (int k = 0; k < kmax; ++k) {
      for (int i = 0; i < n; ++i) {
        const Vec2 pi = position(i, seg, k);
        for (int j = i + 1; j < n; ++j) {
          const double R = separation_radius_robots(i, j, instance);
          const Vec2 d = pi - position(j, seg, k);
          if (d.squared_norm() - R * R < -residual_tol) {
            events.push_back({ConstraintKind::robot_pair, i, j, seg,
                              static_cast<double>(k) / substeps, d.norm()});
          }
        }
        for (int j = 0; j < instance.num_obstacles(); ++j) {
          const double R = separation_radius_obstacle(i, j, instance);
          const Vec2 d = pi - instance.obstacles[j].center;
          if (d.squared_norm() - R * R < -residual_tol) {
            events.push_back({ConstraintKind::obstacle_pair, i, j, seg,
                              static_cast<double>(k) / substeps, d.norm()});
          }
        }
      }
    }
  }
  return events;
}

}  // namespace mrplan
