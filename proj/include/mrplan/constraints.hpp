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

#include <string>
#include <vector>

#include "mrplan/types.hpp"

namespace mrplan {

/// Max violations of the convex constraint set: exact endpoints, per-step
/// velocity limits and the workspace box. All zero (up to tol) iff the
/// trajectory lies in Omega_c.
struct ConvexViolation {
  double endpoint_error = 0.0;
  double velocity_error = 0.0;
  double workspace_error = 0.0;

  double max() const {
    return std::max(endpoint_error, std::max(velocity_error, workspace_error));
  }
};

/// Separation residuals g = ||p - q||^2 - R^2; feasible iff every entry >= 0.
/// robot_pairs is ordered lexicographically over (i < j, h); obstacle_pairs
/// over (robot i, obstacle j, h).
struct NonconvexResiduals {
  std::vector<double> robot_pairs;
  std::vector<double> obstacle_pairs;
  int num_robots = 0;
  int num_obstacles = 0;
  int horizon = 0;

  int num_robot_pairs() const { return num_robots * (num_robots - 1) / 2; }

  // pair p -> flat index of (pair, h)
  int robot_pair_index(int i, int j, int h) const;
  int obstacle_pair_index(int i, int j, int h) const;
  void robot_pair_from_flat(int flat, int* i, int* j, int* h) const;
  void obstacle_pair_from_flat(int flat, int* i, int* j, int* h) const;

  double min_robot_residual() const;
  double min_obstacle_residual() const;
};

enum class ConstraintKind { endpoint, velocity, workspace, robot_pair, obstacle_pair, none };

std::string to_string(ConstraintKind k);

struct WorstConstraint {
  ConstraintKind kind = ConstraintKind::none;
  int i = -1;
  int j = -1;
  int h = -1;
  double value = 0.0;  // violation magnitude for convex, residual for nonconvex
};

struct FeasibilityReport {
  bool feasible = true;
  WorstConstraint worst;
};

struct CollisionEvent {
  ConstraintKind kind = ConstraintKind::robot_pair;  // robot_pair or obstacle_pair
  int i = -1;       // robot index
  int j = -1;       // other robot or obstacle index
  int segment = -1; // step h of the segment start (h -> h+1); h itself for substep 0
  double fraction = 0.0;  // interpolation fraction within the segment
  double distance = 0.0;  // center distance at the event
};

ConvexViolation convex_violation(const Trajectory& traj, const ProblemInstance& instance);

NonconvexResiduals nonconvex_residuals(const Trajectory& traj, const ProblemInstance& instance);

FeasibilityReport is_feasible(const Trajectory& traj, const ProblemInstance& instance, double tol);

/// Separation checks at `substeps` linearly interpolated points per segment.
/// substeps = 1 reduces exactly to the discrete per-step check. A point
/// collides when its residual g < -residual_tol.
std::vector<CollisionEvent> check_collisions_interpolated(const Trajectory& traj,
                                                          const ProblemInstance& instance,
                                                          int substeps,
                                                          double residual_tol = 0.0);

void require_shape_match(const Trajectory& traj, const ProblemInstance& instance);

}  // namespace mrplan
