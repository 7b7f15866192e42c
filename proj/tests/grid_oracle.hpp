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

// Brute-force projection oracle for micro instances, independent of the ALM
// path: exhaustive grids over the free interior waypoints (coordinate-wise
// scans when the joint grid is too large), with local refinement.

#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "mrplan/constraints.hpp"
#include "mrplan/types.hpp"

namespace mrplan::testing {

inline bool oracle_feasible(const Trajectory& t, const ProblemInstance& inst, double tol = 1e-9) {
  const ConvexViolation cv = convex_violation(t, inst);
  if (cv.max() > tol) return false;
  const NonconvexResiduals res = nonconvex_residuals(t, inst);
  return res.min_robot_residual() >= -tol && res.min_obstacle_residual() >= -tol;
}

inline double squared_dist(const Trajectory& a, const Trajectory& b) {
  double s = 0.0;
  for (size_t k = 0; k < a.positions.size(); ++k)
    s += (a.positions[k] - b.positions[k]).squared_norm();
  return s;
}

struct OracleResult {
  double objective = std::numeric_limits<double>::infinity();
  Trajectory argmin;
  bool found = false;
};

// Free variables: all interior waypoints (endpoints are pinned to start/goal).
inline std::vector<std::pair<int, int>> free_points(const Trajectory& t) {
  std::vector<std::pair<int, int>> pts;
  for (int i = 0; i < t.num_robots; ++i)
    for (int h = 1; h < t.horizon - 1; ++h) pts.emplace_back(i, h);
  return pts;
}

// Cyclic scan: each free waypoint is optimized over a full 2-D grid (joint in
// x and y, so the iterate can slide along circular constraint boundaries),
// repeated until no waypoint improves.
inline bool waypoint_scan(Trajectory& t, const Trajectory& input, const ProblemInstance& inst,
                          double window, double res, double* objective, double tol = 1e-9) {
  const auto pts = free_points(t);
  bool any_improved = false;
  for (int cycle = 0; cycle < 60; ++cycle) {
    bool improved = false;
    for (const auto& [i, h] : pts) {
      const Vec2 original = t.at(i, h);
      Vec2 best_p = original;
      double best_obj = *objective;
      for (double x = original.x - window; x <= original.x + window + 1e-12; x += res) {
        for (double y = original.y - window; y <= original.y + window + 1e-12; y += res) {
          t.at(i, h) = {x, y};
          if (!oracle_feasible(t, inst, tol)) continue;
          const double obj = squared_dist(t, input);
          if (obj < best_obj - 1e-15) {
            best_obj = obj;
            best_p = {x, y};
          }
        }
      }
      t.at(i, h) = best_p;
      if (best_obj < *objective - 1e-15) {
        *objective = best_obj;
        improved = true;
        any_improved = true;
      }
    }
    if (!improved) break;
  }
  return any_improved;
}

// Joint 4-D grid over a pair of free waypoints. Coordinate-wise block descent
// stalls when a coupling constraint (e.g. a robot pair at the same step) needs
// both points to move together; a joint grid has no such blind spot. Only used
// when the instance has exactly two free waypoints, where 4-D stays tractable.
inline void joint_pair_scan(Trajectory& t, const Trajectory& input, const ProblemInstance& inst,
                            double window, double res, double* objective, double tol = 1e-9) {
  const auto pts = free_points(t);
  if (pts.size() != 2) return;
  const auto [i0, h0] = pts[0];
  const auto [i1, h1] = pts[1];
  const Vec2 c0 = t.at(i0, h0);
  const Vec2 c1 = t.at(i1, h1);
  Vec2 best0 = c0;
  Vec2 best1 = c1;
  double best_obj = *objective;
  for (double x0 = c0.x - window; x0 <= c0.x + window + 1e-12; x0 += res)
    for (double y0 = c0.y - window; y0 <= c0.y + window + 1e-12; y0 += res)
      for (double x1 = c1.x - window; x1 <= c1.x + window + 1e-12; x1 += res)
        for (double y1 = c1.y - window; y1 <= c1.y + window + 1e-12; y1 += res) {
          t.at(i0, h0) = {x0, y0};
          t.at(i1, h1) = {x1, y1};
          if (!oracle_feasible(t, inst, tol)) continue;
          const double obj = squared_dist(t, input);
          if (obj < best_obj - 1e-15) {
            best_obj = obj;
            best0 = {x0, y0};
            best1 = {x1, y1};
          }
        }
  t.at(i0, h0) = best0;
  t.at(i1, h1) = best1;
  *objective = best_obj;
}

/// Minimize ||t - input||^2 over the feasible set by grid search around
/// several starting points; coarse scans at `coarse` resolution, then a local
/// refinement at `fine`. `tol` relaxes the feasibility test, matching the
/// tolerance of whatever solver the oracle is benchmarked against.
inline OracleResult project_oracle(const Trajectory& input, const ProblemInstance& inst,
                                   const std::vector<Trajectory>& starts, double window = 0.6,
                                   double coarse = 0.02, double fine = 1e-3, double tol = 1e-9) {
  OracleResult result;
  for (const Trajectory& start : starts) {
    Trajectory t = start;
    if (!oracle_feasible(t, inst, tol)) continue;
    double obj = squared_dist(t, input);
    waypoint_scan(t, input, inst, window, coarse, &obj, tol);
    if (free_points(t).size() == 2) {
      joint_pair_scan(t, input, inst, 0.3, 0.025, &obj, tol);
      joint_pair_scan(t, input, inst, 0.05, 0.004, &obj, tol);
      joint_pair_scan(t, input, inst, 0.01, fine, &obj, tol);
    }
    waypoint_scan(t, input, inst, 2.5 * coarse, fine, &obj, tol);
    waypoint_scan(t, input, inst, 2.5 * fine, 0.25 * fine, &obj, tol);
    if (obj < result.objective) {
      result.objective = obj;
      result.argmin = t;
      result.found = true;
    }
  }
  return result;
}

}  // namespace mrplan::testing
