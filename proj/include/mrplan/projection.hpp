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

#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "mrplan/constraints.hpp"
#include "mrplan/types.hpp"

namespace mrplan {

/// Multipliers, penalties and bookkeeping for one augmented-Lagrangian solve.
struct DualState {
  std::vector<double> nu_a;  // robot-pair multipliers, residual ordering
  std::vector<double> nu_o;  // robot-obstacle multipliers
  double rho_a = 1.0;
  double rho_o = 1.0;
  double zeta = 1.05;
  int iteration = 0;
};

struct InnerSolverConfig {
  double step = 0.05;
  int max_iters = 80;
  double tol = 1e-7;  // stop when the iterate moves less than this
};

struct ProjectionConfig {
  double delta_a = 1e-4;
  double delta_o = 1e-4;
  int max_outer_iters = 200;
  InnerSolverConfig inner;
  double zeta = 1.05;
  double rho_init = 1.0;
  double rho_max = 1e12;
  double convex_tol = 1e-8;  // Dykstra sweep-movement threshold

  static ProjectionConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct ProjectionTraceRow {
  int k = 0;
  double ha_inf = 0.0;
  double ho_inf = 0.0;
  double rho = 0.0;
  double objective = 0.0;  // ||x - input||^2
};

struct ProjectionResult {
  Trajectory trajectory;
  DualState dual;
  bool converged = false;
  int outer_iterations = 0;
  double ha_inf = 0.0;
  double ho_inf = 0.0;
};

class ConvexInfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvexProjectionError : public std::runtime_error {
 public:
  ConvexProjectionError(const std::string& msg, Trajectory last, double residual)
      : std::runtime_error(msg), last_iterate(std::move(last)), residual(residual) {}
  Trajectory last_iterate;
  double residual;
};

/// Euclidean projection onto Omega_c (endpoints, per-segment velocity balls,
/// workspace box) by Dykstra's cyclic scheme. Endpoints are exact on return.
Trajectory project_convex(const Trajectory& point, const ProblemInstance& instance, double tol);

/// Closed-form optimal non-negative slack for one inequality residual:
/// argmin_{d >= 0} nu (g - d) + rho (g - d)^2 = max(0, g + nu / (2 rho)).
double eliminate_slack(double g, double nu, double rho);

/// Augmented Lagrangian: ||traj - anchor||^2 + nu^T H + rho ||H||^2, with
/// H = g - d* and slack eliminated at the evaluation point.
double augmented_lagrangian_value(const Trajectory& traj, const Trajectory& anchor,
                                  const DualState& dual, const ProblemInstance& instance);

/// Gradient of augmented_lagrangian_value in the trajectory positions,
/// flattened (x, y per point, robot-major).
std::vector<double> augmented_lagrangian_gradient(const Trajectory& traj,
                                                  const Trajectory& anchor,
                                                  const DualState& dual,
                                                  const ProblemInstance& instance);

/// Equality residuals H = g - d* for the current dual state.
void constraint_residuals_h(const Trajectory& traj, const ProblemInstance& instance,
                            const DualState& dual, std::vector<double>* h_a,
                            std::vector<double>* h_o);

using ProjectionTraceSink = std::function<void(const ProjectionTraceRow&)>;

/// Approximate projection onto Omega = Omega_c intersect Omega_n: outer dual
/// ascent with geometric penalty growth, inner projected gradient descent
/// over Omega_c. Never throws on non-convergence; converged = false and the
/// best iterate is returned instead.
ProjectionResult project_alm(const Trajectory& point, const ProblemInstance& instance,
                             const ProjectionConfig& config,
                             const ProjectionTraceSink& trace = nullptr);

}  // namespace mrplan
