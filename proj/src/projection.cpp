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

#include "mrplan/projection.hpp"

#include <algorithm>
#include <cmath>

namespace mrplan {

using nlohmann::json;

ProjectionConfig ProjectionConfig::from_json(const json& j) {
  ProjectionConfig c;
  if (j.contains("delta_a")) c.delta_a = j["delta_a"].get<double>();
  if (j.contains("delta_o")) c.delta_o = j["delta_o"].get<double>();
  if (j.contains("zeta")) c.zeta = j["zeta"].get<double>();
  if (j.contains("rho_init")) c.rho_init = j["rho_init"].get<double>();
  if (j.contains("max_outer_iters")) c.max_outer_iters = j["max_outer_iters"].get<int>();
  if (j.contains("inner")) {
    const auto& in = j["inner"];
    if (in.contains("step")) c.inner.step = in["step"].get<double>();
    if (in.contains("max_iters")) c.inner.max_iters = in["max_iters"].get<int>();
    if (in.contains("tol")) c.inner.tol = in["tol"].get<double>();
  }
  if (c.delta_a <= 0.0 || c.delta_o <= 0.0) throw std::invalid_argument("tolerances must be > 0");
  if (c.zeta < 1.0) throw std::invalid_argument("zeta must be >= 1");
  if (c.rho_init <= 0.0) throw std::invalid_argument("rho_init must be > 0");
  return c;
}

json ProjectionConfig::to_json() const {
  return json{{"delta_a", delta_a},
              {"delta_o", delta_o},
              {"zeta", zeta},
              {"rho_init", rho_init},
              {"max_outer_iters", max_outer_iters},
              {"inner", {{"step", inner.step}, {"max_iters", inner.max_iters}, {"tol", inner.tol}}}};
}

namespace {

// Project the pair (u, v) onto { ||u - v|| <= limit }: pull both toward the
// midpoint by equal amounts.
void project_segment_pair(Vec2& u, Vec2& v, double limit) {
  const Vec2 d = u - v;
  const double dist = d.norm();
  if (dist <= limit) return;
  const double shift = 0.5 * (dist - limit) / dist;
  const Vec2 corr = d * shift;
  u -= corr;
  v += corr;
}

// Project p onto the closed ball (center, limit).
void project_ball(Vec2& p, const Vec2& center, double limit) {
  const Vec2 d = p - center;
  const double dist = d.norm();
  if (dist <= limit) return;
  p = center + d * (limit / dist);
}

void clamp_box(Vec2& p, double side) {
  p.x = std::clamp(p.x, 0.0, side);
  p.y = std::clamp(p.y, 0.0, side);
}

}  // namespace

Trajectory project_convex(const Trajectory& point, const ProblemInstance& instance, double tol) {
  require_shape_match(point, instance);
  if (tol <= 0.0) throw std::invalid_argument("project_convex: tol must be > 0");
  if (!straight_line_feasible(instance))
    throw ConvexInfeasibleError("Omega_c is empty: straight line violates the velocity limit");

  const int H = point.horizon;
  const int n = point.num_robots;
  const double side = instance.workspace_side;

  Trajectory x = point;
  // Endpoint equalities are eliminated: fix them and run Dykstra over the
  // interior points against velocity balls and the box.
  for (int i = 0; i < n; ++i) {
    x.at(i, 0) = instance.robots[i].start;
    x.at(i, H - 1) = instance.robots[i].goal;
  }
  if (H == 2) return x;

  // Dykstra corrections: one per velocity constraint (two Vec2, for the two
  // segment ends) and one per interior point for the box.
  std::vector<Vec2> seg_corr_u(static_cast<size_t>(n) * (H - 1));
  std::vector<Vec2> seg_corr_v(static_cast<size_t>(n) * (H - 1));
  std::vector<Vec2> box_corr(static_cast<size_t>(n) * (H - 2));

  const int max_sweeps = 200000;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double move = 0.0;
    auto track = [&](const Vec2& before, const Vec2& after) {
      move = std::max(move, std::abs(after.x - before.x));
      move = std::max(move, std::abs(after.y - before.y));
    };

    for (int i = 0; i < n; ++i) {
      const double limit = instance.robots[i].v_max * instance.dt;
      for (int h = 1; h < H; ++h) {
        const size_t c = static_cast<size_t>(i) * (H - 1) + (h - 1);
        if (h == 1) {
          // first segment: only x(i,1) is free, ball around the start
          Vec2 y = x.at(i, 1) + seg_corr_v[c];
          Vec2 before = x.at(i, 1);
          Vec2 p = y;
          project_ball(p, instance.robots[i].start, limit);
          seg_corr_v[c] = y - p;
          x.at(i, 1) = p;
          track(before, p);
        } else if (h == H - 1) {
          Vec2 y = x.at(i, H - 2) + seg_corr_u[c];
          Vec2 before = x.at(i, H - 2);
          Vec2 p = y;
          project_ball(p, instance.robots[i].goal, limit);
          seg_corr_u[c] = y - p;
          x.at(i, H - 2) = p;
          track(before, p);
        } else {
          Vec2 yu = x.at(i, h - 1) + seg_corr_u[c];
          Vec2 yv = x.at(i, h) + seg_corr_v[c];
          Vec2 bu = x.at(i, h - 1), bv = x.at(i, h);
          Vec2 pu = yu, pv = yv;
          project_segment_pair(pu, pv, limit);
          seg_corr_u[c] = yu - pu;
          seg_corr_v[c] = yv - pv;
          x.at(i, h - 1) = pu;
          x.at(i, h) = pv;
          track(bu, pu);
          track(bv, pv);
        }
      }
      for (int h = 1; h < H - 1; ++h) {
        const size_t c = static_cast<size_t>(i) * (H - 2) + (h - 1);
        Vec2 y = x.at(i, h) + box_corr[c];
        Vec2 before = x.at(i, h);
        Vec2 p = y;
        clamp_box(p, side);
        box_corr[c] = y - p;
        x.at(i, h) = p;
        track(before, p);
      }
    }

    if (move < tol) return x;
    // Tightly stretched velocity chains make the cyclic sweeps creep; accept
    // the iterate once its violation is well below tolerance even though the
    // corrections are still drifting.
    if ((sweep & 0xff) == 0xff && convex_violation(x, instance).max() <= 10.0 * tol) return x;
  }
  const double residual = convex_violation(x, instance).max();
  if (residual <= 10.0 * tol) return x;
  throw ConvexProjectionError("project_convex: no convergence within sweep cap", x, residual);
}

double eliminate_slack(double g, double nu, double rho) {
  if (rho <= 0.0) throw std::invalid_argument("eliminate_slack: rho must be > 0");
  return std::max(0.0, g + nu / (2.0 * rho));
}

void constraint_residuals_h(const Trajectory& traj, const ProblemInstance& instance,
                            const DualState& dual, std::vector<double>* h_a,
                            std::vector<double>* h_o) {
  const NonconvexResiduals res = nonconvex_residuals(traj, instance);
  if (dual.nu_a.size() != res.robot_pairs.size() || dual.nu_o.size() != res.obstacle_pairs.size())
    throw std::invalid_argument("dual multiplier lengths do not match residual index sets");
  h_a->resize(res.robot_pairs.size());
  h_o->resize(res.obstacle_pairs.size());
  for (size_t k = 0; k < res.robot_pairs.size(); ++k) {
    const double g = res.robot_pairs[k];
    (*h_a)[k] = g - eliminate_slack(g, dual.nu_a[k], dual.rho_a);
  }
  for (size_t k = 0; k < res.obstacle_pairs.size(); ++k) {
    const double g = res.obstacle_pairs[k];
    (*h_o)[k] = g - eliminate_slack(g, dual.nu_o[k], dual.rho_o);
  }
}

double augmented_lagrangian_value(const Trajectory& traj, const Trajectory& anchor,
                                  const DualState& dual, const ProblemInstance& instance) {
  if (traj.num_robots != anchor.num_robots || traj.horizon != anchor.horizon)
    throw std::invalid_argument("traj/anchor shape mismatch");
  double value = 0.0;
  for (size_t k = 0; k < traj.positions.size(); ++k)
    value += (traj.positions[k] - anchor.positions[k]).squared_norm();

  std::vector<double> h_a, h_o;
  constraint_residuals_h(traj, instance, dual, &h_a, &h_o);
  for (size_t k = 0; k < h_a.size(); ++k)
    value += dual.nu_a[k] * h_a[k] + dual.rho_a * h_a[k] * h_a[k];
  for (size_t k = 0; k < h_o.size(); ++k)
    value += dual.nu_o[k] * h_o[k] + dual.rho_o * h_o[k] * h_o[k];
  return value;
}

std::vector<double> augmented_lagrangian_gradient(const Trajectory& traj,
                                                  const Trajectory& anchor,
                                                  const DualState& dual,
                                                  const ProblemInstance& instance) {
  if (traj.num_robots != anchor.num_robots || traj.horizon != anchor.horizon)
    throw std::invalid_argument("traj/anchor shape mismatch");
  const int H = traj.horizon;
  const int n = traj.num_robots;
  std::vector<double> grad(traj.positions.size() * 2, 0.0);

  auto add = [&](int robot, int h, const Vec2& v) {
    const size_t k = static_cast<size_t>(robot) * H + h;
    grad[2 * k] += v.x;
    grad[2 * k + 1] += v.y;
  };

  for (int i = 0; i < n; ++i)
    for (int h = 0; h < H; ++h)
      add(i, h, (traj.at(i, h) - anchor.at(i, h)) * 2.0);

  // Active entries (slack at zero) contribute (nu + 2 rho H) * grad g; the
  // inactive branch has H constant in the positions, hence zero gradient.
  size_t flat = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double R = separation_radius_robots(i, j, instance);
      for (int h = 0; h < H; ++h, ++flat) {
        const Vec2 d = traj.at(i, h) - traj.at(j, h);
        const double g = d.squared_norm() - R * R;
        const double nu = dual.nu_a[flat];
        if (g + nu / (2.0 * dual.rho_a) > 0.0) continue;
        const double coeff = nu + 2.0 * dual.rho_a * g;  // H = g on the active branch
        add(i, h, d * (2.0 * coeff));
        add(j, h, d * (-2.0 * coeff));
      }
    }
  }
  flat = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < instance.num_obstacles(); ++j) {
      const double R = separation_radius_obstacle(i, j, instance);
      const Vec2 c = instance.obstacles[j].center;
      for (int h = 0; h < H; ++h, ++flat) {
        const Vec2 d = traj.at(i, h) - c;
        const double g = d.squared_norm() - R * R;
        const double nu = dual.nu_o[flat];
        if (g + nu / (2.0 * dual.rho_o) > 0.0) continue;
        const double coeff = nu + 2.0 * dual.rho_o * g;
        add(i, h, d * (2.0 * coeff));
      }
    }
  }
  return grad;
}

namespace {

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

double squared_distance(const Trajectory& a, const Trajectory& b) {
  double s = 0.0;
  for (size_t k = 0; k < a.positions.size(); ++k)
    s += (a.positions[k] - b.positions[k]).squared_norm();
  return s;
}

// Projected gradient descent on the augmented Lagrangian over Omega_c.
Trajectory inner_minimize(Trajectory x, const Trajectory& anchor, const DualState& dual,
                          const ProblemInstance& instance, const ProjectionConfig& config) {
  double value = augmented_lagrangian_value(x, anchor, dual, instance);
  for (int it = 0; it < config.inner.max_iters; ++it) {
    const std::vector<double> grad =
        augmented_lagrangian_gradient(x, anchor, dual, instance);
    double grad_sq = 0.0;
    for (double g : grad) grad_sq += g * g;
    if (grad_sq < 1e-20) break;

    double step = config.inner.step;
    Trajectory accepted = x;
    double accepted_value = value;
    bool improved = false;
    for (int bt = 0; bt < 30; ++bt) {
      Trajectory cand = x;
      for (size_t k = 0; k < cand.positions.size(); ++k) {
        cand.positions[k].x -= step * grad[2 * k];
        cand.positions[k].y -= step * grad[2 * k + 1];
      }
      cand = project_convex(cand, instance, config.convex_tol);
      const double cand_value = augmented_lagrangian_value(cand, anchor, dual, instance);
      if (cand_value < value - 1e-12) {
        accepted = std::move(cand);
        accepted_value = cand_value;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;

    double move = 0.0;
    for (size_t k = 0; k < x.positions.size(); ++k) {
      move = std::max(move, std::abs(accepted.positions[k].x - x.positions[k].x));
      move = std::max(move, std::abs(accepted.positions[k].y - x.positions[k].y));
    }
    x = std::move(accepted);
    value = accepted_value;
    if (move < config.inner.tol) break;
  }
  return x;
}

}  // namespace

ProjectionResult project_alm(const Trajectory& point, const ProblemInstance& instance,
                             const ProjectionConfig& config, const ProjectionTraceSink& trace) {
  require_shape_match(point, instance);

  ProjectionResult result;
  result.trajectory = project_convex(point, instance, config.convex_tol);

  const NonconvexResiduals res0 = nonconvex_residuals(result.trajectory, instance);
  DualState& dual = result.dual;
  dual.zeta = config.zeta;
  dual.rho_a = config.rho_init;
  dual.rho_o = config.rho_init;
  // Warm start at H evaluated with zero multipliers, i.e. min(g, 0).
  dual.nu_a.resize(res0.robot_pairs.size());
  dual.nu_o.resize(res0.obstacle_pairs.size());
  for (size_t k = 0; k < dual.nu_a.size(); ++k) dual.nu_a[k] = std::min(res0.robot_pairs[k], 0.0);
  for (size_t k = 0; k < dual.nu_o.size(); ++k) dual.nu_o[k] = std::min(res0.obstacle_pairs[k], 0.0);

  Trajectory best = result.trajectory;
  double best_score = std::numeric_limits<double>::infinity();
  double best_ha = 0.0, best_ho = 0.0;

  std::vector<double> h_a, h_o;
  for (int k = 1; k <= config.max_outer_iters; ++k) {
    result.trajectory = inner_minimize(result.trajectory, point, dual, instance, config);
    constraint_residuals_h(result.trajectory, instance, dual, &h_a, &h_o);
    const double ha = inf_norm(h_a);
    const double ho = inf_norm(h_o);
    dual.iteration = k;
    result.outer_iterations = k;

    if (trace) trace({k, ha, ho, dual.rho_a, squared_distance(result.trajectory, point)});

    const double score = std::max(ha / config.delta_a, ho / config.delta_o);
    if (score < best_score) {
      best_score = score;
      best = result.trajectory;
      best_ha = ha;
      best_ho = ho;
    }

    if (ha <= config.delta_a && ho <= config.delta_o) {
      result.converged = true;
      result.ha_inf = ha;
      result.ho_inf = ho;
      return result;
    }

    for (size_t e = 0; e < dual.nu_a.size(); ++e) dual.nu_a[e] += dual.rho_a * h_a[e];
    for (size_t e = 0; e < dual.nu_o.size(); ++e) dual.nu_o[e] += dual.rho_o * h_o[e];
    dual.rho_a *= dual.zeta;
    dual.rho_o *= dual.zeta;
    if (dual.rho_a > config.rho_max || dual.rho_o > config.rho_max) break;
  }

  result.trajectory = best;
  result.converged = false;
  result.ha_inf = best_ha;
  result.ho_inf = best_ho;
  return result;
}

}  // namespace mrplan
