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

#include "mrplan/evaluation.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace mrplan {

using nlohmann::json;

InstanceRecord evaluate_case(const Trajectory& traj, const ProblemInstance& instance,
                             const EvalMode& mode) {
  require_shape_match(traj, instance);
  InstanceRecord rec;
  rec.instance_id = instance.instance_id;
  rec.family = instance.map_family;
  rec.num_robots = instance.num_robots();

  const int H = traj.horizon;
  const int n = traj.num_robots;

  double total_length = 0.0;
  double total_acc = 0.0;
  int acc_terms = 0;
  for (int i = 0; i < n; ++i) {
    for (int h = 1; h < H; ++h) total_length += (traj.at(i, h) - traj.at(i, h - 1)).norm();
    for (int h = 2; h < H; ++h) {
      const Vec2 v1 = (traj.at(i, h) - traj.at(i, h - 1)) * (1.0 / instance.dt);
      const Vec2 v0 = (traj.at(i, h - 1) - traj.at(i, h - 2)) * (1.0 / instance.dt);
      total_acc += (v1 - v0).norm();
      ++acc_terms;
    }
  }
  rec.path_length = total_length / n;
  rec.acceleration = acc_terms > 0 ? total_acc / acc_terms : 0.0;

  const int substeps = mode.interpolated ? mode.substeps : 1;
  const auto events =
      check_collisions_interpolated(traj, instance, substeps, mode.collision_residual_tol);
  rec.collision_events = static_cast<int>(events.size());
  std::set<int> colliding;
  for (const auto& e : events) {
    colliding.insert(e.i);
    if (e.kind == ConstraintKind::robot_pair) colliding.insert(e.j);
  }
  rec.collision_ratio = static_cast<double>(colliding.size()) / n;

  const ConvexViolation cv = convex_violation(traj, instance);
  rec.success = events.empty() && cv.endpoint_error <= mode.feasibility_tol &&
                cv.velocity_error <= mode.feasibility_tol;
  return rec;
}

EvaluationReport aggregate(const std::vector<InstanceRecord>& records,
                           const std::vector<std::string>& manifest_ids) {
  std::set<std::string> have;
  for (const auto& r : records) have.insert(r.instance_id);
  std::vector<std::string> missing;
  for (const auto& id : manifest_ids)
    if (!have.count(id)) missing.push_back(id);
  if (!missing.empty()) {
    std::ostringstream os;
    os << "aggregate: missing records for " << missing.size() << " instances:";
    for (size_t k = 0; k < missing.size() && k < 10; ++k) os << " " << missing[k];
    throw std::runtime_error(os.str());
  }

  EvaluationReport report;
  report.per_instance = records;

  std::map<std::pair<int, int>, std::vector<const InstanceRecord*>> groups;
  for (const auto& r : records)
    groups[{static_cast<int>(r.family), r.num_robots}].push_back(&r);

  for (const auto& [key, group] : groups) {
    AggregateRow row;
    row.family = static_cast<MapFamily>(key.first);
    row.num_robots = key.second;
    row.cases = static_cast<int>(group.size());
    double s = 0.0, c = 0.0, l = 0.0, a = 0.0;
    int successes = 0;
    for (const auto* r : group) {
      s += r->success ? 1.0 : 0.0;
      c += r->collision_ratio;
      if (r->success) {
        l += r->path_length;
        a += r->acceleration;
        ++successes;
      }
    }
    row.success_rate = s / row.cases;
    row.mean_collision_ratio = c / row.cases;
    if (successes > 0) {
      row.mean_path_length = l / successes;
      row.mean_acceleration = a / successes;
    }
    report.aggregate.push_back(row);
  }
  return report;
}

json report_to_json(const EvaluationReport& report) {
  json per = json::array();
  for (const auto& r : report.per_instance) {
    per.push_back({{"instance_id", r.instance_id},
                   {"family", to_string(r.family)},
                   {"num_robots", r.num_robots},
                   {"success", r.success},
                   {"path_length_per_robot", r.path_length},
                   {"acceleration", r.acceleration},
                   {"collision_ratio", r.collision_ratio},
                   {"collision_events", r.collision_events}});
  }
  json agg = json::array();
  for (const auto& row : report.aggregate) {
    json jrow = {{"family", to_string(row.family)},
                 {"num_robots", row.num_robots},
                 {"cases", row.cases},
                 {"S", row.success_rate},
                 {"C", row.mean_collision_ratio}};
    if (row.mean_path_length) jrow["L"] = *row.mean_path_length;
    if (row.mean_acceleration) jrow["A"] = *row.mean_acceleration;
    agg.push_back(jrow);
  }
  return json{{"per_instance", per}, {"aggregate", agg}};
}

std::string report_to_csv(const EvaluationReport& report) {
  std::ostringstream os;
  os << "family,num_robots,cases,S,L,A,C\n";
  for (const auto& row : report.aggregate) {
    os << to_string(row.family) << "," << row.num_robots << "," << row.cases << ","
       << row.success_rate << ",";
    if (row.mean_path_length) os << *row.mean_path_length;
    os << ",";
    if (row.mean_acceleration) os << *row.mean_acceleration;
    os << "," << row.mean_collision_ratio << "\n";
  }
  return os.str();
}

std::string success_bars_csv(const EvaluationReport& report) {
  std::ostringstream os;
  os << "family,num_robots,success_rate,failure_rate\n";
  for (const auto& row : report.aggregate) {
    os << to_string(row.family) << "," << row.num_robots << "," << row.success_rate << ","
       << (1.0 - row.success_rate) << "\n";
  }
  return os.str();
}

}  // namespace mrplan
