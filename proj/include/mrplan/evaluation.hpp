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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrplan/constraints.hpp"
#include "mrplan/types.hpp"

namespace mrplan {

struct EvalMode {
  bool interpolated = true;
  int substeps = 4;
  double feasibility_tol = 1e-4;      // endpoint and velocity slack
  double collision_residual_tol = 1e-4;  // residual below -tol counts as a collision

  static EvalMode discrete() { return {false, 1, 1e-4, 1e-4}; }
};

struct InstanceRecord {
  std::string instance_id;
  MapFamily family = MapFamily::empty;
  int num_robots = 0;
  bool success = false;
  double path_length = 0.0;      // mean over robots of summed segment lengths
  double acceleration = 0.0;     // mean |velocity difference| between consecutive steps
  double collision_ratio = 0.0;  // robots involved in >= 1 collision / N_a
  int collision_events = 0;
};

struct AggregateRow {
  MapFamily family = MapFamily::empty;
  int num_robots = 0;
  int cases = 0;
  double success_rate = 0.0;                  // S
  std::optional<double> mean_path_length;     // L, successful cases only
  std::optional<double> mean_acceleration;    // A, successful cases only
  double mean_collision_ratio = 0.0;          // C, over all cases
};

struct EvaluationReport {
  std::vector<InstanceRecord> per_instance;
  std::vector<AggregateRow> aggregate;
};

InstanceRecord evaluate_case(const Trajectory& traj, const ProblemInstance& instance,
                             const EvalMode& mode);

/// Groups records by (family, num_robots); throws when manifest ids are
/// missing from the records.
EvaluationReport aggregate(const std::vector<InstanceRecord>& records,
                           const std::vector<std::string>& manifest_ids);

nlohmann::json report_to_json(const EvaluationReport& report);
std::string report_to_csv(const EvaluationReport& report);
std::string success_bars_csv(const EvaluationReport& report);

}  // namespace mrplan
