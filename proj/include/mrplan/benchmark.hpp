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

#include <json.hpp>

#include "mrplan/types.hpp"

namespace mrplan {

struct Zone {
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
  std::string name;

  bool contains(const Vec2& p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
};

/// Obstacles plus the zones start/goal sampling is confined to.
struct MapGeometry {
  std::vector<Obstacle> obstacles;
  std::vector<Zone> start_zones;
  std::vector<Zone> goal_zones;
  double robot_radius = 0.05;
  bool swap_tasks = false;  // corridor: robot k starts where robot (n-1-k) must end
};

/// Geometry parameters for the wall-built families; all walls are rendered as
/// disc chains with center spacing at most the disc radius.
struct MapParams {
  double workspace_side = 2.0;
  double wall_disc_radius = 0.05;
  double obstacle_radius_min = 0.05;
  double obstacle_radius_max = 0.1;
  // corridor (robot radius 0.1): passage width and central swap chamber
  double corridor_passage_width = 0.25;
  double corridor_chamber_width = 0.6;
  double corridor_chamber_length = 0.7;
  // shelf (robot radius 0.05): 2 rows x 3 blocks, aisle 3 robot diameters
  double shelf_block_w = 0.3;
  double shelf_block_h = 0.25;
  // room: 2 x 2 rooms, one door per shared wall
  double room_door_width = 0.25;
};

struct BenchmarkSpec {
  std::vector<MapFamily> families = {MapFamily::empty,    MapFamily::basic, MapFamily::dense,
                                     MapFamily::corridor, MapFamily::shelf, MapFamily::room};
  int num_maps = 25;
  std::vector<int> robots_counts = {3, 6, 9};  // corridor is forced to {2}
  int cases_per_config = 10;
  uint64_t seed = 0;
  int horizon = 64;
  double dt = 1.0;
  double v_max = 0.08;
  MapParams params;
};

MapGeometry generate_map(MapFamily family, uint64_t map_seed, const MapParams& params = {});

struct TaskAssignment {
  std::vector<Vec2> starts;
  std::vector<Vec2> goals;
};

TaskAssignment assign_tasks(const MapGeometry& map, int num_robots, uint64_t case_seed,
                            double workspace_side = 2.0);

struct SuiteManifestEntry {
  std::string instance_id;
  std::string file;
  MapFamily family = MapFamily::empty;
  int num_robots = 0;
  uint64_t map_seed = 0;
  uint64_t case_seed = 0;
};

struct Suite {
  std::vector<ProblemInstance> instances;
  std::vector<SuiteManifestEntry> manifest;

  nlohmann::json manifest_json(const BenchmarkSpec& spec) const;
};

Suite generate_suite(const BenchmarkSpec& spec);

}  // namespace mrplan
