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

#include "mrplan/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "mrplan/rng.hpp"

namespace mrplan {

using nlohmann::json;

namespace {

struct Rect {
  double xmin, ymin, xmax, ymax;
};

double dist_to_rect(const Vec2& p, const Rect& r) {
  const double dx = std::max({r.xmin - p.x, 0.0, p.x - r.xmax});
  const double dy = std::max({r.ymin - p.y, 0.0, p.y - r.ymax});
  return std::sqrt(dx * dx + dy * dy);
}

double dist_to_union(const Vec2& p, const std::vector<Rect>& rects) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& r : rects) d = std::min(d, dist_to_rect(p, r));
  return d;
}

// Fill the complement of a free-space rectangle union with obstacles: a fine
// disc lining along the free boundary plus coarse bulk discs behind it.
void fill_complement(const std::vector<Rect>& free_space, double side, double lining_radius,
                     std::vector<Obstacle>* out) {
  const double grid = lining_radius;
  for (double x = 0.0; x <= side + 1e-9; x += grid) {
    for (double y = 0.0; y <= side + 1e-9; y += grid) {
      const Vec2 p{x, y};
      const double d = dist_to_union(p, free_space);
      if (d >= lining_radius - 1e-9 && d <= 1.5 * lining_radius + 1e-9)
        out->push_back({p, lining_radius});
    }
  }
  const double bulk_radius = 0.3;
  const double bulk_grid = 0.2;
  for (double x = bulk_grid / 2; x <= side; x += bulk_grid) {
    for (double y = bulk_grid / 2; y <= side; y += bulk_grid) {
      const Vec2 p{x, y};
      if (dist_to_union(p, free_space) >= bulk_radius) out->push_back({p, bulk_radius});
    }
  }
}

// Fill a solid rectangle: perimeter lining inset so discs stay inside, plus
// interior bulk discs.
void fill_rectangle(const Rect& r, double lining_radius, std::vector<Obstacle>* out) {
  const double inset = lining_radius;
  const Rect inner{r.xmin + inset, r.ymin + inset, r.xmax - inset, r.ymax - inset};
  auto chain = [&](Vec2 a, Vec2 b) {
    const double len = (b - a).norm();
    const int steps = std::max(1, static_cast<int>(std::ceil(len / lining_radius)));
    for (int k = 0; k <= steps; ++k)
      out->push_back({a + (b - a) * (static_cast<double>(k) / steps), lining_radius});
  };
  chain({inner.xmin, inner.ymin}, {inner.xmax, inner.ymin});
  chain({inner.xmax, inner.ymin}, {inner.xmax, inner.ymax});
  chain({inner.xmax, inner.ymax}, {inner.xmin, inner.ymax});
  chain({inner.xmin, inner.ymax}, {inner.xmin, inner.ymin});
  for (double x = inner.xmin + 0.1; x < inner.xmax - 0.05; x += 0.1)
    for (double y = inner.ymin + 0.1; y < inner.ymax - 0.05; y += 0.1)
      out->push_back({{x, y}, lining_radius});
}

// Disc chain along a segment.
void wall_chain(Vec2 a, Vec2 b, double radius, std::vector<Obstacle>* out) {
  const double len = (b - a).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(len / radius)));
  for (int k = 0; k <= steps; ++k)
    out->push_back({a + (b - a) * (static_cast<double>(k) / steps), radius});
}

MapGeometry random_map(int num_obstacles, uint64_t map_seed, const MapParams& params) {
  MapGeometry geo;
  geo.robot_radius = 0.05;
  Rng rng(map_seed);
  const double side = params.workspace_side;
  const double pass_gap = 2.4 * geo.robot_radius;  // leave room to slip between obstacles
  int attempts = 0;
  while (static_cast<int>(geo.obstacles.size()) < num_obstacles) {
    if (++attempts > 100000)
      throw std::runtime_error("random_map: cannot place obstacles without overlap");
    Obstacle o;
    o.radius = rng.uniform(params.obstacle_radius_min, params.obstacle_radius_max);
    o.center = {rng.uniform(o.radius, side - o.radius), rng.uniform(o.radius, side - o.radius)};
    bool ok = true;
    for (const auto& other : geo.obstacles) {
      if ((o.center - other.center).norm() < o.radius + other.radius + pass_gap) {
        ok = false;
        break;
      }
    }
    if (ok) geo.obstacles.push_back(o);
  }
  const double margin = 0.1;
  geo.start_zones.push_back({margin, side - margin, margin, side - margin, "map"});
  geo.goal_zones = geo.start_zones;
  return geo;
}

MapGeometry corridor_map(uint64_t map_seed, const MapParams& params) {
  MapGeometry geo;
  geo.robot_radius = 0.1;
  geo.swap_tasks = true;
  Rng rng(map_seed);
  const double side = params.workspace_side;
  const double cy = side / 2.0;
  const double cx = side / 2.0 + rng.uniform(-0.12, 0.12);  // chamber offset varies per map
  const double ph = params.corridor_passage_width / 2.0;
  const double ch = params.corridor_chamber_width / 2.0;
  const double cl = params.corridor_chamber_length / 2.0;

  const std::vector<Rect> free_space = {
      {0.0, cy - ph, side, cy + ph},
      {cx - cl, cy - ch, cx + cl, cy + ch},
  };
  fill_complement(free_space, side, params.wall_disc_radius, &geo.obstacles);

  const double zr = 0.02;  // start/goal jitter box inside the passage
  geo.start_zones.push_back({0.12, 0.3, cy - zr, cy + zr, "west_end"});
  geo.start_zones.push_back({side - 0.3, side - 0.12, cy - zr, cy + zr, "east_end"});
  geo.goal_zones = {geo.start_zones[1], geo.start_zones[0]};
  return geo;
}

MapGeometry shelf_map(uint64_t map_seed, const MapParams& params) {
  MapGeometry geo;
  geo.robot_radius = 0.05;
  Rng rng(map_seed);
  const double side = params.workspace_side;
  const double jitter_y = rng.uniform(-0.04, 0.04);
  const double jitter_x = rng.uniform(-0.04, 0.04);
  const double w = params.shelf_block_w, h = params.shelf_block_h;
  for (double bx : {0.4, 1.0, 1.6}) {
    for (double by : {0.7, 1.3}) {
      const double x = bx + jitter_x, y = by + jitter_y;
      fill_rectangle({x - w / 2, y - h / 2, x + w / 2, y + h / 2}, params.wall_disc_radius,
                     &geo.obstacles);
    }
  }
  geo.start_zones.push_back({0.1, side - 0.1, 0.08, 0.38 + jitter_y, "pickup"});
  geo.goal_zones.push_back({0.1, side - 0.1, 1.62 + jitter_y, side - 0.08, "dropoff"});
  return geo;
}

MapGeometry room_map(uint64_t map_seed, const MapParams& params) {
  MapGeometry geo;
  geo.robot_radius = 0.05;
  Rng rng(map_seed);
  const double side = params.workspace_side;
  const double mid = side / 2.0;
  const double dw = params.room_door_width / 2.0;
  const double r = params.wall_disc_radius;

  // one door per shared wall, positions varying per map
  const double door_v1 = 0.5 + rng.uniform(-0.12, 0.12);  // vertical wall, lower segment
  const double door_v2 = 1.5 + rng.uniform(-0.12, 0.12);
  const double door_h1 = 0.5 + rng.uniform(-0.12, 0.12);  // horizontal wall, left segment
  const double door_h2 = 1.5 + rng.uniform(-0.12, 0.12);

  wall_chain({mid, 0.0}, {mid, door_v1 - dw}, r, &geo.obstacles);
  wall_chain({mid, door_v1 + dw}, {mid, mid}, r, &geo.obstacles);
  wall_chain({mid, mid}, {mid, door_v2 - dw}, r, &geo.obstacles);
  wall_chain({mid, door_v2 + dw}, {mid, side}, r, &geo.obstacles);
  wall_chain({0.0, mid}, {door_h1 - dw, mid}, r, &geo.obstacles);
  wall_chain({door_h1 + dw, mid}, {mid, mid}, r, &geo.obstacles);
  wall_chain({mid, mid}, {door_h2 - dw, mid}, r, &geo.obstacles);
  wall_chain({door_h2 + dw, mid}, {side, mid}, r, &geo.obstacles);

  const double m = 0.15;  // keep clear of outer walls and partitions
  geo.start_zones.push_back({m, mid - m, m, mid - m, "room_sw"});
  geo.start_zones.push_back({mid + m, side - m, m, mid - m, "room_se"});
  geo.start_zones.push_back({m, mid - m, mid + m, side - m, "room_nw"});
  geo.start_zones.push_back({mid + m, side - m, mid + m, side - m, "room_ne"});
  geo.goal_zones = geo.start_zones;
  return geo;
}

}  // namespace

MapGeometry generate_map(MapFamily family, uint64_t map_seed, const MapParams& params) {
  switch (family) {
    case MapFamily::empty: return random_map(0, map_seed, params);
    case MapFamily::basic: return random_map(10, map_seed, params);
    case MapFamily::dense: return random_map(20, map_seed, params);
    case MapFamily::corridor: return corridor_map(map_seed, params);
    case MapFamily::shelf: return shelf_map(map_seed, params);
    case MapFamily::room: return room_map(map_seed, params);
  }
  throw std::invalid_argument("generate_map: unknown family");
}

namespace {

Vec2 sample_clear_position(const MapGeometry& map, const Zone& zone,
                           const std::vector<Vec2>& placed, Rng& rng) {
  const double r = map.robot_radius;
  const double margin = 0.01;
  for (int attempt = 0; attempt < 20000; ++attempt) {
    Vec2 p{rng.uniform(zone.xmin, zone.xmax), rng.uniform(zone.ymin, zone.ymax)};
    bool ok = true;
    for (const auto& o : map.obstacles) {
      if ((p - o.center).norm() < r + o.radius + margin) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    for (const auto& q : placed) {
      if ((p - q).norm() < 2.0 * r + margin) {
        ok = false;
        break;
      }
    }
    if (ok) return p;
  }
  throw std::runtime_error("assign_tasks: rejection budget exhausted in zone '" + zone.name + "'");
}

}  // namespace

TaskAssignment assign_tasks(const MapGeometry& map, int num_robots, uint64_t case_seed,
                            double workspace_side) {
  (void)workspace_side;
  if (map.start_zones.empty()) throw std::invalid_argument("assign_tasks: map has no zones");
  Rng rng(case_seed);
  TaskAssignment tasks;

  if (map.swap_tasks) {
    if (num_robots != 2 || map.start_zones.size() != 2)
      throw std::invalid_argument("swap task maps require exactly 2 robots and 2 zones");
    for (int i = 0; i < 2; ++i)
      tasks.starts.push_back(sample_clear_position(map, map.start_zones[i], tasks.starts, rng));
    // exact exchange: each robot ends where the other one starts
    tasks.goals = {tasks.starts[1], tasks.starts[0]};
    return tasks;
  }

  for (int i = 0; i < num_robots; ++i) {
    const Zone& sz = map.start_zones[rng.uniform_int(0, static_cast<int>(map.start_zones.size()) - 1)];
    tasks.starts.push_back(sample_clear_position(map, sz, tasks.starts, rng));
    // goals land in a different zone when several exist (rooms)
    const Zone* gz = &map.goal_zones[0];
    if (map.goal_zones.size() > 1) {
      int gi;
      do {
        gi = rng.uniform_int(0, static_cast<int>(map.goal_zones.size()) - 1);
      } while (map.goal_zones.size() > 1 && map.goal_zones[gi].contains(tasks.starts.back()));
      gz = &map.goal_zones[gi];
    }
    tasks.goals.push_back(sample_clear_position(map, *gz, tasks.goals, rng));
  }
  return tasks;
}

Suite generate_suite(const BenchmarkSpec& spec) {
  if (spec.num_maps < 1 || spec.cases_per_config < 1)
    throw std::invalid_argument("generate_suite: counts must be positive");
  Suite suite;
  for (size_t fi = 0; fi < spec.families.size(); ++fi) {
    const MapFamily family = spec.families[fi];
    const std::vector<int> robot_counts =
        family == MapFamily::corridor ? std::vector<int>{2} : spec.robots_counts;
    for (int m = 0; m < spec.num_maps; ++m) {
      const uint64_t map_seed =
          mix_seed(spec.seed, static_cast<uint64_t>(family) * 1000003ULL + m);
      const MapGeometry geo = generate_map(family, map_seed, spec.params);
      for (int n : robot_counts) {
        for (int c = 0; c < spec.cases_per_config; ++c) {
          const uint64_t case_seed = mix_seed(map_seed, static_cast<uint64_t>(n) * 1009ULL + c);
          const TaskAssignment tasks = assign_tasks(geo, n, case_seed, spec.params.workspace_side);

          ProblemInstance instance;
          instance.workspace_side = spec.params.workspace_side;
          instance.horizon = spec.horizon;
          instance.dt = spec.dt;
          instance.map_family = family;
          instance.obstacles = geo.obstacles;
          for (int i = 0; i < n; ++i) {
            RobotSpec r;
            r.radius = geo.robot_radius;
            r.start = tasks.starts[i];
            r.goal = tasks.goals[i];
            r.v_max = spec.v_max;
            instance.robots.push_back(r);
          }
          std::ostringstream id;
          id << to_string(family) << "_m" << std::setw(2) << std::setfill('0') << m << "_r" << n
             << "_c" << std::setw(2) << std::setfill('0') << c;
          instance.instance_id = id.str();
          instance.validate();
          if (!straight_line_feasible(instance))
            throw std::runtime_error("generated instance has empty Omega_c: " + instance.instance_id);

          suite.manifest.push_back(
              {instance.instance_id, instance.instance_id + ".json", family, n, map_seed, case_seed});
          suite.instances.push_back(std::move(instance));
        }
      }
    }
  }
  return suite;
}

json Suite::manifest_json(const BenchmarkSpec& spec) const {
  json families = json::array();
  for (auto f : spec.families) families.push_back(to_string(f));
  json entries = json::array();
  for (const auto& e : manifest) {
    entries.push_back({{"instance_id", e.instance_id},
                       {"file", e.file},
                       {"family", to_string(e.family)},
                       {"num_robots", e.num_robots},
                       {"map_seed", e.map_seed},
                       {"case_seed", e.case_seed}});
  }
  return json{{"spec",
               {{"families", families},
                {"num_maps", spec.num_maps},
                {"robots_counts", spec.robots_counts},
                {"cases_per_config", spec.cases_per_config},
                {"seed", spec.seed},
                {"horizon", spec.horizon},
                {"dt", spec.dt},
                {"v_max", spec.v_max}}},
              {"instances", entries}};
}

}  // namespace mrplan
