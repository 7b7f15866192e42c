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

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mrplan/types.hpp"

namespace mrplan {

nlohmann::json instance_to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const nlohmann::json& j);

nlohmann::json trajectory_to_json(const Trajectory& traj, const std::string& instance_id);
Trajectory trajectory_from_json(const nlohmann::json& j, std::string* instance_id = nullptr);

void save_instance(const ProblemInstance& instance, const std::filesystem::path& path);
ProblemInstance load_instance(const std::filesystem::path& path);

void save_trajectory(const Trajectory& traj, const std::string& instance_id,
                     const std::filesystem::path& path);
Trajectory load_trajectory(const std::filesystem::path& path, std::string* instance_id = nullptr);

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace mrplan
