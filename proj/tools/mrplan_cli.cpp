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

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrplan/benchmark.hpp"
#include "mrplan/diffusion.hpp"
#include "mrplan/evaluation.hpp"
#include "mrplan/io.hpp"
#include "mrplan/projection.hpp"
#include "mrplan/rng.hpp"
#include "mrplan/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mrplan;

namespace {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

struct Globals {
  uint64_t seed = 0;
  std::string config_path;
  std::string out;
  int threads = 1;
  std::string log_level = "info";

  LogLevel level() const {
    if (log_level == "quiet") return LogLevel::quiet;
    if (log_level == "debug") return LogLevel::debug;
    return LogLevel::info;
  }
};

std::mutex log_mutex;

void log(const Globals& g, LogLevel lvl, const std::string& msg) {
  if (static_cast<int>(lvl) > static_cast<int>(g.level())) return;
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << msg << "\n";
}

json load_config(const Globals& g) {
  if (g.config_path.empty()) return json::object();
  return read_json_file(g.config_path);
}

ProjectionConfig projection_config(const json& config) {
  if (config.contains("projection")) return ProjectionConfig::from_json(config.at("projection"));
  return ProjectionConfig{};
}

void write_run_record(const Globals& g, const std::string& subcommand, json args) {
  fs::create_directories(g.out);
  json run{{"subcommand", subcommand},
           {"seed", g.seed},
           {"threads", g.threads},
           {"config_file", g.config_path},
           {"args", std::move(args)}};
  write_json_file(run, fs::path(g.out) / "run.json");
}

/// Instance files in deterministic order: manifest order when a manifest
/// exists, otherwise sorted filenames.
std::vector<fs::path> instance_files(const fs::path& dir) {
  std::vector<fs::path> files;
  const fs::path manifest_path = dir / "manifest.json";
  if (fs::exists(manifest_path)) {
    const json manifest = read_json_file(manifest_path);
    for (const auto& entry : manifest.at("instances"))
      files.push_back(dir / entry.at("file").get<std::string>());
    return files;
  }
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".json") continue;
    const std::string name = e.path().filename().string();
    if (name == "manifest.json" || name == "run.json") continue;
    files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int k = next.fetch_add(1); k < n; k = next.fetch_add(1)) fn(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string trace_csv_header() { return "k,ha_inf,ho_inf,rho,objective\n"; }

void append_trace_row(std::ostringstream& os, const ProjectionTraceRow& row) {
  os.precision(17);
  os << row.k << "," << row.ha_inf << "," << row.ho_inf << "," << row.rho << "," << row.objective
     << "\n";
}

int cmd_generate(const Globals& g, const json& config, const std::vector<std::string>& families,
                 int maps, const std::vector<int>& robots, int cases) {
  BenchmarkSpec spec;
  if (!families.empty() && families != std::vector<std::string>{"all"}) {
    spec.families.clear();
    for (const auto& f : families) spec.families.push_back(map_family_from_string(f));
  }
  spec.num_maps = maps;
  if (!robots.empty()) spec.robots_counts = robots;
  spec.cases_per_config = cases;
  spec.seed = g.seed;
  if (config.contains("benchmark")) {
    const json& b = config.at("benchmark");
    if (b.contains("horizon")) spec.horizon = b.at("horizon").get<int>();
    if (b.contains("v_max")) spec.v_max = b.at("v_max").get<double>();
    if (b.contains("dt")) spec.dt = b.at("dt").get<double>();
  }

  const Suite suite = generate_suite(spec);
  fs::create_directories(g.out);
  for (size_t k = 0; k < suite.instances.size(); ++k)
    save_instance(suite.instances[k], fs::path(g.out) / suite.manifest[k].file);
  write_json_file(suite.manifest_json(spec), fs::path(g.out) / "manifest.json");
  log(g, LogLevel::info,
      "generate: wrote " + std::to_string(suite.instances.size()) + " instances to " + g.out);
  return 0;
}

int cmd_bootstrap(const Globals& g, const json& config, const std::string& instances_dir,
                  int count) {
  const ProjectionConfig proj = projection_config(config);
  const std::vector<fs::path> files = instance_files(instances_dir);
  if (files.empty()) throw std::runtime_error("bootstrap-data: no instances in " + instances_dir);

  std::atomic<int> low_yield{0};
  parallel_for(static_cast<int>(files.size()), g.threads, [&](int k) {
    const ProblemInstance inst = load_instance(files[k]);
    const uint64_t inst_seed = mix_seed(g.seed, std::hash<std::string>{}(inst.instance_id));
    BootstrapStats stats;
    const std::vector<Trajectory> data =
        bootstrap_dataset(inst, count, inst_seed, proj, &stats);
    const fs::path dir = fs::path(g.out) / inst.instance_id;
    fs::create_directories(dir);
    for (size_t i = 0; i < data.size(); ++i) {
      std::ostringstream name;
      name << "traj_" << std::setw(4) << std::setfill('0') << i << ".json";
      save_trajectory(data[i], inst.instance_id, dir / name.str());
    }
    write_json_file(json{{"requested", stats.requested},
                         {"produced", stats.produced},
                         {"attempts", stats.attempts},
                         {"low_yield", stats.low_yield}},
                    dir / "stats.json");
    if (stats.low_yield) {
      ++low_yield;
      log(g, LogLevel::info, "bootstrap-data: low yield on " + inst.instance_id);
    }
    log(g, LogLevel::debug,
        "bootstrap-data: " + inst.instance_id + " produced " + std::to_string(stats.produced));
  });
  log(g, LogLevel::info, "bootstrap-data: processed " + std::to_string(files.size()) +
                             " instances, " + std::to_string(low_yield.load()) + " low-yield");
  return 0;
}

int cmd_train(const Globals& g, const json& config, const std::string& data_dir,
              const std::string& family, int epochs, double lr, int batch) {
  std::vector<Trajectory> dataset;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(data_dir)) {
    if (e.path().extension() == ".json" && e.path().filename().string().rfind("traj_", 0) == 0)
      files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) dataset.push_back(load_trajectory(f));
  if (dataset.empty()) throw std::runtime_error("train: no trajectories under " + data_dir);
  const int n = dataset[0].num_robots, h = dataset[0].horizon;
  for (const auto& t : dataset)
    if (t.num_robots != n || t.horizon != h)
      throw std::runtime_error("train: mixed trajectory shapes in " + data_dir);

  NoiseSchedule schedule = NoiseSchedule::linear();
  TrainConfig tc;
  tc.epochs = epochs;
  tc.lr = lr;
  tc.batch_size = batch;
  tc.seed = g.seed;
  std::vector<int> hidden = {256, 256, 256, 256};
  int embed = 32;
  if (config.contains("train")) {
    const json& t = config.at("train");
    if (t.contains("hidden")) hidden = t.at("hidden").get<std::vector<int>>();
    if (t.contains("time_embed_dim")) embed = t.at("time_embed_dim").get<int>();
    if (t.contains("num_steps"))
      schedule = NoiseSchedule::linear(t.at("num_steps").get<int>());
  }

  ScoreModel model(n * h * 2, hidden, embed, mix_seed(g.seed, 0x5eed));
  const TrainResult result = train(model, dataset, schedule, tc);

  ModelCheckpoint ckpt;
  ckpt.schedule = schedule;
  ckpt.model = std::move(model);
  ckpt.num_robots = n;
  ckpt.horizon = h;
  ckpt.map_family = family;
  fs::create_directories(g.out);
  ckpt.save(fs::path(g.out) / "model.json");

  json losses = json::array();
  for (double l : result.epoch_losses) losses.push_back(l);
  write_json_file(json{{"epoch_losses", losses}, {"dataset_size", dataset.size()}},
                  fs::path(g.out) / "train_log.json");
  log(g, LogLevel::info,
      "train: " + std::to_string(dataset.size()) + " trajectories, final loss " +
          std::to_string(result.epoch_losses.back()));
  return 0;
}

int cmd_sample(const Globals& g, const json& config, const std::string& instances_dir,
               const std::string& model_path, bool no_projection, int inner_iters) {
  const ModelCheckpoint ckpt = ModelCheckpoint::load(model_path);
  const std::vector<fs::path> files = instance_files(instances_dir);
  if (files.empty()) throw std::runtime_error("sample: no instances in " + instances_dir);

  SamplerConfig sc;
  sc.projection = projection_config(config);
  sc.projection_enabled = !no_projection;
  sc.inner_iters = inner_iters;
  if (config.contains("sampler")) {
    const json& s = config.at("sampler");
    if (s.contains("gamma0")) sc.gamma0 = s.at("gamma0").get<double>();
    if (s.contains("relaxed_delta")) sc.relaxed_delta = s.at("relaxed_delta").get<double>();
  }

  const fs::path traj_dir = fs::path(g.out) / "trajectories";
  fs::create_directories(traj_dir);

  std::mutex diag_mutex;
  std::ostringstream diagnostics;
  diagnostics << "instance_id,t,i,ha_inf,ho_inf,projection_converged\n";
  std::atomic<int> skipped{0};

  parallel_for(static_cast<int>(files.size()), g.threads, [&](int k) {
    const ProblemInstance inst = load_instance(files[k]);
    if (inst.num_robots() != ckpt.num_robots || inst.horizon != ckpt.horizon) {
      ++skipped;
      log(g, LogLevel::info, "sample: shape mismatch, skipping " + inst.instance_id);
      return;
    }
    SamplerConfig local = sc;
    local.seed = mix_seed(g.seed, std::hash<std::string>{}(inst.instance_id));
    const SampleResult result = sample(inst, ckpt.model, ckpt.schedule, local);
    save_trajectory(result.trajectory, inst.instance_id, traj_dir / (inst.instance_id + ".json"));

    std::ostringstream rows;
    rows.precision(17);
    for (const auto& d : result.diagnostics)
      rows << inst.instance_id << "," << d.t << "," << d.i << "," << d.ha_inf << "," << d.ho_inf
           << "," << (d.projection_converged ? 1 : 0) << "\n";
    std::lock_guard<std::mutex> lock(diag_mutex);
    diagnostics << rows.str();
  });

  std::ofstream diag_file(fs::path(g.out) / "diagnostics.csv");
  diag_file << diagnostics.str();
  log(g, LogLevel::info, "sample: wrote " + std::to_string(files.size() - skipped.load()) +
                             " trajectories, skipped " + std::to_string(skipped.load()));
  return skipped.load() == 0 ? 0 : 1;
}

int cmd_project(const Globals& g, const json& config, const std::string& instance_path,
                const std::string& input_path, const std::string& trace_path) {
  const ProblemInstance inst = load_instance(instance_path);
  Trajectory input = input_path.empty() ? straight_line_trajectory(inst)
                                        : load_trajectory(input_path);

  std::ostringstream trace;
  trace << trace_csv_header();
  ProjectionTraceSink sink = nullptr;
  if (!trace_path.empty()) sink = [&](const ProjectionTraceRow& row) { append_trace_row(trace, row); };

  const ProjectionConfig proj = projection_config(config);
  const ProjectionResult result = project_alm(input, inst, proj, sink);

  fs::create_directories(g.out);
  save_trajectory(result.trajectory, inst.instance_id, fs::path(g.out) / "projected.json");
  write_json_file(json{{"converged", result.converged},
                       {"outer_iterations", result.outer_iterations},
                       {"ha_inf", result.ha_inf},
                       {"ho_inf", result.ho_inf}},
                  fs::path(g.out) / "projection_summary.json");
  if (!trace_path.empty()) {
    std::ofstream f(trace_path);
    f << trace.str();
  }
  log(g, LogLevel::info, std::string("project: converged=") +
                             (result.converged ? "true" : "false") + " after " +
                             std::to_string(result.outer_iterations) + " outer iterations");
  return 0;
}

int cmd_evaluate(const Globals& g, const std::string& instances_dir,
                 const std::string& trajectories_dir, bool discrete, int substeps) {
  const std::vector<fs::path> files = instance_files(instances_dir);
  if (files.empty()) throw std::runtime_error("evaluate: no instances in " + instances_dir);

  EvalMode mode;
  if (discrete) mode = EvalMode::discrete();
  else mode.substeps = substeps;

  std::vector<InstanceRecord> records(files.size());
  std::vector<std::string> manifest_ids(files.size());
  parallel_for(static_cast<int>(files.size()), g.threads, [&](int k) {
    const ProblemInstance inst = load_instance(files[k]);
    manifest_ids[k] = inst.instance_id;
    const fs::path traj_path = fs::path(trajectories_dir) / (inst.instance_id + ".json");
    if (!fs::exists(traj_path))
      throw std::runtime_error("evaluate: missing trajectory for " + inst.instance_id);
    const Trajectory traj = load_trajectory(traj_path);
    records[k] = evaluate_case(traj, inst, mode);
  });

  const EvaluationReport report = aggregate(records, manifest_ids);
  fs::create_directories(g.out);
  write_json_file(report_to_json(report), fs::path(g.out) / "report.json");
  std::ofstream(fs::path(g.out) / "report.csv") << report_to_csv(report);
  std::ofstream(fs::path(g.out) / "success_bars.csv") << success_bars_csv(report);

  for (const auto& row : report.aggregate) {
    std::ostringstream os;
    os.precision(4);
    os << "evaluate: " << to_string(row.family) << " n=" << row.num_robots
       << " S=" << row.success_rate << " C=" << row.mean_collision_ratio;
    log(g, LogLevel::info, os.str());
  }
  return 0;
}

int cmd_sweep_zeta(const Globals& g, const json& config, const std::string& instance_path,
                   std::vector<double> zetas) {
  const ProblemInstance inst = load_instance(instance_path);
  if (zetas.empty()) zetas = {1.00, 1.01, 1.03, 1.05, 1.07, 1.09};

  // A reproducible off-manifold input: the straight line with seeded noise on
  // the interior steps, shared across all zeta values.
  Trajectory input = straight_line_trajectory(inst);
  Rng rng(g.seed);
  for (int i = 0; i < input.num_robots; ++i)
    for (int h = 1; h < input.horizon - 1; ++h)
      input.at(i, h) += {0.05 * rng.normal(), 0.05 * rng.normal()};

  fs::create_directories(fs::path(g.out) / "traces");
  json summary = json::array();
  for (double zeta : zetas) {
    ProjectionConfig proj = projection_config(config);
    proj.zeta = zeta;
    std::ostringstream trace;
    trace << trace_csv_header();
    const ProjectionResult result = project_alm(
        input, inst, proj, [&](const ProjectionTraceRow& row) { append_trace_row(trace, row); });

    std::ostringstream name;
    name.precision(3);
    name << "zeta_" << std::fixed << zeta << ".csv";
    std::ofstream(fs::path(g.out) / "traces" / name.str()) << trace.str();
    summary.push_back(json{{"zeta", zeta},
                           {"converged", result.converged},
                           {"outer_iterations", result.outer_iterations},
                           {"ha_inf", result.ha_inf},
                           {"ho_inf", result.ho_inf}});
    std::ostringstream os;
    os << "sweep-zeta: zeta=" << zeta << " outer_iterations=" << result.outer_iterations
       << (result.converged ? "" : " (not converged)");
    log(g, LogLevel::info, os.str());
  }
  write_json_file(summary, fs::path(g.out) / "summary.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot trajectory planning toolkit"};
  app.require_subcommand(1);

  Globals g;
  app.add_option("--seed", g.seed, "Base RNG seed");
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--threads", g.threads, "Worker threads over independent instances");
  app.add_option("--log-level", g.log_level, "quiet | info | debug");

  auto* gen = app.add_subcommand("generate", "Generate a benchmark instance suite");
  std::vector<std::string> gen_families;
  int gen_maps = 25, gen_cases = 10;
  std::vector<int> gen_robots;
  gen->add_option("--family", gen_families, "Map families (default: all)");
  gen->add_option("--maps", gen_maps, "Maps per family");
  gen->add_option("--robots", gen_robots, "Robot counts (default 3 6 9)");
  gen->add_option("--cases", gen_cases, "Cases per (map, robot count)");
  gen->add_option("--out", g.out, "Output directory")->required();

  auto* boot = app.add_subcommand("bootstrap-data", "Build feasible training trajectories");
  std::string boot_instances;
  int boot_count = 16;
  boot->add_option("--instances", boot_instances, "Instance directory")->required();
  boot->add_option("--count", boot_count, "Trajectories per instance");
  boot->add_option("--out", g.out, "Output directory")->required();

  auto* tr = app.add_subcommand("train", "Train a score model on bootstrap data");
  std::string tr_data, tr_family = "empty";
  int tr_epochs = 100, tr_batch = 64;
  double tr_lr = 1e-4;
  tr->add_option("--data", tr_data, "Bootstrap output directory")->required();
  tr->add_option("--family", tr_family, "Map family tag for the checkpoint");
  tr->add_option("--epochs", tr_epochs, "Training epochs");
  tr->add_option("--lr", tr_lr, "Adam learning rate");
  tr->add_option("--batch", tr_batch, "Minibatch size");
  tr->add_option("--out", g.out, "Output directory")->required();

  auto* sam = app.add_subcommand("sample", "Sample trajectories with projected Langevin steps");
  std::string sam_instances, sam_model;
  bool sam_no_projection = false;
  int sam_inner = 5;
  sam->add_option("--instances", sam_instances, "Instance directory")->required();
  sam->add_option("--model", sam_model, "Model checkpoint file")->required();
  sam->add_flag("--no-projection", sam_no_projection, "Ablation: skip all projections");
  sam->add_option("--inner-iters", sam_inner, "Langevin iterations per noise level");
  sam->add_option("--out", g.out, "Output directory")->required();

  auto* proj = app.add_subcommand("project", "Project a trajectory onto the feasible set");
  std::string proj_instance, proj_input, proj_trace;
  proj->add_option("--instance", proj_instance, "Instance file")->required();
  proj->add_option("--input", proj_input, "Input trajectory (default: straight line)");
  proj->add_option("--trace", proj_trace, "Per-outer-iteration CSV trace file");
  proj->add_option("--out", g.out, "Output directory")->required();

  auto* ev = app.add_subcommand("evaluate", "Score trajectories against their instances");
  std::string ev_instances, ev_trajectories;
  bool ev_discrete = false;
  int ev_substeps = 4;
  ev->add_option("--instances", ev_instances, "Instance directory")->required();
  ev->add_option("--trajectories", ev_trajectories, "Trajectory directory")->required();
  ev->add_flag("--discrete", ev_discrete, "Strict per-step checking, no interpolation");
  ev->add_option("--substeps", ev_substeps, "Interpolation substeps per segment");
  ev->add_option("--out", g.out, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep-zeta", "Penalty growth sensitivity traces");
  std::string sweep_instance;
  std::vector<double> sweep_zetas;
  sweep->add_option("--instance", sweep_instance, "Instance file")->required();
  sweep->add_option("--zetas", sweep_zetas, "Zeta values to trace");
  sweep->add_option("--out", g.out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const json config = load_config(g);
    if (gen->parsed()) {
      write_run_record(g, "generate",
                       json{{"families", gen_families},
                            {"maps", gen_maps},
                            {"robots", gen_robots},
                            {"cases", gen_cases}});
      return cmd_generate(g, config, gen_families, gen_maps, gen_robots, gen_cases);
    }
    if (boot->parsed()) {
      write_run_record(g, "bootstrap-data",
                       json{{"instances", boot_instances}, {"count", boot_count}});
      return cmd_bootstrap(g, config, boot_instances, boot_count);
    }
    if (tr->parsed()) {
      write_run_record(g, "train",
                       json{{"data", tr_data},
                            {"family", tr_family},
                            {"epochs", tr_epochs},
                            {"lr", tr_lr},
                            {"batch", tr_batch}});
      return cmd_train(g, config, tr_data, tr_family, tr_epochs, tr_lr, tr_batch);
    }
    if (sam->parsed()) {
      write_run_record(g, "sample",
                       json{{"instances", sam_instances},
                            {"model", sam_model},
                            {"no_projection", sam_no_projection},
                            {"inner_iters", sam_inner}});
      return cmd_sample(g, config, sam_instances, sam_model, sam_no_projection, sam_inner);
    }
    if (proj->parsed()) {
      write_run_record(g, "project",
                       json{{"instance", proj_instance},
                            {"input", proj_input},
                            {"trace", proj_trace}});
      return cmd_project(g, config, proj_instance, proj_input, proj_trace);
    }
    if (ev->parsed()) {
      write_run_record(g, "evaluate",
                       json{{"instances", ev_instances},
                            {"trajectories", ev_trajectories},
                            {"discrete", ev_discrete},
                            {"substeps", ev_substeps}});
      return cmd_evaluate(g, ev_instances, ev_trajectories, ev_discrete, ev_substeps);
    }
    if (sweep->parsed()) {
      write_run_record(g, "sweep-zeta",
                       json{{"instance", sweep_instance}, {"zetas", sweep_zetas}});
      return cmd_sweep_zeta(g, config, sweep_instance, sweep_zetas);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
