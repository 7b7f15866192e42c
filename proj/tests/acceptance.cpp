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

// End-to-end acceptance harness: one printed pass/fail line per criterion.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "grid_oracle.hpp"
#include "mrplan/benchmark.hpp"
#include "mrplan/constraints.hpp"
#include "mrplan/diffusion.hpp"
#include "mrplan/evaluation.hpp"
#include "mrplan/io.hpp"
#include "mrplan/projection.hpp"
#include "mrplan/rng.hpp"
#include "mrplan/types.hpp"

using namespace mrplan;
using mrplan::testing::project_oracle;
using mrplan::testing::squared_dist;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  (%s)\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
  if (!pass) ++failures;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int threads =
      std::max(1, std::min({static_cast<int>(std::thread::hardware_concurrency()), n, 8}));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int k = next.fetch_add(1); k < n; k = next.fetch_add(1)) fn(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Penalty settings used for sampling runs: a hot penalty start so warm
/// projections finish in a handful of outer iterations.
ProjectionConfig sampling_projection() {
  ProjectionConfig cfg;
  cfg.rho_init = 100.0;
  cfg.inner.max_iters = 20;
  cfg.convex_tol = 1e-7;
  return cfg;
}

struct TrainedFamily {
  ScoreModel model;
  NoiseSchedule schedule;
};

TrainedFamily train_family(const std::vector<ProblemInstance>& instances, uint64_t seed) {
  const ProjectionConfig proj = sampling_projection();
  std::vector<std::vector<Trajectory>> per_instance(instances.size());
  parallel_for(static_cast<int>(instances.size()), [&](int k) {
    per_instance[k] = bootstrap_dataset(instances[k], 6, mix_seed(seed, k), proj);
  });
  std::vector<Trajectory> dataset;
  for (auto& chunk : per_instance)
    for (auto& t : chunk) dataset.push_back(std::move(t));

  TrainedFamily out;
  out.schedule = NoiseSchedule::linear();
  const int dim = instances[0].num_robots() * instances[0].horizon * 2;
  out.model = ScoreModel(dim, {64, 64}, 16, mix_seed(seed, 0xabcd));
  TrainConfig tc;
  tc.epochs = 30;
  tc.lr = 1e-3;
  tc.batch_size = 32;
  tc.seed = mix_seed(seed, 0x7991);
  train(out.model, dataset, out.schedule, tc);
  return out;
}

struct SampledCase {
  ProblemInstance instance;
  Trajectory trajectory;
  bool final_converged = false;
  InstanceRecord record;
};

std::vector<SampledCase> sample_suite(const std::vector<ProblemInstance>& instances,
                                      const std::map<std::string, TrainedFamily>& models,
                                      bool projection_enabled, uint64_t seed) {
  std::vector<SampledCase> out(instances.size());
  parallel_for(static_cast<int>(instances.size()), [&](int k) {
    const ProblemInstance& inst = instances[k];
    const TrainedFamily& tf = models.at(to_string(inst.map_family));
    SamplerConfig sc;
    sc.projection = sampling_projection();
    sc.projection_enabled = projection_enabled;
    sc.seed = mix_seed(seed, std::hash<std::string>{}(inst.instance_id));
    out[k].instance = inst;
    try {
      SampleResult r = sample(inst, tf.model, tf.schedule, sc);
      out[k].trajectory = r.trajectory;
      out[k].final_converged = r.final_projection_converged;
      out[k].record = evaluate_case(r.trajectory, inst, EvalMode::discrete());
    } catch (const std::exception& e) {
      // a solver failure counts as an unsuccessful run, not a harness crash
      out[k].trajectory = straight_line_trajectory(inst);
      out[k].final_converged = false;
      out[k].record.instance_id = inst.instance_id;
      out[k].record.success = false;
      std::fprintf(stderr, "sample failed on %s: %s\n", inst.instance_id.c_str(), e.what());
    }
  });
  return out;
}

double mean_success(const std::vector<SampledCase>& cases) {
  double s = 0.0;
  for (const auto& c : cases) s += c.record.success ? 1.0 : 0.0;
  return s / cases.size();
}

double mean_collision_ratio(const std::vector<SampledCase>& cases) {
  double s = 0.0;
  for (const auto& c : cases) s += c.record.collision_ratio;
  return s / cases.size();
}

int total_events(const std::vector<SampledCase>& cases) {
  int e = 0;
  for (const auto& c : cases) e += c.record.collision_events;
  return e;
}

// Accumulated converged projection outputs, checked in criterion 5.
std::vector<SampledCase> converged_outputs;

void collect_converged(const std::vector<SampledCase>& cases) {
  for (const auto& c : cases)
    if (c.final_converged) converged_outputs.push_back(c);
}

}  // namespace

static void criteria_1_2_3() {
  BenchmarkSpec spec;
  spec.families = {MapFamily::empty, MapFamily::basic};
  spec.num_maps = 5;
  spec.robots_counts = {3};
  spec.cases_per_config = 5;
  spec.seed = 91;
  const Suite suite = generate_suite(spec);

  std::map<std::string, TrainedFamily> models;
  std::map<std::string, std::vector<ProblemInstance>> by_family;
  for (const auto& inst : suite.instances) by_family[to_string(inst.map_family)].push_back(inst);
  for (const auto& [family, insts] : by_family) models[family] = train_family(insts, 17);

  const std::vector<SampledCase> projected = sample_suite(suite.instances, models, true, 5);
  collect_converged(projected);
  {
    const double s = mean_success(projected);
    const double c = mean_collision_ratio(projected);
    std::ostringstream os;
    os << "50-run mini-suite, discrete eval: S=" << s << " C=" << c;
    report(1, s >= 0.95 && c <= 0.01, os.str());
  }

  const std::vector<SampledCase> ablated = sample_suite(suite.instances, models, false, 5);
  {
    const double s = mean_success(ablated);
    const int ev_on = total_events(projected);
    const int ev_off = total_events(ablated);
    std::ostringstream os;
    os << "no-projection ablation: S=" << s << " events " << ev_off << " vs " << ev_on;
    report(2, s <= 0.5 && ev_off > ev_on, os.str());
  }

  BenchmarkSpec cspec;
  cspec.families = {MapFamily::corridor};
  cspec.num_maps = 5;
  cspec.cases_per_config = 1;
  cspec.seed = 23;
  const Suite corridor = generate_suite(cspec);
  std::map<std::string, TrainedFamily> cmodels;
  cmodels["corridor"] = train_family(corridor.instances, 29);
  const std::vector<SampledCase> swaps = sample_suite(corridor.instances, cmodels, true, 7);
  collect_converged(swaps);
  {
    const double s = mean_success(swaps);
    double worst_endpoint = 0.0;
    for (const auto& c : swaps)
      worst_endpoint =
          std::max(worst_endpoint, convex_violation(c.trajectory, c.instance).endpoint_error);
    std::ostringstream os;
    os << "corridor swaps: S=" << s << " worst endpoint error=" << worst_endpoint;
    report(3, s >= 0.8 && worst_endpoint <= 1e-4, os.str());
  }
}

static void criterion_4() {
  struct Micro {
    ProblemInstance instance;
    Trajectory input;
  };
  std::vector<Micro> micros;
  Rng rng(404);

  auto noisy_straight = [&](const ProblemInstance& inst) {
    Trajectory t = straight_line_trajectory(inst);
    for (int i = 0; i < t.num_robots; ++i)
      for (int h = 1; h < t.horizon - 1; ++h)
        t.at(i, h) += {0.02 * rng.normal(), 0.02 * rng.normal()};
    return t;
  };

  // 8 x single robot, one free waypoint (2 scalars).
  for (int k = 0; k < 8; ++k) {
    ProblemInstance inst;
    inst.horizon = 3;
    inst.robots.push_back({0.05, {0.3, 1.0}, {1.7, 1.0}, 0.8});
    const double off = (k % 2 == 0 ? 1.0 : -1.0) * rng.uniform(0.03, 0.08);
    inst.obstacles.push_back({{rng.uniform(0.9, 1.1), 1.0 + off}, 0.1});
    micros.push_back({inst, noisy_straight(inst)});
  }
  // 6 x two robots crossing, one free waypoint each (4 scalars).
  for (int k = 0; k < 6; ++k) {
    ProblemInstance inst;
    inst.horizon = 3;
    const double dy = rng.uniform(0.02, 0.06);
    inst.robots.push_back({0.1, {0.4, 1.0}, {1.6, 1.0 + dy}, 0.9});
    inst.robots.push_back({0.1, {1.6, 1.0}, {0.4, 1.0 + dy}, 0.9});
    micros.push_back({inst, noisy_straight(inst)});
  }
  // 6 x single robot, three free waypoints (6 scalars).
  for (int k = 0; k < 6; ++k) {
    ProblemInstance inst;
    inst.horizon = 5;
    inst.robots.push_back({0.05, {0.2, 1.0}, {1.8, 1.0}, 0.6});
    const double off = (k % 2 == 0 ? 1.0 : -1.0) * rng.uniform(0.03, 0.08);
    inst.obstacles.push_back({{rng.uniform(0.9, 1.1), 1.0 + off}, 0.1});
    micros.push_back({inst, noisy_straight(inst)});
  }

  ProjectionConfig cfg;
  int within = 0;
  double worst_gap = 0.0;
  for (const Micro& m : micros) {
    const ProjectionResult r = project_alm(m.input, m.instance, cfg);
    if (r.converged) {
      SampledCase c;
      c.instance = m.instance;
      c.trajectory = r.trajectory;
      c.final_converged = true;
      c.record = evaluate_case(r.trajectory, m.instance, EvalMode::discrete());
      converged_outputs.push_back(c);
    }
    std::vector<Trajectory> starts;
    for (double shift : {0.0, 0.25, -0.25, 0.45, -0.45}) {
      Trajectory s = straight_line_trajectory(m.instance);
      for (int i = 0; i < s.num_robots; ++i)
        for (int h = 1; h < s.horizon - 1; ++h)
          s.at(i, h).y += shift * (i % 2 == 0 ? 1.0 : -1.0);
      starts.push_back(s);
    }
    // Same constraint tolerance the ALM targets, so both solve one problem.
    const auto oracle = project_oracle(m.input, m.instance, starts, 0.6, 1e-2, 1e-3, 1e-4);
    const double alm_obj = squared_dist(r.trajectory, m.input);
    if (!r.converged || !oracle.found) continue;
    const double gap = std::abs(alm_obj - oracle.objective) / std::max(oracle.objective, 1e-9);
    worst_gap = std::max(worst_gap, gap);
    if (gap <= 0.05) ++within;
  }
  std::ostringstream os;
  os << within << "/20 micro-instances within 5%, worst gap " << worst_gap;
  report(4, within == 20, os.str());
}

static void criterion_5() {
  int checked = 0, violations = 0;
  double worst_nonconvex = 0.0, worst_convex = 0.0;
  for (const auto& c : converged_outputs) {
    const NonconvexResiduals res = nonconvex_residuals(c.trajectory, c.instance);
    const double min_res = std::min(res.min_robot_residual(), res.min_obstacle_residual());
    const double cv = convex_violation(c.trajectory, c.instance).max();
    worst_nonconvex = std::max(worst_nonconvex, -min_res);
    worst_convex = std::max(worst_convex, cv);
    if (min_res < -1e-4 || cv > 1e-5) ++violations;
    ++checked;
  }
  std::ostringstream os;
  os << checked << " converged outputs, worst nonconvex violation " << std::max(worst_nonconvex, 0.0)
     << ", worst convex " << worst_convex;
  report(5, checked > 0 && violations == 0, os.str());
}

static void criterion_6() {
  MapGeometry geo = generate_map(MapFamily::basic, 3);
  TaskAssignment tasks = assign_tasks(geo, 3, 9);
  ProblemInstance inst;
  inst.horizon = 64;
  inst.map_family = MapFamily::basic;
  inst.obstacles = geo.obstacles;
  for (int i = 0; i < 3; ++i) inst.robots.push_back({0.05, tasks.starts[i], tasks.goals[i], 0.08});

  Trajectory input = straight_line_trajectory(inst);
  Rng rng(6);
  for (int i = 0; i < input.num_robots; ++i)
    for (int h = 1; h < input.horizon - 1; ++h)
      input.at(i, h) += {0.05 * rng.normal(), 0.05 * rng.normal()};

  std::vector<int> iters;
  for (double zeta : {1.00, 1.05, 1.09}) {
    ProjectionConfig cfg;
    cfg.zeta = zeta;
    const ProjectionResult r = project_alm(input, inst, cfg);
    iters.push_back(r.outer_iterations);
  }
  const bool pass = iters[0] >= iters[1] && iters[1] >= iters[2] && iters[0] > iters[1] &&
                    iters[0] > iters[2];
  std::ostringstream os;
  os << "outer iterations zeta {1.00, 1.05, 1.09}: " << iters[0] << ", " << iters[1] << ", "
     << iters[2];
  report(6, pass, os.str());
}

static void criterion_7() {
  bool pass = true;
  std::ostringstream os;

  // Augmented Lagrangian gradient vs central differences, 100 trials.
  {
    ProblemInstance inst;
    inst.horizon = 4;
    inst.robots.push_back({0.08, {0.3, 0.5}, {1.5, 0.5}, 0.6});
    inst.robots.push_back({0.08, {1.5, 0.7}, {0.3, 0.7}, 0.6});
    inst.obstacles.push_back({{0.9, 0.6}, 0.07});
    Rng rng(71);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Trajectory t(2, 4), anchor(2, 4);
      for (auto& p : t.positions) p = {rng.uniform(0.2, 1.6), rng.uniform(0.2, 1.6)};
      for (auto& p : anchor.positions) p = {rng.uniform(0.2, 1.6), rng.uniform(0.2, 1.6)};
      DualState dual;
      dual.rho_a = rng.uniform(0.5, 8.0);
      dual.rho_o = rng.uniform(0.5, 8.0);
      const NonconvexResiduals res = nonconvex_residuals(t, inst);
      dual.nu_a.resize(res.robot_pairs.size());
      dual.nu_o.resize(res.obstacle_pairs.size());
      for (auto& v : dual.nu_a) v = rng.uniform(-2.0, 2.0);
      for (auto& v : dual.nu_o) v = rng.uniform(-2.0, 2.0);

      const auto grad = augmented_lagrangian_gradient(t, anchor, dual, inst);
      auto flat = t.flatten();
      const double eps = 1e-6;
      double g2 = 0.0, e2 = 0.0;
      for (size_t k = 0; k < flat.size(); ++k) {
        const double saved = flat[k];
        flat[k] = saved + eps;
        const double fp = augmented_lagrangian_value(Trajectory::unflatten(flat, 2, 4), anchor,
                                                     dual, inst);
        flat[k] = saved - eps;
        const double fm = augmented_lagrangian_value(Trajectory::unflatten(flat, 2, 4), anchor,
                                                     dual, inst);
        flat[k] = saved;
        const double fd = (fp - fm) / (2.0 * eps);
        g2 += grad[k] * grad[k];
        e2 += (grad[k] - fd) * (grad[k] - fd);
      }
      worst = std::max(worst, std::sqrt(e2) / std::max(std::sqrt(g2), 1e-8));
    }
    if (worst >= 1e-4) pass = false;
    os << "AL grad worst rel err " << worst;
  }

  // Score-matching gradient vs central differences, 100 sampled parameters.
  {
    NoiseSchedule s = NoiseSchedule::linear();
    ScoreModel model(6, {10}, 4, 13);
    std::vector<std::vector<double>> batch;
    Rng data_rng(14);
    for (int b = 0; b < 3; ++b) {
      std::vector<double> item(6);
      for (auto& v : item) v = data_rng.uniform(-0.5, 0.5);
      batch.push_back(item);
    }
    auto eval = [&](const ScoreModel& m, ScoreModel::Gradients* g) {
      Rng r(555);
      return score_matching_loss(m, batch, s, r, g);
    };
    ScoreModel::Gradients grads = model.zero_gradients();
    eval(model, &grads);
    Rng pick(15);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const size_t li = static_cast<size_t>(pick.uniform_int(0, static_cast<int>(model.weights().size()) - 1));
      const size_t wi = static_cast<size_t>(pick.uniform_int(0, static_cast<int>(model.weights()[li].size()) - 1));
      const double eps = 1e-6;
      ScoreModel m = model;
      m.weights()[li][wi] += eps;
      const double fp = eval(m, nullptr);
      m.weights()[li][wi] -= 2.0 * eps;
      const double fm = eval(m, nullptr);
      const double fd = (fp - fm) / (2.0 * eps);
      const double denom = std::max(std::abs(grads.weights[li][wi]), 1e-6);
      worst = std::max(worst, std::abs(grads.weights[li][wi] - fd) / denom);
    }
    if (worst >= 1e-4) pass = false;
    os << "; score grad worst rel err " << worst;
  }

  // Forward-process moments over 1e4 draws.
  {
    NoiseSchedule s = NoiseSchedule::linear();
    Trajectory x0(1, 2);
    x0.positions = {{0.4, -0.3}, {0.8, 0.1}};
    const int t = 12, n = 10000;
    Rng rng(194);
    double sum = 0.0, sum_sq = 0.0;
    for (int k = 0; k < n; ++k) {
      std::vector<double> noise(4);
      for (auto& v : noise) v = rng.normal();
      const Trajectory xt = forward_sample(x0, t, noise, s);
      sum += xt.positions[0].x;
      sum_sq += xt.positions[0].x * xt.positions[0].x;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    const double em = std::sqrt(s.alpha_bar(t)) * x0.positions[0].x;
    const double ev = 1.0 - s.alpha_bar(t);
    const bool ok = std::abs(mean - em) < 3.0 * std::sqrt(ev / n) &&
                    std::abs(var - ev) < 3.0 * ev * std::sqrt(2.0 / (n - 1));
    if (!ok) pass = false;
    os << "; moments " << (ok ? "ok" : "off");
  }

  // Nonexpansiveness and idempotence of the convex projection, 100 pairs.
  {
    ProblemInstance inst;
    inst.horizon = 7;
    inst.robots.push_back({0.05, {0.2, 0.3}, {1.4, 1.2}, 0.4});
    Rng rng(195);
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
      Trajectory a(1, 7), b(1, 7);
      for (auto& p : a.positions) p = {rng.uniform(-0.3, 2.3), rng.uniform(-0.3, 2.3)};
      for (auto& p : b.positions) p = {rng.uniform(-0.3, 2.3), rng.uniform(-0.3, 2.3)};
      const Trajectory pa = project_convex(a, inst, 1e-10);
      const Trajectory pb = project_convex(b, inst, 1e-10);
      if (std::sqrt(squared_dist(pa, pb)) > std::sqrt(squared_dist(a, b)) + 1e-7) ok = false;
      const Trajectory paa = project_convex(pa, inst, 1e-10);
      if (std::sqrt(squared_dist(paa, pa)) > 1e-6) ok = false;
    }
    if (!ok) pass = false;
    os << "; projection properties " << (ok ? "ok" : "violated");
  }

  report(7, pass, os.str());
}

static void criterion_8() {
  BenchmarkSpec spec;
  spec.seed = 1234;
  const Suite a = generate_suite(spec);
  const Suite b = generate_suite(spec);

  std::map<MapFamily, int> counts;
  for (const auto& inst : a.instances) counts[inst.map_family]++;
  const bool counts_ok = a.instances.size() == 4000 && counts[MapFamily::empty] == 750 &&
                         counts[MapFamily::basic] == 750 && counts[MapFamily::dense] == 750 &&
                         counts[MapFamily::corridor] == 250 && counts[MapFamily::shelf] == 750 &&
                         counts[MapFamily::room] == 750;

  bool identical = a.instances.size() == b.instances.size();
  for (size_t k = 0; identical && k < a.instances.size(); ++k)
    identical = instance_to_json(a.instances[k]).dump() == instance_to_json(b.instances[k]).dump();

  std::ostringstream os;
  os << a.instances.size() << " instances, per-family counts " << (counts_ok ? "ok" : "wrong")
     << ", runs " << (identical ? "byte-identical" : "differ");
  report(8, counts_ok && identical, os.str());
}

int main() {
  setvbuf(stdout, nullptr, _IONBF, 0);
  criteria_1_2_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  return failures == 0 ? 0 : 1;
}
