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

#include "mrplan/projection.hpp"
#include "mrplan/rng.hpp"
#include "mrplan/types.hpp"

namespace mrplan {

/// Variance-preserving schedule; alpha_bars[0] = 1 by convention and
/// alpha_bars[t] = prod_{s<=t} alpha_s.
struct NoiseSchedule {
  int num_steps = 25;
  std::vector<double> alphas;      // alphas[t-1] = alpha_t for t in [1, T]
  std::vector<double> alpha_bars;  // size T + 1

  static NoiseSchedule linear(int num_steps = 25, double beta_start = 1e-4,
                              double beta_end = 0.25);

  double alpha(int t) const { return alphas.at(t - 1); }
  double alpha_bar(int t) const { return alpha_bars.at(t); }
  void validate() const;

  nlohmann::json to_json() const;
  static NoiseSchedule from_json(const nlohmann::json& j);
};

/// Fully-connected time-conditioned denoiser. Input is the flattened
/// trajectory (centered coordinates) concatenated with a sinusoidal time
/// embedding; output matches the trajectory dimension.
class ScoreModel {
 public:
  ScoreModel() = default;
  ScoreModel(int traj_dim, std::vector<int> hidden, int time_embed_dim, uint64_t seed);

  int traj_dim() const { return traj_dim_; }
  int time_embed_dim() const { return time_embed_dim_; }
  const std::vector<int>& hidden() const { return hidden_; }

  std::vector<double> forward(const std::vector<double>& x, int t) const;

  /// Forward pass with caches, then backprop of dL/doutput into parameter
  /// gradients (accumulated) and optionally the input gradient.
  struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    void scale(double s);
  };
  Gradients zero_gradients() const;
  std::vector<double> forward_backward(const std::vector<double>& x, int t,
                                       const std::vector<double>& dloss_dout,
                                       Gradients* grads) const;

  size_t num_parameters() const;
  std::vector<std::vector<double>>& weights() { return weights_; }
  std::vector<std::vector<double>>& biases() { return biases_; }
  const std::vector<std::vector<double>>& weights() const { return weights_; }
  const std::vector<std::vector<double>>& biases() const { return biases_; }
  const std::vector<int>& layer_inputs() const { return layer_in_; }
  const std::vector<int>& layer_outputs() const { return layer_out_; }

  bool all_finite() const;
  std::vector<double> time_embedding(int t) const;

  nlohmann::json to_json() const;
  static ScoreModel from_json(const nlohmann::json& j);

 private:
  int traj_dim_ = 0;
  int time_embed_dim_ = 32;
  std::vector<int> hidden_;
  std::vector<int> layer_in_, layer_out_;
  std::vector<std::vector<double>> weights_;  // row-major [out][in]
  std::vector<std::vector<double>> biases_;
};

/// Score model plus the schedule it was trained against and its shape key.
struct ModelCheckpoint {
  int version = 1;
  NoiseSchedule schedule;
  ScoreModel model;
  int num_robots = 0;
  int horizon = 0;
  std::string map_family;

  void save(const std::filesystem::path& path) const;
  static ModelCheckpoint load(const std::filesystem::path& path);
};

Trajectory forward_sample(const Trajectory& x0, int t, const std::vector<double>& noise,
                          const NoiseSchedule& schedule);

/// Denoising score matching over one minibatch: samples (t, eps) per item,
/// target score -eps / sqrt(1 - alpha_bar_t), weight (1 - alpha_t); returns
/// the weighted mean-squared loss and accumulates parameter gradients.
double score_matching_loss(const ScoreModel& model, const std::vector<std::vector<double>>& batch,
                           const NoiseSchedule& schedule, Rng& rng,
                           ScoreModel::Gradients* grads);

struct TrainConfig {
  double lr = 1e-4;
  int batch_size = 64;
  int epochs = 100;
  uint64_t seed = 0;
};

struct TrainResult {
  std::vector<double> epoch_losses;
};

/// Adam on the score-matching objective. Trajectories are centered about the
/// workspace midpoint before flattening. Deterministic for a fixed seed.
TrainResult train(ScoreModel& model, const std::vector<Trajectory>& dataset,
                  const NoiseSchedule& schedule, const TrainConfig& config,
                  double workspace_side = 2.0);

Trajectory sgld_step(const Trajectory& x, int t, const ScoreModel& model, double gamma,
                     const std::vector<double>& noise, double workspace_side);

struct SamplerConfig {
  int inner_iters = 5;  // M
  double gamma0 = 0.05;
  uint64_t seed = 0;
  ProjectionConfig projection;
  bool projection_enabled = true;
  double relaxed_delta = 1e-3;  // intermediate steps; strict deltas at t = 1
};

struct SampleDiagnosticsRow {
  int t = 0;
  int i = 0;
  double ha_inf = 0.0;
  double ho_inf = 0.0;
  bool projection_converged = false;
};

struct SampleResult {
  Trajectory trajectory;
  bool final_projection_converged = false;
  std::vector<SampleDiagnosticsRow> diagnostics;
};

/// Annealed Langevin sampling with a projection after every update; carries
/// x_{t-1}^0 <- x_t^M across noise levels.
SampleResult sample(const ProblemInstance& instance, const ScoreModel& model,
                    const NoiseSchedule& schedule, const SamplerConfig& config);

struct BootstrapStats {
  int requested = 0;
  int produced = 0;
  int attempts = 0;
  bool low_yield = false;  // produced < requested / 2
};

/// Feasible training trajectories: straight lines with low-frequency
/// sinusoidal perturbations vanishing at the endpoints, projected onto Omega
/// and verified; retries with fresh perturbations up to a cap.
std::vector<Trajectory> bootstrap_dataset(const ProblemInstance& instance, int count,
                                          uint64_t seed, const ProjectionConfig& projection,
                                          BootstrapStats* stats = nullptr);

}  // namespace mrplan
