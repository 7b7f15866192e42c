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

#include "mrplan/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mrplan/io.hpp"

namespace mrplan {

using nlohmann::json;

NoiseSchedule NoiseSchedule::linear(int num_steps, double beta_start, double beta_end) {
  if (num_steps < 1) throw std::invalid_argument("schedule needs num_steps >= 1");
  NoiseSchedule s;
  s.num_steps = num_steps;
  s.alpha_bars.push_back(1.0);
  double bar = 1.0;
  for (int t = 1; t <= num_steps; ++t) {
    const double beta =
        num_steps == 1 ? beta_start
                       : beta_start + (beta_end - beta_start) * (t - 1) / (num_steps - 1);
    const double alpha = 1.0 - beta;
    s.alphas.push_back(alpha);
    bar *= alpha;
    s.alpha_bars.push_back(bar);
  }
  s.validate();
  return s;
}

void NoiseSchedule::validate() const {
  if (static_cast<int>(alphas.size()) != num_steps ||
      static_cast<int>(alpha_bars.size()) != num_steps + 1)
    throw std::invalid_argument("schedule arrays inconsistent with num_steps");
  if (alpha_bars[0] != 1.0) throw std::invalid_argument("alpha_bar_0 must be 1");
  for (int t = 1; t <= num_steps; ++t) {
    if (!(alphas[t - 1] > 0.0 && alphas[t - 1] < 1.0))
      throw std::invalid_argument("alpha_t must lie in (0, 1)");
    if (!(alpha_bars[t] < alpha_bars[t - 1]))
      throw std::invalid_argument("alpha_bar must be strictly decreasing");
  }
}

json NoiseSchedule::to_json() const {
  return json{{"num_steps", num_steps}, {"alphas", alphas}, {"alpha_bars", alpha_bars}};
}

NoiseSchedule NoiseSchedule::from_json(const json& j) {
  NoiseSchedule s;
  s.num_steps = j.at("num_steps").get<int>();
  s.alphas = j.at("alphas").get<std::vector<double>>();
  s.alpha_bars = j.at("alpha_bars").get<std::vector<double>>();
  s.validate();
  return s;
}

ScoreModel::ScoreModel(int traj_dim, std::vector<int> hidden, int time_embed_dim, uint64_t seed)
    : traj_dim_(traj_dim), time_embed_dim_(time_embed_dim), hidden_(std::move(hidden)) {
  if (traj_dim_ <= 0) throw std::invalid_argument("traj_dim must be > 0");
  if (time_embed_dim_ % 2 != 0) throw std::invalid_argument("time_embed_dim must be even");
  std::vector<int> dims;
  dims.push_back(traj_dim_ + time_embed_dim_);
  for (int w : hidden_) dims.push_back(w);
  dims.push_back(traj_dim_);

  Rng rng(seed);
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    layer_in_.push_back(dims[l]);
    layer_out_.push_back(dims[l + 1]);
    const double scale = std::sqrt(2.0 / dims[l]);
    std::vector<double> w(static_cast<size_t>(dims[l]) * dims[l + 1]);
    for (auto& e : w) e = scale * rng.normal();
    weights_.push_back(std::move(w));
    biases_.emplace_back(dims[l + 1], 0.0);
  }
}

std::vector<double> ScoreModel::time_embedding(int t) const {
  std::vector<double> emb(time_embed_dim_);
  const int half = time_embed_dim_ / 2;
  for (int k = 0; k < half; ++k) {
    const double freq = std::exp(-std::log(10000.0) * k / std::max(1, half - 1));
    emb[2 * k] = std::sin(t * freq);
    emb[2 * k + 1] = std::cos(t * freq);
  }
  return emb;
}

namespace {

void affine_forward(const std::vector<double>& w, const std::vector<double>& b, int in, int out,
                    const std::vector<double>& x, std::vector<double>* y) {
  y->assign(out, 0.0);
  for (int r = 0; r < out; ++r) {
    double acc = b[r];
    const double* row = w.data() + static_cast<size_t>(r) * in;
    for (int c = 0; c < in; ++c) acc += row[c] * x[c];
    (*y)[r] = acc;
  }
}

}  // namespace

std::vector<double> ScoreModel::forward(const std::vector<double>& x, int t) const {
  if (static_cast<int>(x.size()) != traj_dim_)
    throw std::invalid_argument("ScoreModel::forward: input size mismatch");
  std::vector<double> a = x;
  const std::vector<double> emb = time_embedding(t);
  a.insert(a.end(), emb.begin(), emb.end());

  const size_t L = weights_.size();
  std::vector<double> z;
  for (size_t l = 0; l < L; ++l) {
    affine_forward(weights_[l], biases_[l], layer_in_[l], layer_out_[l], a, &z);
    if (l + 1 < L)
      for (auto& e : z) e = std::tanh(e);
    a = z;
  }
  return a;
}

ScoreModel::Gradients ScoreModel::zero_gradients() const {
  Gradients g;
  for (size_t l = 0; l < weights_.size(); ++l) {
    g.weights.emplace_back(weights_[l].size(), 0.0);
    g.biases.emplace_back(biases_[l].size(), 0.0);
  }
  return g;
}

void ScoreModel::Gradients::scale(double s) {
  for (auto& w : weights)
    for (auto& e : w) e *= s;
  for (auto& b : biases)
    for (auto& e : b) e *= s;
}

std::vector<double> ScoreModel::forward_backward(const std::vector<double>& x, int t,
                                                 const std::vector<double>& dloss_dout,
                                                 Gradients* grads) const {
  if (static_cast<int>(x.size()) != traj_dim_)
    throw std::invalid_argument("forward_backward: input size mismatch");
  std::vector<double> a0 = x;
  const std::vector<double> emb = time_embedding(t);
  a0.insert(a0.end(), emb.begin(), emb.end());

  const size_t L = weights_.size();
  std::vector<std::vector<double>> acts;  // post-activation per layer, acts[0] = input
  acts.push_back(std::move(a0));
  std::vector<double> z;
  for (size_t l = 0; l < L; ++l) {
    affine_forward(weights_[l], biases_[l], layer_in_[l], layer_out_[l], acts[l], &z);
    if (l + 1 < L)
      for (auto& e : z) e = std::tanh(e);
    acts.push_back(z);
  }

  std::vector<double> delta = dloss_dout;
  for (size_t li = L; li-- > 0;) {
    const int in = layer_in_[li];
    const int out = layer_out_[li];
    const std::vector<double>& input = acts[li];
    auto& gw = grads->weights[li];
    auto& gb = grads->biases[li];
    for (int r = 0; r < out; ++r) {
      gb[r] += delta[r];
      double* grow = gw.data() + static_cast<size_t>(r) * in;
      const double d = delta[r];
      for (int c = 0; c < in; ++c) grow[c] += d * input[c];
    }
    std::vector<double> prev(in, 0.0);
    for (int r = 0; r < out; ++r) {
      const double* wrow = weights_[li].data() + static_cast<size_t>(r) * in;
      const double d = delta[r];
      for (int c = 0; c < in; ++c) prev[c] += d * wrow[c];
    }
    if (li > 0) {
      // acts[li] is the tanh output feeding this layer
      for (int c = 0; c < in; ++c) {
        const double y = acts[li][c];
        prev[c] *= (1.0 - y * y);
      }
    }
    delta = std::move(prev);
  }
  delta.resize(traj_dim_);  // drop the time-embedding slots
  return delta;
}

size_t ScoreModel::num_parameters() const {
  size_t n = 0;
  for (size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
  return n;
}

bool ScoreModel::all_finite() const {
  for (const auto& w : weights_)
    for (double e : w)
      if (!std::isfinite(e)) return false;
  for (const auto& b : biases_)
    for (double e : b)
      if (!std::isfinite(e)) return false;
  return true;
}

json ScoreModel::to_json() const {
  return json{{"traj_dim", traj_dim_},
              {"time_embed_dim", time_embed_dim_},
              {"hidden", hidden_},
              {"weights", weights_},
              {"biases", biases_}};
}

ScoreModel ScoreModel::from_json(const json& j) {
  ScoreModel m(j.at("traj_dim").get<int>(), j.at("hidden").get<std::vector<int>>(),
               j.at("time_embed_dim").get<int>(), 0);
  m.weights_ = j.at("weights").get<std::vector<std::vector<double>>>();
  m.biases_ = j.at("biases").get<std::vector<std::vector<double>>>();
  for (size_t l = 0; l < m.weights_.size(); ++l) {
    if (m.weights_[l].size() != static_cast<size_t>(m.layer_in_[l]) * m.layer_out_[l] ||
        m.biases_[l].size() != static_cast<size_t>(m.layer_out_[l]))
      throw std::invalid_argument("checkpoint parameter shapes inconsistent");
  }
  return m;
}

void ModelCheckpoint::save(const std::filesystem::path& path) const {
  write_json_file(json{{"version", version},
                       {"schedule", schedule.to_json()},
                       {"model", model.to_json()},
                       {"num_robots", num_robots},
                       {"horizon", horizon},
                       {"map_family", map_family}},
                  path);
}

ModelCheckpoint ModelCheckpoint::load(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  ModelCheckpoint c;
  c.version = j.at("version").get<int>();
  if (c.version != 1) throw std::runtime_error("unsupported checkpoint version");
  c.schedule = NoiseSchedule::from_json(j.at("schedule"));
  c.model = ScoreModel::from_json(j.at("model"));
  c.num_robots = j.at("num_robots").get<int>();
  c.horizon = j.at("horizon").get<int>();
  c.map_family = j.at("map_family").get<std::string>();
  return c;
}

Trajectory forward_sample(const Trajectory& x0, int t, const std::vector<double>& noise,
                          const NoiseSchedule& schedule) {
  if (t < 0 || t > schedule.num_steps)
    throw std::out_of_range("forward_sample: t out of range");
  if (noise.size() != x0.positions.size() * 2)
    throw std::invalid_argument("forward_sample: noise size mismatch");
  const double bar = schedule.alpha_bar(t);
  const double a = std::sqrt(bar);
  const double b = std::sqrt(1.0 - bar);
  Trajectory out = x0;
  for (size_t k = 0; k < out.positions.size(); ++k) {
    out.positions[k].x = a * x0.positions[k].x + b * noise[2 * k];
    out.positions[k].y = a * x0.positions[k].y + b * noise[2 * k + 1];
  }
  return out;
}

double score_matching_loss(const ScoreModel& model, const std::vector<std::vector<double>>& batch,
                           const NoiseSchedule& schedule, Rng& rng,
                           ScoreModel::Gradients* grads) {
  if (batch.empty()) throw std::invalid_argument("score_matching_loss: empty batch");
  const int D = model.traj_dim();
  const size_t B = batch.size();
  double loss = 0.0;
  std::vector<double> xt(D), target(D), diff(D), dout(D);
  for (const auto& x0 : batch) {
    if (static_cast<int>(x0.size()) != D)
      throw std::invalid_argument("score_matching_loss: item size mismatch");
    const int t = rng.uniform_int(1, schedule.num_steps);
    const double bar = schedule.alpha_bar(t);
    const double sq = std::sqrt(bar);
    const double sig = std::sqrt(1.0 - bar);
    const double weight = 1.0 - schedule.alpha(t);
    for (int d = 0; d < D; ++d) {
      const double eps = rng.normal();
      xt[d] = sq * x0[d] + sig * eps;
      target[d] = -eps / sig;
    }
    if (grads) {
      // one combined forward+backward
      double item_loss = 0.0;
      const std::vector<double> s = model.forward(xt, t);
      for (int d = 0; d < D; ++d) {
        diff[d] = s[d] - target[d];
        item_loss += diff[d] * diff[d];
        dout[d] = 2.0 * weight * diff[d] / (static_cast<double>(B) * D);
      }
      loss += weight * item_loss / D;
      model.forward_backward(xt, t, dout, grads);
    } else {
      const std::vector<double> s = model.forward(xt, t);
      double item_loss = 0.0;
      for (int d = 0; d < D; ++d) {
        const double e = s[d] - target[d];
        item_loss += e * e;
      }
      loss += weight * item_loss / D;
    }
  }
  return loss / static_cast<double>(B);
}

TrainResult train(ScoreModel& model, const std::vector<Trajectory>& dataset,
                  const NoiseSchedule& schedule, const TrainConfig& config,
                  double workspace_side) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  const double center = workspace_side / 2.0;
  std::vector<std::vector<double>> flats;
  flats.reserve(dataset.size());
  for (const auto& traj : dataset) {
    std::vector<double> f = traj.flatten();
    for (auto& e : f) e -= center;
    if (static_cast<int>(f.size()) != model.traj_dim())
      throw std::invalid_argument("train: dataset trajectory dimension mismatch");
    flats.push_back(std::move(f));
  }

  Rng rng(config.seed);
  ScoreModel::Gradients m = model.zero_gradients();
  ScoreModel::Gradients v = model.zero_gradients();
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;

  TrainResult result;
  std::vector<size_t> order(flats.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    int num_batches = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<std::vector<double>> batch;
      batch.reserve(end - start);
      for (size_t k = start; k < end; ++k) batch.push_back(flats[order[k]]);

      ScoreModel::Gradients grads = model.zero_gradients();
      const double loss = score_matching_loss(model, batch, schedule, rng, &grads);
      if (!std::isfinite(loss)) {
        std::ostringstream os;
        os << "train: non-finite loss at epoch " << epoch << " batch " << num_batches;
        throw std::runtime_error(os.str());
      }
      epoch_loss += loss;
      ++num_batches;

      ++step;
      const double bc1 = 1.0 - std::pow(beta1, step);
      const double bc2 = 1.0 - std::pow(beta2, step);
      for (size_t l = 0; l < model.weights().size(); ++l) {
        auto update = [&](std::vector<double>& params, const std::vector<double>& g,
                          std::vector<double>& mm, std::vector<double>& vv) {
          for (size_t k = 0; k < params.size(); ++k) {
            mm[k] = beta1 * mm[k] + (1.0 - beta1) * g[k];
            vv[k] = beta2 * vv[k] + (1.0 - beta2) * g[k] * g[k];
            params[k] -= config.lr * (mm[k] / bc1) / (std::sqrt(vv[k] / bc2) + eps);
          }
        };
        update(model.weights()[l], grads.weights[l], m.weights[l], v.weights[l]);
        update(model.biases()[l], grads.biases[l], m.biases[l], v.biases[l]);
      }
    }
    result.epoch_losses.push_back(epoch_loss / std::max(1, num_batches));
  }
  return result;
}

Trajectory sgld_step(const Trajectory& x, int t, const ScoreModel& model, double gamma,
                     const std::vector<double>& noise, double workspace_side) {
  if (gamma < 0.0) throw std::invalid_argument("sgld_step: gamma must be >= 0");
  if (noise.size() != x.positions.size() * 2)
    throw std::invalid_argument("sgld_step: noise size mismatch");
  const double center = workspace_side / 2.0;
  std::vector<double> flat = x.flatten();
  for (auto& e : flat) e -= center;
  const std::vector<double> score = model.forward(flat, t);
  const double noise_scale = std::sqrt(2.0 * gamma);
  for (size_t d = 0; d < flat.size(); ++d)
    flat[d] += gamma * score[d] + noise_scale * noise[d];
  for (auto& e : flat) e += center;
  return Trajectory::unflatten(flat, x.num_robots, x.horizon);
}

SampleResult sample(const ProblemInstance& instance, const ScoreModel& model,
                    const NoiseSchedule& schedule, const SamplerConfig& config) {
  const int n = instance.num_robots();
  const int H = instance.horizon;
  const int D = n * H * 2;
  if (model.traj_dim() != D)
    throw std::invalid_argument("sample: model trained for a different (N_a, H)");
  if (config.inner_iters < 1) throw std::invalid_argument("sample: inner_iters must be >= 1");

  const double center = instance.workspace_side / 2.0;
  Rng rng(config.seed);
  std::vector<double> x = rng.normal_vector(D);  // centered coordinates

  SampleResult result;
  Trajectory projected(n, H);
  bool have_projection = false;

  for (int t = schedule.num_steps; t >= 1; --t) {
    const double gamma = config.gamma0 * (1.0 - schedule.alpha_bar(t));
    for (int i = 1; i <= config.inner_iters; ++i) {
      const std::vector<double> z = rng.normal_vector(D);
      const std::vector<double> score = model.forward(x, t);
      const double noise_scale = std::sqrt(2.0 * gamma);
      for (int d = 0; d < D; ++d) x[d] += gamma * score[d] + noise_scale * z[d];

      if (config.projection_enabled) {
        std::vector<double> world = x;
        for (auto& e : world) e += center;
        Trajectory traj = Trajectory::unflatten(world, n, H);
        ProjectionConfig pc = config.projection;
        if (t > 1) {
          pc.delta_a = std::max(pc.delta_a, config.relaxed_delta);
          pc.delta_o = std::max(pc.delta_o, config.relaxed_delta);
        }
        const ProjectionResult pr = project_alm(traj, instance, pc);
        projected = pr.trajectory;
        have_projection = true;
        result.diagnostics.push_back({t, i, pr.ha_inf, pr.ho_inf, pr.converged});
        result.final_projection_converged = pr.converged;
        std::vector<double> flat = pr.trajectory.flatten();
        for (auto& e : flat) e -= center;
        x = std::move(flat);
      }
    }
  }

  if (config.projection_enabled && have_projection) {
    result.trajectory = projected;
  } else {
    std::vector<double> world = x;
    for (auto& e : world) e += center;
    result.trajectory = Trajectory::unflatten(world, n, H);
    result.final_projection_converged = false;
  }
  return result;
}

std::vector<Trajectory> bootstrap_dataset(const ProblemInstance& instance, int count,
                                          uint64_t seed, const ProjectionConfig& projection,
                                          BootstrapStats* stats) {
  if (count < 1) throw std::invalid_argument("bootstrap_dataset: count must be >= 1");
  std::vector<Trajectory> kept;
  Rng rng(seed);
  const int H = instance.horizon;
  const int n = instance.num_robots();
  const Trajectory base = straight_line_trajectory(instance);
  const int max_attempts = std::max(4 * count, count + 8);
  int attempts = 0;

  while (static_cast<int>(kept.size()) < count && attempts < max_attempts) {
    ++attempts;
    Trajectory traj = base;
    for (int i = 0; i < n; ++i) {
      double ax[3], ay[3];
      for (int k = 0; k < 3; ++k) {
        ax[k] = rng.normal() * 0.15 / (k + 1);
        ay[k] = rng.normal() * 0.15 / (k + 1);
      }
      for (int h = 1; h < H - 1; ++h) {
        const double phase = M_PI * h / (H - 1);
        double dx = 0.0, dy = 0.0;
        for (int k = 0; k < 3; ++k) {
          dx += ax[k] * std::sin((k + 1) * phase);
          dy += ay[k] * std::sin((k + 1) * phase);
        }
        traj.at(i, h) += {dx, dy};
      }
    }
    const ProjectionResult pr = project_alm(traj, instance, projection);
    if (!pr.converged) continue;
    if (!is_feasible(pr.trajectory, instance,
                     std::max(projection.delta_a, projection.delta_o))
             .feasible)
      continue;
    kept.push_back(pr.trajectory);
  }

  if (stats) {
    stats->requested = count;
    stats->produced = static_cast<int>(kept.size());
    stats->attempts = attempts;
    stats->low_yield = static_cast<int>(kept.size()) * 2 < count;
  }
  return kept;
}

}  // namespace mrplan
