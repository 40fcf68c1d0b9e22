/* Copyright 2026 The vclass Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "vclass/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "vclass/checkpoint.hpp"
#include "vclass/errors.hpp"

namespace vc {
namespace {

enum Group { kEncoder, kPriors, kLabelPrior, kDiscriminators, kNumGroups };

constexpr const char* kGroupNames[] = {"encoder", "class priors", "label prior", "discriminators"};

struct ParamSlot {
  ad::Tensor tensor;
  Group group;
  bool decays;
};

std::vector<ParamSlot> slots(const VcModel& model) {
  std::vector<ParamSlot> out;
  const auto& w = model.encoder.weights();
  const auto& b = model.encoder.biases();
  for (std::size_t l = 0; l < w.size(); ++l) {
    out.push_back({w[l], kEncoder, true});
    out.push_back({b[l], kEncoder, false});
  }
  out.push_back({model.priors.means(), kPriors, false});
  out.push_back({model.priors.log_vars(), kPriors, false});
  out.push_back({model.label_prior.logits(), kLabelPrior, false});
  out.push_back({model.discriminators.weights(), kDiscriminators, false});
  out.push_back({model.discriminators.biases(), kDiscriminators, false});
  return out;
}

std::string describe(const LossBreakdown& p) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "total=%g ce_term=%g prior_term=%g ratio_term=%g label_term=%g",
                p.total, p.ce_term, p.prior_term, p.ratio_term, p.label_term);
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ContractError(std::string("invalid training config: ") + what);
  };
  require(beta >= 0.0 && std::isfinite(beta), "beta must be a finite non-negative number");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(lr_theta >= 0.0 && lr_phi >= 0.0 && lr_pi >= 0.0 && lr_psi >= 0.0,
          "learning rates must be non-negative");
  require(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0, "lr_decay_factor must be in (0, 1]");
  require(momentum >= 0.0 && momentum < 1.0, "momentum must be in [0, 1)");
  require(weight_decay >= 0.0, "weight_decay must be non-negative");
  require(grad_clip >= 0.0, "grad_clip must be non-negative");
  require(latent_dim >= 1, "latent_dim must be at least 1");
}

double TrainConfig::lr_multiplier(std::size_t epoch_index) const {
  if (lr_decay_every == 0) return 1.0;
  return std::pow(lr_decay_factor, static_cast<double>(epoch_index / lr_decay_every));
}

std::string format_config(const TrainConfig& c) {
  std::ostringstream os;
  std::string hidden;
  for (std::size_t i = 0; i < c.hidden_dims.size(); ++i) {
    hidden += (i ? "," : "") + std::to_string(c.hidden_dims[i]);
  }
  os << "objective = " << to_string(c.objective) << "\n"
     << "beta = " << format_double(c.beta) << "\n"
     << "epochs = " << c.epochs << "\n"
     << "batch_size = " << c.batch_size << "\n"
     << "lr_theta = " << format_double(c.lr_theta) << "\n"
     << "lr_phi = " << format_double(c.lr_phi) << "\n"
     << "lr_pi = " << format_double(c.lr_pi) << "\n"
     << "lr_psi = " << format_double(c.lr_psi) << "\n"
     << "lr_decay_every = " << c.lr_decay_every << "\n"
     << "lr_decay_factor = " << format_double(c.lr_decay_factor) << "\n"
     << "momentum = " << format_double(c.momentum) << "\n"
     << "weight_decay = " << format_double(c.weight_decay) << "\n"
     << "grad_clip = " << format_double(c.grad_clip) << "\n"
     << "early_stop_patience = " << c.early_stop_patience << "\n"
     << "seed = " << c.seed << "\n"
     << "latent_dim = " << c.latent_dim << "\n"
     << "hidden_dims = " << hidden << "\n"
     << "activation = " << to_string(c.activation) << "\n";
  return os.str();
}

TrainState TrainState::init(const TrainConfig& config, std::size_t input_dim, std::size_t classes) {
  config.validate();
  Rng rng(config.seed);
  ModelConfig mc;
  mc.input_dim = input_dim;
  mc.hidden_dims = config.hidden_dims;
  mc.latent_dim = config.latent_dim;
  mc.classes = classes;
  mc.activation = config.activation;
  VcModel model = VcModel::create(mc, rng);
  TrainState state = init(config, std::move(model));
  state.rng = rng;
  return state;
}

TrainState TrainState::init(const TrainConfig& config, VcModel model) {
  config.validate();
  TrainState state;
  state.config = config;
  state.model = std::move(model);
  state.rng = Rng(config.seed);
  for (const auto& p : state.model.parameters()) state.velocity.emplace_back(p.size(), 0.0);
  return state;
}

LossBreakdown train_step(TrainState& state, const Batch& batch) {
  const TrainConfig& cfg = state.config;
  auto params = slots(state.model);
  for (auto& s : params) s.tensor.zero_grad();

  const ObjectiveValue obj = evaluate_objective(state.model, batch, cfg.objective, cfg.beta);
  ad::backward(obj.surrogate);
  if (cfg.objective == Objective::vc) {
    // Same pre-step parameters: the encoder and priors are not updated yet.
    const AuxValue aux = aux_loss(state.model, batch, state.rng);
    ad::backward(aux.surrogate);
  }

  // Collect gradients, check them, and measure per-group norms.
  std::vector<std::vector<double>> grads(params.size());
  double sq_norm[kNumGroups] = {};
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& t = params[i].tensor;
    grads[i].assign(t.size(), 0.0);
    if (t.has_grad()) std::copy(t.grad().begin(), t.grad().end(), grads[i].begin());
    for (double g : grads[i]) {
      if (!std::isfinite(g)) {
        throw NumericalError(std::string("non-finite gradient for ") + kGroupNames[params[i].group] +
                             " at step " + std::to_string(state.step) + " (objective " +
                             std::string(to_string(cfg.objective)) + ": " + describe(obj.parts) +
                             ")");
      }
      sq_norm[params[i].group] += g * g;
    }
  }

  const double mult = cfg.lr_multiplier(state.epoch);
  const double lr[kNumGroups] = {cfg.lr_phi * mult, cfg.lr_theta * mult, cfg.lr_pi * mult,
                                 cfg.lr_psi * mult};
  double clip_scale[kNumGroups];
  for (int g = 0; g < kNumGroups; ++g) {
    const double norm = std::sqrt(sq_norm[g]);
    clip_scale[g] = cfg.grad_clip > 0.0 && norm > cfg.grad_clip ? cfg.grad_clip / norm : 1.0;
  }

  for (std::size_t i = 0; i < params.size(); ++i) {
    const Group group = params[i].group;
    if (group == kDiscriminators && cfg.objective != Objective::vc) continue;
    auto values = params[i].tensor.mutable_values();
    auto& vel = state.velocity[i];
    for (std::size_t j = 0; j < values.size(); ++j) {
      double g = grads[i][j] * clip_scale[group];
      if (params[i].decays) g -= cfg.weight_decay * values[j];
      vel[j] = cfg.momentum * vel[j] + g;
      values[j] += lr[group] * vel[j];
    }
  }
  for (auto& s : params) s.tensor.zero_grad();
  ++state.step;
  return obj.parts;
}

EpochMetrics evaluate_split(const VcModel& model, const Dataset& ds, Objective objective,
                            double beta) {
  EpochMetrics m;
  m.objective = objective;
  if (ds.size() == 0) return m;
  constexpr std::size_t kChunk = 1024;
  std::size_t correct = 0;
  const std::size_t k = model.classes();
  for (std::size_t start = 0; start < ds.size(); start += kChunk) {
    const std::size_t stop = std::min(ds.size(), start + kChunk);
    std::vector<std::size_t> rows(stop - start);
    std::iota(rows.begin(), rows.end(), start);
    const Batch b = make_batch(ds, rows);
    const ObjectiveValue v = evaluate_objective(model, b, objective, beta);
    const double w = static_cast<double>(rows.size()) / static_cast<double>(ds.size());
    m.parts.ce_term += w * v.parts.ce_term;
    m.parts.prior_term += w * v.parts.prior_term;
    m.parts.ratio_term += w * v.parts.ratio_term;
    m.parts.label_term += w * v.parts.label_term;

    const ad::Tensor joint = model.log_joint(b.xs.detach());
    const auto vals = joint.values();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto row = vals.subspan(i * k, k);
      const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
      if (best == b.ys[i]) ++correct;
    }
  }
  m.parts.total = combine(m.parts, objective, beta);
  m.accuracy = static_cast<double>(correct) / static_cast<double>(ds.size());
  return m;
}

TrainResult train(const TrainConfig& config, const Dataset& ds, const TrainHooks& hooks) {
  config.validate();
  ds.validate();
  const Dataset train_set = ds.split(Split::train);
  if (train_set.size() == 0) throw ContractError("train: dataset has no training rows");
  const Dataset val_set = ds.split(Split::validation);

  TrainState state = TrainState::init(config, ds.num_features, ds.num_classes);
  TrainResult result;
  result.model = state.model.clone();
  std::size_t since_best = 0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    state.epoch = epoch;
    std::shuffle(order.begin(), order.end(), state.rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const Batch batch =
          make_batch(train_set, std::span<const std::size_t>(order).subspan(start, stop - start));
      train_step(state, batch);
    }

    EpochMetrics tr = evaluate_split(state.model, train_set, config.objective, config.beta);
    tr.epoch = epoch + 1;
    tr.split = Split::train;
    result.history.push_back(tr);
    if (hooks.on_epoch) hooks.on_epoch(tr);
    EpochMetrics sel = tr;
    if (val_set.size() > 0) {
      sel = evaluate_split(state.model, val_set, config.objective, config.beta);
      sel.epoch = epoch + 1;
      sel.split = Split::validation;
      result.history.push_back(sel);
      if (hooks.on_epoch) hooks.on_epoch(sel);
    }

    const double loss = -sel.parts.ce_term;
    if (!std::isfinite(loss)) {
      throw NumericalError("non-finite selection loss after epoch " + std::to_string(epoch + 1) +
                           " (" + describe(sel.parts) + ")");
    }
    if (config.early_stop_patience == 0) {
      // Fixed-epoch run: the final parameters are the result.
      result.best_validation_loss = loss;
      result.best_epoch = epoch + 1;
      continue;
    }
    if (loss < result.best_validation_loss) {
      result.best_validation_loss = loss;
      result.best_epoch = epoch + 1;
      result.model = state.model.clone();
      since_best = 0;
      if (hooks.checkpoint_path) save_checkpoint(result.model, *hooks.checkpoint_path);
    } else if (++since_best >= config.early_stop_patience) {
      break;
    }
  }
  if (config.early_stop_patience == 0) {
    result.model = state.model.clone();
    if (hooks.checkpoint_path) save_checkpoint(result.model, *hooks.checkpoint_path);
  }
  result.steps = state.step;
  return result;
}

std::string metrics_csv(const std::vector<EpochMetrics>& history) {
  std::string out = "epoch,split,objective,total,ce_term,prior_term,ratio_term,label_term,accuracy\n";
  char buf[512];
  for (const auto& m : history) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", m.epoch,
                  std::string(to_string(m.split)).c_str(), std::string(to_string(m.objective)).c_str(),
                  m.parts.total, m.parts.ce_term, m.parts.prior_term, m.parts.ratio_term,
                  m.parts.label_term, m.accuracy);
    out += buf;
  }
  return out;
}

void write_metrics_csv(const std::vector<EpochMetrics>& history, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << metrics_csv(history);
}

}  // namespace vc
