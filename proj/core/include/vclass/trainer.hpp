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

#ifndef VCLASS_TRAINER_HPP_
#define VCLASS_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vclass/datagen.hpp"
#include "vclass/model.hpp"
#include "vclass/objectives.hpp"

namespace vc {

struct TrainConfig {
  Objective objective = Objective::vc;
  double beta = 1.0;
  std::size_t epochs = 30;
  std::size_t batch_size = 64;

  double lr_theta = 0.05;  // class priors
  double lr_phi = 0.05;    // encoder
  double lr_pi = 0.05;     // label prior
  double lr_psi = 0.1;     // discriminators
  std::size_t lr_decay_every = 20;  // epochs; 0 disables
  double lr_decay_factor = 0.5;

  double momentum = 0.0;  // 0.9 for heavy-ball SGD
  double weight_decay = 1e-4;  // encoder weights only
  double grad_clip = 10.0;     // per parameter group; 0 disables
  // Epochs without validation improvement before stopping. 0 disables early
  // stopping: every epoch runs and the final parameters are returned.
  std::size_t early_stop_patience = 10;

  std::uint64_t seed = 1;
  std::size_t latent_dim = 8;
  std::vector<std::size_t> hidden_dims{256, 128};
  Activation activation = Activation::relu;

  // Throws ContractError naming the offending field.
  void validate() const;
  // Learning-rate multiplier in effect during the given epoch.
  double lr_multiplier(std::size_t epoch) const;
};

// Resolved configuration as `key = value` lines.
std::string format_config(const TrainConfig& config);

struct TrainState {
  TrainConfig config;
  VcModel model;
  std::uint64_t step = 0;
  std::size_t epoch = 0;
  Rng rng;
  // Momentum buffers, one per entry of model.parameters().
  std::vector<std::vector<double>> velocity;

  // Model sized for the dataset; rng seeded from config.seed.
  static TrainState init(const TrainConfig& config, std::size_t input_dim, std::size_t classes);
  static TrainState init(const TrainConfig& config, VcModel model);
};

// One simultaneous ascent step on every parameter group: gradients for
// encoder, priors and label prior (plus discriminators for vc) are all taken
// at the pre-step parameters, then applied. Throws NumericalError naming the
// group and objective term when a gradient is not finite.
LossBreakdown train_step(TrainState& state, const Batch& batch);

struct EpochMetrics {
  std::size_t epoch = 0;
  Split split = Split::train;
  Objective objective = Objective::vc;
  LossBreakdown parts;
  double accuracy = 0.0;
};

struct TrainResult {
  VcModel model;  // best-validation snapshot
  std::vector<EpochMetrics> history;
  std::size_t best_epoch = 0;
  double best_validation_loss = std::numeric_limits<double>::infinity();
  std::uint64_t steps = 0;
};

struct TrainHooks {
  // Written whenever a new best snapshot is taken.
  std::optional<std::filesystem::path> checkpoint_path;
  std::function<void(const EpochMetrics&)> on_epoch;
};

// Trains on the train split with seeded shuffling. The validation loss is the
// negative log-likelihood -log p(y|x) on the validation rows (train rows when
// there are none); the lowest-loss snapshot is returned unless early stopping
// is disabled.
TrainResult train(const TrainConfig& config, const Dataset& ds, const TrainHooks& hooks = {});

// Breakdown and accuracy of a model on every row of ds.
EpochMetrics evaluate_split(const VcModel& model, const Dataset& ds, Objective objective,
                            double beta);

// Header plus one row per entry:
// epoch,split,objective,total,ce_term,prior_term,ratio_term,label_term,accuracy
std::string metrics_csv(const std::vector<EpochMetrics>& history);
void write_metrics_csv(const std::vector<EpochMetrics>& history, const std::filesystem::path& path);

}  // namespace vc

#endif  // VCLASS_TRAINER_HPP_
