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

#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "vclass/errors.hpp"
#include "vclass/eval.hpp"
#include "vclass/trainer.hpp"

namespace vc {
namespace {

using ad::Tensor;

// Two well separated Gaussian blobs observed directly in 2-d.
Dataset two_blobs(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.classes = 2;
  spec.latent_dim = 2;
  spec.means = {-3, 0, 3, 0};
  spec.variances = {0.5, 0.5, 0.5, 0.5};
  spec.rotate = false;
  spec.tanh_strength = 0.0;
  spec.ambient_dim = 2;
  spec.identity_lift = true;
  spec.n_train = 400;
  spec.n_validation = 100;
  spec.n_test = 200;
  Rng rng(seed);
  return gen_hierarchical(spec, rng);
}

TrainConfig small_config(Objective o) {
  TrainConfig c;
  c.objective = o;
  c.epochs = 5;
  c.batch_size = 32;
  c.latent_dim = 2;
  c.hidden_dims = {16};
  return c;
}

std::vector<std::vector<double>> snapshot(const VcModel& m) {
  std::vector<std::vector<double>> out;
  for (const Tensor& p : m.parameters()) out.emplace_back(p.values().begin(), p.values().end());
  return out;
}

TEST(TrainConfig, ValidationAndSchedule) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.lr_multiplier(0), 1.0);
  EXPECT_EQ(c.lr_multiplier(19), 1.0);
  EXPECT_EQ(c.lr_multiplier(20), 0.5);
  EXPECT_EQ(c.lr_multiplier(45), 0.25);
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ContractError);
  c = TrainConfig{};
  c.beta = -1;
  EXPECT_THROW(c.validate(), ContractError);
}

TEST(TrainStep, ZeroLearningRatesLeaveParametersUnchanged) {
  const Dataset ds = two_blobs(1);
  TrainConfig c = small_config(Objective::vc);
  c.lr_theta = c.lr_phi = c.lr_pi = c.lr_psi = 0.0;
  c.weight_decay = 0.0;
  TrainState st = TrainState::init(c, 2, 2);
  const auto before = snapshot(st.model);
  const auto rows = ds.indices(Split::train);
  train_step(st, make_batch(ds, std::span(rows).first(16)));
  EXPECT_EQ(snapshot(st.model), before);
}

TEST(TrainStep, SingleStepReducesNegativeLogLikelihood) {
  const Dataset ds = two_blobs(2);
  TrainConfig c = small_config(Objective::ce);
  c.lr_theta = c.lr_phi = c.lr_pi = 1e-3;
  TrainState st = TrainState::init(c, 2, 2);
  const std::vector<std::size_t> row{ds.indices(Split::train).front()};
  const Batch b = make_batch(ds, row);
  const double before = j_ce(st.model, b).parts.ce_term;
  train_step(st, b);
  EXPECT_GT(j_ce(st.model, b).parts.ce_term, before);
}

TEST(TrainStep, DeterministicAfterHundredSteps) {
  const Dataset ds = two_blobs(3);
  const auto rows = ds.indices(Split::train);
  auto run = [&] {
    TrainState st = TrainState::init(small_config(Objective::vc), 2, 2);
    for (std::size_t s = 0; s < 100; ++s) {
      const std::size_t start = (s * 16) % (rows.size() - 16);
      train_step(st, make_batch(ds, std::span(rows).subspan(start, 16)));
    }
    return snapshot(st.model);
  };
  EXPECT_EQ(run(), run());
}

TEST(TrainStep, NonFiniteGradientThrowsNumericalError) {
  const Dataset ds = two_blobs(4);
  TrainState st = TrainState::init(small_config(Objective::ce), 2, 2);
  st.model.encoder.weights()[0].node()->value[0] = std::numeric_limits<double>::quiet_NaN();
  const auto rows = ds.indices(Split::train);
  EXPECT_THROW(train_step(st, make_batch(ds, std::span(rows).first(8))), NumericalError);
}

TEST(Train, SeparableBlobsReachFullAccuracy) {
  const Dataset ds = two_blobs(5);
  for (Objective o : {Objective::ce, Objective::vc}) {
    TrainConfig c = small_config(o);
    c.epochs = 50;
    c.early_stop_patience = 0;
    const TrainResult r = train(c, ds);
    EXPECT_EQ(accuracy(r.model, ds.split(Split::train)), 1.0) << to_string(o);
    if (o == Objective::vc) {
      // Per-class latent variance within a factor of two of the prior's.
      const auto reports = latent_diagnostics(r.model, ds.split(Split::train));
      for (const auto& rep : reports) {
        EXPECT_GT(rep.trace_ratio, 0.5) << "class " << rep.label;
        EXPECT_LT(rep.trace_ratio, 2.0) << "class " << rep.label;
      }
    }
  }
}

TEST(Train, ZeroEpochsReturnsInitialModel) {
  const Dataset ds = two_blobs(6);
  TrainConfig c = small_config(Objective::gm);
  c.epochs = 0;
  const TrainResult r = train(c, ds);
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(r.steps, 0u);
  EXPECT_EQ(snapshot(r.model), snapshot(TrainState::init(c, 2, 2).model));
}

TEST(Train, MetricsCsvIsDeterministic) {
  const Dataset ds = two_blobs(7);
  const TrainConfig c = small_config(Objective::vc);
  const std::string a = metrics_csv(train(c, ds).history);
  const std::string b = metrics_csv(train(c, ds).history);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), "epoch,split,objective,total,ce_term,prior_term,ratio_term,label_term,accuracy");
}

TEST(Train, EarlyStoppingKeepsBestValidationSnapshot) {
  const Dataset ds = two_blobs(8);
  TrainConfig c = small_config(Objective::ce);
  c.epochs = 12;
  c.early_stop_patience = 2;
  const TrainResult r = train(c, ds);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : r.history) {
    if (m.split == Split::validation) best = std::min(best, -m.parts.ce_term);
  }
  EXPECT_DOUBLE_EQ(r.best_validation_loss, best);
  const auto again = evaluate_split(r.model, ds.split(Split::validation), Objective::ce, 1.0);
  EXPECT_DOUBLE_EQ(-again.parts.ce_term, best);
}

}  // namespace
}  // namespace vc
