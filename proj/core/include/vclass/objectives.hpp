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

// Training objectives. All objectives are maximised; the trainer performs
// gradient ascent.
//
//   J_CE = mean[ log p(y|z) + log p(y) ]
//   J_GM = J_CE + mean[ log p(z|y) ]
//   J_VC = J_CE - beta * mean[ T_y(z) ]      (T_y ~ log q(z|y) / p(z|y))
//
// Each objective also yields a differentiable surrogate whose gradients are
// the update rules used in training:
//
//   encoder:      d/dphi   [ log p(y|z) - beta T_y(z) ]           (VC)
//   priors:       d/dtheta [ log p(y|z) + beta log p(z|y) ]       (VC)
//   label prior:  d/dpi    [ log p(y) ]
//
// The label prior enters the Bayes posterior as a constant, and for VC the
// prior log-density sees the latents as constants. Both constants can be
// pinned through SurrogateAnchors so the surrogate is an ordinary function
// of the parameters (used by finite-difference checks).

#ifndef VCLASS_OBJECTIVES_HPP_
#define VCLASS_OBJECTIVES_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vclass/autodiff.hpp"
#include "vclass/datagen.hpp"
#include "vclass/model.hpp"

namespace vc {

enum class Objective { ce, gm, vc };

std::string_view to_string(Objective o);
// Throws ContractError on an unknown name.
Objective parse_objective(std::string_view name);

struct Batch {
  ad::Tensor xs;  // [m x input_dim]
  std::vector<std::size_t> ys;

  std::size_t size() const { return ys.size(); }
};

Batch make_batch(const Dataset& ds, std::span<const std::size_t> rows);
Batch full_batch(const Dataset& ds);

// Per-batch means of the objective's parts.
struct LossBreakdown {
  double total = 0.0;
  double ce_term = 0.0;     // log p(y|z)
  double prior_term = 0.0;  // log p(z|y)
  double ratio_term = 0.0;  // T_y(z)
  double label_term = 0.0;  // log p(y)
};

// Recomputes total from the parts for the given objective.
double combine(const LossBreakdown& parts, Objective objective, double beta);

struct SurrogateAnchors {
  ad::Tensor latents;      // [m x d], stands in for the constant copy of z
  ad::Tensor label_logits;  // [K], stands in for the constant label prior
};

struct ObjectiveValue {
  LossBreakdown parts;
  ad::Tensor surrogate;  // scalar; ascend its gradient
};

ObjectiveValue evaluate_objective(const VcModel& model, const Batch& batch, Objective objective,
                                  double beta = 1.0,
                                  const std::optional<SurrogateAnchors>& anchors = std::nullopt);

ObjectiveValue j_ce(const VcModel& model, const Batch& batch);
ObjectiveValue j_gm(const VcModel& model, const Batch& batch);
ObjectiveValue j_vc(const VcModel& model, const Batch& batch, double beta = 1.0);

// Auxiliary discriminator objective:
//   mean[ log sigma(T_y(z)) + log(1 - sigma(T_y(z'))) ]
// with z = f(x) and one prior sample z' ~ p(z|y) per row. Latent samples are
// constants, so only the discriminators receive gradient.
struct AuxValue {
  double value = 0.0;
  ad::Tensor surrogate;
};
AuxValue aux_loss(const VcModel& model, const Batch& batch, Rng& rng);

// Same objective on explicit q- and p-samples sharing one label vector.
AuxValue aux_loss_on_samples(const DiscriminatorBank& disc, const ad::Tensor& q_latents,
                             const ad::Tensor& p_latents, std::span<const std::size_t> labels);

// Estimates of the four divergences whose sum the VC objective minimises.
// The first two need the true p(y|x) and are only reported for synthetic
// data carrying its generative model.
struct KlTerms {
  std::optional<double> label_kl_given_x;   // E_x KL(p(y|x) || p(y|x; model))
  std::optional<double> posterior_gap;      // E KL(q(z|x) || p(z|x,y)); 0 for delta q
  double latent_kl = 0.0;                   // E_y KL(q(z|y) || p(z|y)), Gaussian fit
  double label_prior_kl = 0.0;              // KL(p(y) || p_pi(y))
};
KlTerms kl_form_decomposition(const VcModel& model, const Dataset& ds);

}  // namespace vc

#endif  // VCLASS_OBJECTIVES_HPP_
