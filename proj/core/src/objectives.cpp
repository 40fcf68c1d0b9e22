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

#include "vclass/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vclass/errors.hpp"
#include "vclass/eval.hpp"

namespace vc {
namespace {

double mean_of(const ad::Tensor& t) {
  const auto v = t.values();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_batch(const VcModel& model, const Batch& batch) {
  if (batch.size() == 0) throw ContractError("empty batch");
  if (batch.xs.rank() != 2 || batch.xs.dim(0) != batch.size()) {
    throw DimensionError("batch features must be [m x input_dim] with m labels");
  }
  for (std::size_t y : batch.ys) {
    if (y >= model.classes()) throw DimensionError("batch label " + std::to_string(y) + " out of range");
  }
}

}  // namespace

std::string_view to_string(Objective o) {
  switch (o) {
    case Objective::ce: return "ce";
    case Objective::gm: return "gm";
    case Objective::vc: return "vc";
  }
  return "?";
}

Objective parse_objective(std::string_view name) {
  if (name == "ce") return Objective::ce;
  if (name == "gm") return Objective::gm;
  if (name == "vc") return Objective::vc;
  throw ContractError("unknown objective '" + std::string(name) + "' (expected ce, gm or vc)");
}

Batch make_batch(const Dataset& ds, std::span<const std::size_t> rows) {
  Batch b;
  b.xs = ds.features(rows);
  b.ys.reserve(rows.size());
  for (std::size_t r : rows) b.ys.push_back(ds.ys.at(r));
  return b;
}

Batch full_batch(const Dataset& ds) {
  std::vector<std::size_t> rows(ds.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return make_batch(ds, rows);
}

double combine(const LossBreakdown& p, Objective objective, double beta) {
  switch (objective) {
    case Objective::ce: return p.ce_term + p.label_term;
    case Objective::gm: return p.ce_term + p.prior_term + p.label_term;
    case Objective::vc: return p.ce_term - beta * p.ratio_term + p.label_term;
  }
  return 0.0;
}

ObjectiveValue evaluate_objective(const VcModel& model, const Batch& batch, Objective objective,
                                  double beta, const std::optional<SurrogateAnchors>& anchors) {
  check_batch(model, batch);
  if (!(beta >= 0.0)) throw ContractError("beta must be non-negative");

  const ad::Tensor z = model.encoder.encode(batch.xs);
  const ad::Tensor frozen_logits =
      anchors && anchors->label_logits.defined() ? anchors->label_logits
                                                 : model.label_prior.logits().detach();
  const ad::Tensor ce = ad::pick(
      class_log_posterior(model.priors, ad::log_softmax(frozen_logits), z), batch.ys);
  const ad::Tensor label = ad::gather_rows(model.label_prior.log_probs(), batch.ys);
  const ad::Tensor prior = model.priors.log_pdf_labeled(z, batch.ys);
  const DiscriminatorBank frozen_disc(model.discriminators.weights().detach(),
                                      model.discriminators.biases().detach());
  const ad::Tensor ratio = frozen_disc.discriminate(z, batch.ys);

  ObjectiveValue out;
  out.parts.ce_term = mean_of(ce);
  out.parts.prior_term = mean_of(prior);
  out.parts.ratio_term = mean_of(ratio);
  out.parts.label_term = mean_of(label);
  out.parts.total = combine(out.parts, objective, beta);

  switch (objective) {
    case Objective::ce:
      out.surrogate = ad::mean(ce + label);
      break;
    case Objective::gm:
      out.surrogate = ad::mean(ce + prior + label);
      break;
    case Objective::vc: {
      const ad::Tensor z_const =
          anchors && anchors->latents.defined() ? anchors->latents : z.detach();
      const ad::Tensor prior_theta = model.priors.log_pdf_labeled(z_const, batch.ys);
      out.surrogate = ad::mean(ce + ad::scale(prior_theta, beta) - ad::scale(ratio, beta) + label);
      break;
    }
  }
  return out;
}

ObjectiveValue j_ce(const VcModel& model, const Batch& batch) {
  return evaluate_objective(model, batch, Objective::ce);
}

ObjectiveValue j_gm(const VcModel& model, const Batch& batch) {
  return evaluate_objective(model, batch, Objective::gm);
}

ObjectiveValue j_vc(const VcModel& model, const Batch& batch, double beta) {
  return evaluate_objective(model, batch, Objective::vc, beta);
}

AuxValue aux_loss_on_samples(const DiscriminatorBank& disc, const ad::Tensor& q_latents,
                             const ad::Tensor& p_latents, std::span<const std::size_t> labels) {
  if (q_latents.shape() != p_latents.shape()) {
    throw DimensionError("aux_loss: q and p samples differ in shape");
  }
  if (labels.empty()) throw ContractError("aux_loss: empty batch");
  const ad::Tensor t_q = disc.discriminate(q_latents, labels);
  const ad::Tensor t_p = disc.discriminate(p_latents, labels);
  AuxValue out;
  out.surrogate = ad::mean(ad::log_sigmoid(t_q) + ad::log_sigmoid(-t_p));
  out.value = out.surrogate.item();
  return out;
}

AuxValue aux_loss(const VcModel& model, const Batch& batch, Rng& rng) {
  check_batch(model, batch);
  const ad::Tensor q = model.encoder.encode(batch.xs.detach()).detach();
  const ad::Tensor p = model.priors.rsample_labeled(batch.ys, rng).detach();
  return aux_loss_on_samples(model.discriminators, q, p, batch.ys);
}

KlTerms kl_form_decomposition(const VcModel& model, const Dataset& ds) {
  if (ds.size() == 0) throw ContractError("kl_form_decomposition: empty dataset");
  if (ds.num_classes != model.classes()) {
    throw DimensionError("kl_form_decomposition: dataset and model disagree on class count");
  }
  KlTerms out;
  const double n = static_cast<double>(ds.size());
  const auto counts = ds.class_counts();

  const auto pi = model.label_prior.probs();
  for (std::size_t y = 0; y < counts.size(); ++y) {
    if (counts[y] == 0) continue;
    const double p = static_cast<double>(counts[y]) / n;
    out.label_prior_kl += p * (std::log(p) - std::log(pi[y]));
  }

  for (const auto& r : latent_diagnostics(model, ds)) {
    out.latent_kl += static_cast<double>(r.count) / n * r.kl_to_prior;
  }

  if (ds.true_model && !ds.true_z.empty()) {
    const std::size_t k = model.classes();
    const std::size_t dz = ds.true_model->dim;
    const auto probs = softmax_rows(dataset_logits(model, ds), k);
    double kl = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto truth =
          ds.true_model->posterior(std::span<const double>(ds.true_z).subspan(i * dz, dz));
      for (std::size_t y = 0; y < k; ++y) {
        if (truth[y] <= 0.0) continue;
        kl += truth[y] * (std::log(truth[y]) - std::log(std::max(probs[i * k + y], 1e-300)));
      }
    }
    out.label_kl_given_x = kl / n;
    // The encoder is deterministic and z = h^-1(x) carries all of x, so the
    // posterior over z given (x, y) is the same point mass as q(z|x).
    out.posterior_gap = 0.0;
  }
  return out;
}

}  // namespace vc
