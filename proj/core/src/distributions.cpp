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

#include "vclass/distributions.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "vclass/errors.hpp"

namespace vc {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// Repeats a [d] vector as the rows of an [m x d] matrix.
ad::Tensor tile_rows(const ad::Tensor& v, std::size_t m) {
  const std::vector<std::size_t> zeros(m, 0);
  return ad::gather_rows(ad::reshape(v, {1, v.size()}), zeros);
}

ad::Tensor as_batch(const ad::Tensor& z) {
  return z.rank() == 1 ? ad::reshape(z, {1, z.size()}) : z;
}

}  // namespace

std::vector<double> standard_normal(Rng& rng, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) v = normal(rng);
  return out;
}

ad::Tensor log_pdf(const DiagGaussian& g, const ad::Tensor& z) {
  const std::size_t d = g.dim();
  if (g.log_var.size() != d) throw DimensionError("log_pdf: mean and log_var sizes differ");
  const ad::Tensor lv = ad::clamp(g.log_var, kLogVarMin, kLogVarMax);
  if (z.rank() == 1) {
    if (z.size() != d) {
      throw DimensionError("log_pdf: latent has " + std::to_string(z.size()) +
                           " dims, distribution has " + std::to_string(d));
    }
    const ad::Tensor quad = ad::square(z - g.mean) * ad::exp(-lv) + lv;
    return ad::scale(ad::add_scalar(ad::sum(quad), static_cast<double>(d) * kLog2Pi), -0.5);
  }
  if (z.rank() != 2 || z.dim(1) != d) throw DimensionError("log_pdf: latent batch must be [m x d]");
  const std::size_t m = z.dim(0);
  const ad::Tensor quad =
      ad::square(ad::add_rowvec(z, -g.mean)) * tile_rows(ad::exp(-lv), m) + tile_rows(lv, m);
  return ad::scale(ad::add_scalar(ad::sum_last(quad), static_cast<double>(d) * kLog2Pi), -0.5);
}

ad::Tensor rsample(const DiagGaussian& g, Rng& rng) {
  const ad::Tensor eps = ad::Tensor::vector(standard_normal(rng, g.dim()));
  const ad::Tensor sd = ad::exp(ad::scale(ad::clamp(g.log_var, kLogVarMin, kLogVarMax), 0.5));
  return g.mean + sd * eps;
}

// --- ClassPriorBank -------------------------------------------------------

ClassPriorBank::ClassPriorBank(ad::Tensor means, ad::Tensor log_vars)
    : means_(std::move(means)), log_vars_(std::move(log_vars)) {
  if (means_.rank() != 2 || log_vars_.shape() != means_.shape()) {
    throw DimensionError("ClassPriorBank: means and log_vars must both be [K x d]");
  }
  if (means_.dim(0) < 2) throw ContractError("ClassPriorBank: need at least two classes");
}

ClassPriorBank ClassPriorBank::random(std::size_t classes, std::size_t dim, Rng& rng) {
  return ClassPriorBank(ad::Tensor::matrix(classes, dim, standard_normal(rng, classes * dim), true),
                        ad::Tensor::zeros({classes, dim}, true));
}

ad::Tensor ClassPriorBank::clamped_log_vars() const {
  return ad::clamp(log_vars_, kLogVarMin, kLogVarMax);
}

DiagGaussian ClassPriorBank::component(std::size_t label) const {
  if (label >= classes()) throw DimensionError("component: unknown class " + std::to_string(label));
  const std::size_t idx[] = {label};
  return {ad::reshape(ad::gather_rows(means_, idx), {dim()}),
          ad::reshape(ad::gather_rows(log_vars_, idx), {dim()})};
}

ad::Tensor ClassPriorBank::log_pdf_table(const ad::Tensor& z) const {
  const ad::Tensor zb = as_batch(z);
  if (zb.rank() != 2 || zb.dim(1) != dim()) {
    throw DimensionError("log_pdf_table: latent batch must be [m x " + std::to_string(dim()) + "]");
  }
  // Expanded quadratic: sum_j (z_j - mu_j)^2 / v_j
  //   = (z*z) . (1/v) - 2 z . (mu/v) + sum_j mu_j^2 / v_j.
  const ad::Tensor lv = clamped_log_vars();
  const ad::Tensor precision = ad::exp(-lv);
  const ad::Tensor weighted_means = means_ * precision;
  const ad::Tensor quad = ad::matmul(ad::square(zb), ad::transpose(precision)) -
                          ad::scale(ad::matmul(zb, ad::transpose(weighted_means)), 2.0);
  const ad::Tensor per_class = ad::add_scalar(ad::sum_last(means_ * weighted_means + lv),
                                              static_cast<double>(dim()) * kLog2Pi);
  return ad::scale(ad::add_rowvec(quad, per_class), -0.5);
}

ad::Tensor ClassPriorBank::log_pdf_labeled(const ad::Tensor& z,
                                           std::span<const std::size_t> labels) const {
  if (z.rank() != 2 || z.dim(1) != dim() || z.dim(0) != labels.size()) {
    throw DimensionError("log_pdf_labeled: latent batch must be [m x d] with m labels");
  }
  const ad::Tensor mu = ad::gather_rows(means_, labels);
  const ad::Tensor lv = ad::gather_rows(clamped_log_vars(), labels);
  const ad::Tensor quad = ad::square(z - mu) * ad::exp(-lv) + lv;
  return ad::scale(ad::add_scalar(ad::sum_last(quad), static_cast<double>(dim()) * kLog2Pi), -0.5);
}

ad::Tensor ClassPriorBank::rsample_labeled(std::span<const std::size_t> labels, Rng& rng) const {
  const std::size_t m = labels.size();
  const ad::Tensor eps = ad::Tensor::matrix(m, dim(), standard_normal(rng, m * dim()));
  const ad::Tensor sd = ad::exp(ad::scale(ad::gather_rows(clamped_log_vars(), labels), 0.5));
  return ad::gather_rows(means_, labels) + sd * eps;
}

// --- Categorical ----------------------------------------------------------

Categorical::Categorical(ad::Tensor logits) : logits_(std::move(logits)) {
  if (logits_.rank() != 1 || logits_.size() < 2) {
    throw DimensionError("Categorical: logits must be a vector of at least two classes");
  }
}

Categorical Categorical::uniform(std::size_t classes, bool requires_grad) {
  return Categorical(ad::Tensor::zeros({classes}, requires_grad));
}

ad::Tensor Categorical::log_probs() const { return ad::log_softmax(logits_); }

std::vector<double> Categorical::probs() const {
  const ad::Tensor lp = ad::log_softmax(logits_.detach());
  std::vector<double> out(lp.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(lp[i]);
  return out;
}

// --- posterior ------------------------------------------------------------

ad::Tensor class_log_posterior(const ClassPriorBank& bank, const ad::Tensor& label_log_probs,
                               const ad::Tensor& z) {
  if (label_log_probs.rank() != 1 || label_log_probs.size() != bank.classes()) {
    throw DimensionError("class_log_posterior: label prior must have one entry per class");
  }
  const ad::Tensor joint = ad::add_rowvec(bank.log_pdf_table(z), label_log_probs);
  const ad::Tensor post = ad::log_softmax(joint);
  return z.rank() == 1 ? ad::reshape(post, {bank.classes()}) : post;
}

ad::Tensor class_posterior(const ClassPriorBank& bank, const Categorical& prior_y,
                           const ad::Tensor& z) {
  if (z.rank() != 1) throw DimensionError("class_posterior: expects a single latent [d]");
  return ad::exp(class_log_posterior(bank, prior_y.log_probs(), z));
}

AffineLayer softmax_equivalence(const ClassPriorBank& bank, const Categorical& prior_y) {
  const std::size_t k = bank.classes(), d = bank.dim();
  const auto lv = bank.log_vars().values();
  for (std::size_t y = 1; y < k; ++y) {
    for (std::size_t j = 0; j < d; ++j) {
      if (lv[y * d + j] != lv[j]) {
        throw ContractError("softmax_equivalence: classes do not share one covariance");
      }
    }
  }
  const std::vector<std::size_t> first(k, 0);
  const ad::Tensor precision =
      ad::exp(-ad::gather_rows(ad::clamp(bank.log_vars(), kLogVarMin, kLogVarMax), first));
  const ad::Tensor weights = bank.means() * precision;
  const ad::Tensor biases =
      ad::scale(ad::sum_last(bank.means() * weights), -0.5) + prior_y.log_probs();
  return {weights, biases};
}

ad::Tensor softmax_equivalence_logits(const ClassPriorBank& bank, const Categorical& prior_y,
                                      const ad::Tensor& z) {
  const AffineLayer layer = softmax_equivalence(bank, prior_y);
  const ad::Tensor logits =
      ad::add_rowvec(ad::matmul(as_batch(z), ad::transpose(layer.weights)), layer.biases);
  return z.rank() == 1 ? ad::reshape(logits, {bank.classes()}) : logits;
}

}  // namespace vc
