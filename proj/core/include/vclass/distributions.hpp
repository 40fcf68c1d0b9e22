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

// Class-conditional latent priors p(z|y), the learned label distribution
// p(y), and the Bayes-rule class posterior built from them.

#ifndef VCLASS_DISTRIBUTIONS_HPP_
#define VCLASS_DISTRIBUTIONS_HPP_

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "vclass/autodiff.hpp"

namespace vc {

using Rng = std::mt19937_64;

// Log-variances are clamped to this range before exponentiation.
inline constexpr double kLogVarMin = -30.0;
inline constexpr double kLogVarMax = 10.0;

std::vector<double> standard_normal(Rng& rng, std::size_t n);

// Diagonal Gaussian over R^d.
struct DiagGaussian {
  ad::Tensor mean;     // [d]
  ad::Tensor log_var;  // [d]

  std::size_t dim() const { return mean.size(); }
};

// log N(z; mean, diag(exp(log_var))). z is [d] (scalar result) or [m x d]
// (one density per row).
ad::Tensor log_pdf(const DiagGaussian& g, const ad::Tensor& z);

// Reparameterised sample mean + exp(log_var / 2) * eps, eps ~ N(0, I).
ad::Tensor rsample(const DiagGaussian& g, Rng& rng);

// One diagonal Gaussian per class, stored as [K x d] parameter matrices.
class ClassPriorBank {
 public:
  ClassPriorBank() = default;
  ClassPriorBank(ad::Tensor means, ad::Tensor log_vars);

  // Means drawn i.i.d. N(0, 1), unit variances.
  static ClassPriorBank random(std::size_t classes, std::size_t dim, Rng& rng);

  std::size_t classes() const { return means_.dim(0); }
  std::size_t dim() const { return means_.dim(1); }
  const ad::Tensor& means() const { return means_; }
  const ad::Tensor& log_vars() const { return log_vars_; }
  std::vector<ad::Tensor> parameters() const { return {means_, log_vars_}; }

  DiagGaussian component(std::size_t label) const;

  // log p(z_i | y) for every row of z [m x d] and every class: [m x K].
  ad::Tensor log_pdf_table(const ad::Tensor& z) const;
  // log p(z_i | y_i): [m].
  ad::Tensor log_pdf_labeled(const ad::Tensor& z, std::span<const std::size_t> labels) const;
  // z'_i ~ p(z | y_i), reparameterised: [m x d].
  ad::Tensor rsample_labeled(std::span<const std::size_t> labels, Rng& rng) const;

 private:
  ad::Tensor clamped_log_vars() const;

  ad::Tensor means_;
  ad::Tensor log_vars_;
};

// Categorical distribution parameterised by free logits.
class Categorical {
 public:
  Categorical() = default;
  explicit Categorical(ad::Tensor logits);

  static Categorical uniform(std::size_t classes, bool requires_grad = true);

  std::size_t classes() const { return logits_.size(); }
  const ad::Tensor& logits() const { return logits_; }
  ad::Tensor log_probs() const;
  std::vector<double> probs() const;

 private:
  ad::Tensor logits_;
};

// log p(y | z) = log p(z|y) + log p(y) - logsumexp_y'(...), for z [m x d]
// ([m x K] result) or z [d] ([K] result). label_log_probs is [K].
ad::Tensor class_log_posterior(const ClassPriorBank& bank, const ad::Tensor& label_log_probs,
                               const ad::Tensor& z);

// p(y | z) as probabilities for a single latent z [d].
ad::Tensor class_posterior(const ClassPriorBank& bank, const Categorical& prior_y,
                           const ad::Tensor& z);

// Affine softmax layer equivalent to the Bayes posterior when every class
// shares one covariance: w_y = Sigma^-1 mu_y, b_y = -mu_y' Sigma^-1 mu_y / 2
// + log p(y). Throws ContractError when covariances differ.
struct AffineLayer {
  ad::Tensor weights;  // [K x d]
  ad::Tensor biases;   // [K]
};
AffineLayer softmax_equivalence(const ClassPriorBank& bank, const Categorical& prior_y);

// z' w_y + b_y for the equivalent affine layer; z is [d] or [m x d].
ad::Tensor softmax_equivalence_logits(const ClassPriorBank& bank, const Categorical& prior_y,
                                      const ad::Tensor& z);

}  // namespace vc

#endif  // VCLASS_DISTRIBUTIONS_HPP_
