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

#ifndef VCLASS_MODEL_HPP_
#define VCLASS_MODEL_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vclass/autodiff.hpp"
#include "vclass/distributions.hpp"

namespace vc {

enum class Activation { relu, tanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

// Deterministic encoder z = f(x): affine layers with an activation between
// them and a linear final layer.
class MlpEncoder {
 public:
  MlpEncoder() = default;
  // Fan-in scaled uniform init (He for relu, Xavier for tanh), zero biases.
  MlpEncoder(std::vector<std::size_t> layer_dims, Activation activation, Rng& rng);
  MlpEncoder(std::vector<ad::Tensor> weights, std::vector<ad::Tensor> biases, Activation activation);

  // x is [input_dim] or [m x input_dim].
  ad::Tensor encode(const ad::Tensor& x) const;

  std::size_t input_dim() const { return weights_.front().dim(0); }
  std::size_t latent_dim() const { return weights_.back().dim(1); }
  std::vector<std::size_t> layer_dims() const;
  Activation activation() const { return activation_; }
  const std::vector<ad::Tensor>& weights() const { return weights_; }
  const std::vector<ad::Tensor>& biases() const { return biases_; }
  std::vector<ad::Tensor> parameters() const;

 private:
  std::vector<ad::Tensor> weights_;  // [in x out] per layer
  std::vector<ad::Tensor> biases_;   // [out] per layer
  Activation activation_ = Activation::relu;
};

// Per-class affine discriminators T_y(z) = w_y' z + b_y estimating the log
// ratio between the empirical latent distribution and the class prior.
class DiscriminatorBank {
 public:
  DiscriminatorBank() = default;
  // All-zero discriminators (T == 0).
  DiscriminatorBank(std::size_t classes, std::size_t dim);
  DiscriminatorBank(ad::Tensor weights, ad::Tensor biases);

  // z [m x d] with one label per row -> [m]; z [d] with one label -> scalar.
  ad::Tensor discriminate(const ad::Tensor& z, std::span<const std::size_t> labels) const;
  ad::Tensor discriminate(const ad::Tensor& z, std::size_t label) const;

  std::size_t classes() const { return weights_.dim(0); }
  std::size_t dim() const { return weights_.dim(1); }
  const ad::Tensor& weights() const { return weights_; }
  const ad::Tensor& biases() const { return biases_; }
  std::vector<ad::Tensor> parameters() const { return {weights_, biases_}; }

 private:
  ad::Tensor weights_;  // [K x d]
  ad::Tensor biases_;   // [K]
};

struct ModelConfig {
  std::size_t input_dim = 784;
  std::vector<std::size_t> hidden_dims{256, 128};
  std::size_t latent_dim = 8;
  std::size_t classes = 10;
  Activation activation = Activation::relu;
};

// Encoder (phi), class priors (theta), label prior (pi), discriminators (psi).
struct VcModel {
  MlpEncoder encoder;
  ClassPriorBank priors;
  Categorical label_prior;
  DiscriminatorBank discriminators;

  static VcModel create(const ModelConfig& config, Rng& rng);

  std::size_t classes() const { return priors.classes(); }
  std::size_t latent_dim() const { return priors.dim(); }

  // Unnormalised log p(z|y) + log p(y) with z = f(x): [m x K].
  ad::Tensor log_joint(const ad::Tensor& x) const;
  // Bayes posterior p(y|x) = p(y|z=f(x)); [K] for one input, [m x K] for a batch.
  ad::Tensor predict(const ad::Tensor& x) const;

  // Deep copy; the copy shares no parameter storage with this model.
  VcModel clone() const;
  std::vector<ad::Tensor> parameters() const;
  bool finite() const;
};

}  // namespace vc

#endif  // VCLASS_MODEL_HPP_
