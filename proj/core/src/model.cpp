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

#include "vclass/model.hpp"

#include <cmath>
#include <string>

#include "vclass/errors.hpp"

namespace vc {
namespace {

ad::Tensor clone_param(const ad::Tensor& t) { return t.clone(); }

bool all_finite(const ad::Tensor& t) {
  for (double v : t.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw ContractError("unknown activation '" + std::string(name) + "'");
}

// --- MlpEncoder -----------------------------------------------------------

MlpEncoder::MlpEncoder(std::vector<std::size_t> layer_dims, Activation activation, Rng& rng)
    : activation_(activation) {
  if (layer_dims.size() < 2) throw ContractError("MlpEncoder: need input and latent dims");
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const std::size_t fan_in = layer_dims[l], fan_out = layer_dims[l + 1];
    const double limit = activation == Activation::relu
                             ? std::sqrt(6.0 / static_cast<double>(fan_in))
                             : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> init(-limit, limit);
    std::vector<double> w(fan_in * fan_out);
    for (auto& v : w) v = init(rng);
    weights_.push_back(ad::Tensor::matrix(fan_in, fan_out, std::move(w), true));
    biases_.push_back(ad::Tensor::zeros({fan_out}, true));
  }
}

MlpEncoder::MlpEncoder(std::vector<ad::Tensor> weights, std::vector<ad::Tensor> biases,
                       Activation activation)
    : weights_(std::move(weights)), biases_(std::move(biases)), activation_(activation) {
  if (weights_.empty() || weights_.size() != biases_.size()) {
    throw ContractError("MlpEncoder: need one bias per weight matrix");
  }
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l].rank() != 2 || biases_[l].rank() != 1 ||
        biases_[l].dim(0) != weights_[l].dim(1) ||
        (l > 0 && weights_[l].dim(0) != weights_[l - 1].dim(1))) {
      throw DimensionError("MlpEncoder: layer " + std::to_string(l) + " shapes do not chain");
    }
  }
}

ad::Tensor MlpEncoder::encode(const ad::Tensor& x) const {
  const bool single = x.rank() == 1;
  if ((single && x.size() != input_dim()) || (!single && (x.rank() != 2 || x.dim(1) != input_dim()))) {
    throw DimensionError("encode: input must have " + std::to_string(input_dim()) + " features");
  }
  ad::Tensor h = single ? ad::reshape(x, {1, x.size()}) : x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = ad::add_rowvec(ad::matmul(h, weights_[l]), biases_[l]);
    if (l + 1 < weights_.size()) h = activation_ == Activation::relu ? ad::relu(h) : ad::tanh(h);
  }
  return single ? ad::reshape(h, {latent_dim()}) : h;
}

std::vector<std::size_t> MlpEncoder::layer_dims() const {
  std::vector<std::size_t> dims{input_dim()};
  for (const auto& w : weights_) dims.push_back(w.dim(1));
  return dims;
}

std::vector<ad::Tensor> MlpEncoder::parameters() const {
  std::vector<ad::Tensor> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(weights_[l]);
    out.push_back(biases_[l]);
  }
  return out;
}

// --- DiscriminatorBank ----------------------------------------------------

DiscriminatorBank::DiscriminatorBank(std::size_t classes, std::size_t dim)
    : DiscriminatorBank(ad::Tensor::zeros({classes, dim}, true), ad::Tensor::zeros({classes}, true)) {}

DiscriminatorBank::DiscriminatorBank(ad::Tensor weights, ad::Tensor biases)
    : weights_(std::move(weights)), biases_(std::move(biases)) {
  if (weights_.rank() != 2 || biases_.rank() != 1 || biases_.dim(0) != weights_.dim(0)) {
    throw DimensionError("DiscriminatorBank: weights must be [K x d] and biases [K]");
  }
}

ad::Tensor DiscriminatorBank::discriminate(const ad::Tensor& z,
                                           std::span<const std::size_t> labels) const {
  if (z.rank() != 2 || z.dim(1) != dim() || z.dim(0) != labels.size()) {
    throw DimensionError("discriminate: latent batch must be [m x d] with m labels");
  }
  for (std::size_t y : labels) {
    if (y >= classes()) throw DimensionError("discriminate: unknown class " + std::to_string(y));
  }
  return ad::sum_last(z * ad::gather_rows(weights_, labels)) + ad::gather_rows(biases_, labels);
}

ad::Tensor DiscriminatorBank::discriminate(const ad::Tensor& z, std::size_t label) const {
  if (z.rank() != 1) throw DimensionError("discriminate: expects a single latent [d]");
  const std::size_t labels[] = {label};
  return ad::reshape(discriminate(ad::reshape(z, {1, z.size()}), labels), {});
}

// --- VcModel --------------------------------------------------------------

VcModel VcModel::create(const ModelConfig& config, Rng& rng) {
  std::vector<std::size_t> dims{config.input_dim};
  dims.insert(dims.end(), config.hidden_dims.begin(), config.hidden_dims.end());
  dims.push_back(config.latent_dim);
  VcModel model;
  model.encoder = MlpEncoder(dims, config.activation, rng);
  model.priors = ClassPriorBank::random(config.classes, config.latent_dim, rng);
  model.label_prior = Categorical::uniform(config.classes);
  model.discriminators = DiscriminatorBank(config.classes, config.latent_dim);
  return model;
}

ad::Tensor VcModel::log_joint(const ad::Tensor& x) const {
  const ad::Tensor z = encoder.encode(x);
  const ad::Tensor zb = z.rank() == 1 ? ad::reshape(z, {1, z.size()}) : z;
  return ad::add_rowvec(priors.log_pdf_table(zb), label_prior.log_probs());
}

ad::Tensor VcModel::predict(const ad::Tensor& x) const {
  const ad::Tensor probs = ad::exp(ad::log_softmax(log_joint(x)));
  return x.rank() == 1 ? ad::reshape(probs, {classes()}) : probs;
}

VcModel VcModel::clone() const {
  VcModel out;
  std::vector<ad::Tensor> w, b;
  for (const auto& t : encoder.weights()) w.push_back(clone_param(t));
  for (const auto& t : encoder.biases()) b.push_back(clone_param(t));
  out.encoder = MlpEncoder(std::move(w), std::move(b), encoder.activation());
  out.priors = ClassPriorBank(clone_param(priors.means()), clone_param(priors.log_vars()));
  out.label_prior = Categorical(clone_param(label_prior.logits()));
  out.discriminators =
      DiscriminatorBank(clone_param(discriminators.weights()), clone_param(discriminators.biases()));
  return out;
}

std::vector<ad::Tensor> VcModel::parameters() const {
  std::vector<ad::Tensor> out = encoder.parameters();
  for (const auto& group : {priors.parameters(), std::vector<ad::Tensor>{label_prior.logits()},
                            discriminators.parameters()}) {
    out.insert(out.end(), group.begin(), group.end());
  }
  return out;
}

bool VcModel::finite() const {
  for (const auto& p : parameters()) {
    if (!all_finite(p)) return false;
  }
  return true;
}

}  // namespace vc
