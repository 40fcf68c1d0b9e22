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

// Helpers shared by the unit and acceptance tests. The finite-difference
// routine here is deliberately separate from the library's own grad_check.

#ifndef VCLASS_TESTS_TEST_SUPPORT_HPP_
#define VCLASS_TESTS_TEST_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "vclass/autodiff.hpp"
#include "vclass/distributions.hpp"
#include "vclass/model.hpp"
#include "vclass/objectives.hpp"

namespace vc::testing {

struct FdReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t coordinates = 0;
};

// Compares reverse-mode gradients of a scalar f against central differences
// over every coordinate of params. The relative error uses
// max(|analytic|, |numeric|, floor) as denominator, so coordinates with
// near-zero gradients are judged on absolute error floor * tolerance.
inline FdReport finite_difference_check(const std::function<ad::Tensor()>& f,
                                        const std::vector<ad::Tensor>& params, double step = 1e-5,
                                        double floor = 1e-4) {
  for (const ad::Tensor& p : params) {
    ad::Tensor q = p;
    q.zero_grad();
  }
  ad::backward(f());
  std::vector<std::vector<double>> analytic;
  for (const ad::Tensor& p : params) {
    std::vector<double> g(p.size(), 0.0);
    if (p.has_grad()) std::copy(p.grad().begin(), p.grad().end(), g.begin());
    analytic.push_back(std::move(g));
  }
  FdReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    ad::Tensor p = params[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p.mutable_values()[i] = saved + step;
      const double up = f().item();
      p.mutable_values()[i] = saved - step;
      const double down = f().item();
      p.mutable_values()[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[k][i];
      const double abs_err = std::abs(a - numeric);
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      report.max_abs_error = std::max(report.max_abs_error, abs_err);
      report.max_rel_error = std::max(report.max_rel_error, abs_err / denom);
      ++report.coordinates;
    }
  }
  return report;
}

inline std::vector<double> uniform_values(Rng& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Small tanh model with randomised priors, label prior and discriminators,
// so every term of every objective is exercised away from kinks and clamps.
inline VcModel random_model(Rng& rng, std::size_t input = 5, std::size_t latent = 3,
                            std::size_t classes = 3) {
  VcModel m = VcModel::create({input, {6}, latent, classes, Activation::tanh}, rng);
  m.priors = ClassPriorBank(ad::Tensor::matrix(classes, latent, uniform_values(rng, classes * latent, -1.5, 1.5), true),
                            ad::Tensor::matrix(classes, latent, uniform_values(rng, classes * latent, -1, 1), true));
  m.label_prior = Categorical(ad::Tensor::vector(uniform_values(rng, classes, -0.5, 0.5), true));
  m.discriminators = DiscriminatorBank(ad::Tensor::matrix(classes, latent, uniform_values(rng, classes * latent, -1, 1), true),
                                       ad::Tensor::vector(uniform_values(rng, classes, -1, 1), true));
  return m;
}

inline Batch random_batch(Rng& rng, std::size_t m, std::size_t input, std::size_t classes) {
  Batch b{ad::Tensor::matrix(m, input, uniform_values(rng, m * input, 0, 1)), {}};
  std::uniform_int_distribution<std::size_t> label(0, classes - 1);
  for (std::size_t i = 0; i < m; ++i) b.ys.push_back(label(rng));
  return b;
}

// Finite-difference check of an objective's surrogate with respect to the
// encoder, priors and label prior, holding the stop-gradient copies fixed at
// their current values and the discriminators frozen.
inline FdReport objective_fd_check(const VcModel& model, const Batch& batch, Objective objective,
                                   double beta) {
  SurrogateAnchors anchors{model.encoder.encode(batch.xs).detach(),
                           model.label_prior.logits().detach()};
  std::vector<ad::Tensor> params = model.encoder.parameters();
  for (const ad::Tensor& p : model.priors.parameters()) params.push_back(p);
  params.push_back(model.label_prior.logits());
  return finite_difference_check(
      [&] { return evaluate_objective(model, batch, objective, beta, anchors).surrogate; }, params);
}

// Plain-loop ECE on max-probability confidence with bins (k/M, (k+1)/M].
inline double reference_ece(const std::vector<double>& confidence, const std::vector<bool>& correct,
                            std::size_t bins = 20) {
  std::vector<double> conf_sum(bins, 0.0), hit_sum(bins, 0.0);
  std::vector<std::size_t> count(bins, 0);
  for (std::size_t i = 0; i < confidence.size(); ++i) {
    std::size_t b = 0;
    while (b + 1 < bins && confidence[i] > static_cast<double>(b + 1) / static_cast<double>(bins)) ++b;
    conf_sum[b] += confidence[i];
    hit_sum[b] += correct[i] ? 1.0 : 0.0;
    ++count[b];
  }
  double total = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    if (count[b] == 0) continue;
    const double n = static_cast<double>(count[b]);
    total += n / static_cast<double>(confidence.size()) * std::abs(hit_sum[b] / n - conf_sum[b] / n);
  }
  return total;
}

}  // namespace vc::testing

#endif  // VCLASS_TESTS_TEST_SUPPORT_HPP_
