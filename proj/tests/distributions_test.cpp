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
#include <numbers>

#include "test_support.hpp"
#include "vclass/distributions.hpp"
#include "vclass/errors.hpp"

namespace vc {
namespace {

using ad::Tensor;
using testing::uniform_values;

DiagGaussian gaussian(std::vector<double> mean, std::vector<double> log_var) {
  return {Tensor::vector(std::move(mean)), Tensor::vector(std::move(log_var))};
}

ClassPriorBank bank_1d(std::vector<double> means, std::vector<double> vars) {
  std::vector<double> lv;
  for (double v : vars) lv.push_back(std::log(v));
  const std::size_t k = means.size();
  return ClassPriorBank(Tensor::matrix(k, 1, std::move(means), true), Tensor::matrix(k, 1, lv, true));
}

TEST(LogPdf, StandardNormalValues) {
  EXPECT_NEAR(log_pdf(gaussian({0, 0}, {0, 0}), Tensor::vector({0, 0})).item(),
              -std::log(2 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(log_pdf(gaussian({0}, {0}), Tensor::vector({1})).item(),
              -0.5 * (std::log(2 * std::numbers::pi) + 1), 1e-12);
}

TEST(LogPdf, MatchesDirectFormula) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto mu = uniform_values(rng, 3, -2, 2);
    const auto lv = uniform_values(rng, 3, -1, 1);
    const auto z = uniform_values(rng, 3, -3, 3);
    double expected = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double var = std::exp(lv[i]);
      expected += -0.5 * std::log(2 * std::numbers::pi * var) - (z[i] - mu[i]) * (z[i] - mu[i]) / (2 * var);
    }
    EXPECT_NEAR(log_pdf(gaussian(mu, lv), Tensor::vector(z)).item(), expected, 1e-12);
  }
}

TEST(LogPdf, BatchRowsAndDimensionErrors) {
  const DiagGaussian g = gaussian({0, 1}, {0, 0});
  const Tensor out = log_pdf(g, Tensor::matrix(2, 2, {0, 1, 1, 1}));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_NEAR(out[0], -std::log(2 * std::numbers::pi), 1e-12);
  EXPECT_THROW(log_pdf(g, Tensor::vector({1, 2, 3})), DimensionError);
}

TEST(LogPdf, LogVarIsClamped) {
  const double clamped = log_pdf(gaussian({0}, {50}), Tensor::vector({0})).item();
  EXPECT_NEAR(clamped, -0.5 * (std::log(2 * std::numbers::pi) + kLogVarMax), 1e-12);
}

TEST(Rsample, ZeroVarianceLimit) {
  Rng rng(7);
  const Tensor s = rsample(gaussian({1.5, -2}, {-1e9, -1e9}), rng);
  EXPECT_NEAR(s[0], 1.5, 1e-6);
  EXPECT_NEAR(s[1], -2.0, 1e-6);
}

TEST(Rsample, MonteCarloMoments) {
  Rng rng(42);
  const DiagGaussian g = gaussian({2}, {std::log(4.0)});
  double sum = 0, sq = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double x = rsample(g, rng)[0];
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 2.0, 0.08);
  EXPECT_NEAR(sq / n - mean * mean, 4.0, 0.25);
}

TEST(Rsample, SameSeedSameSamples) {
  const DiagGaussian g = gaussian({0, 1}, {0, 0.5});
  Rng a(3), b(3);
  for (int i = 0; i < 5; ++i) {
    const Tensor x = rsample(g, a), y = rsample(g, b);
    EXPECT_EQ(x[0], y[0]);
    EXPECT_EQ(x[1], y[1]);
  }
}

TEST(Rsample, GradientFlowsToParameters) {
  Rng rng(1);
  const DiagGaussian g{Tensor::vector({0.5}, true), Tensor::vector({0.2}, true)};
  const Tensor s = rsample(g, rng);
  ad::backward(ad::sum(s));
  EXPECT_EQ(g.mean.grad()[0], 1.0);
  EXPECT_NEAR(g.log_var.grad()[0], 0.5 * (s[0] - 0.5), 1e-12);
}

TEST(ClassPosterior, SymmetricPriors) {
  const ClassPriorBank bank = bank_1d({1, -1}, {1, 1});
  const Categorical uniform = Categorical::uniform(2);
  const Tensor p0 = class_posterior(bank, uniform, Tensor::vector({0.0}));
  EXPECT_NEAR(p0[0], 0.5, 1e-15);
  const Tensor p = class_posterior(bank, uniform, Tensor::vector({0.5}));
  EXPECT_NEAR(p[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
}

TEST(ClassPosterior, MatchesDensityRatioOnGrid) {
  Rng rng(8);
  const std::vector<double> mu = uniform_values(rng, 3, -2, 2);
  const std::vector<double> var = uniform_values(rng, 3, 0.3, 2.0);
  const std::vector<double> logits = uniform_values(rng, 3, -1, 1);
  const ClassPriorBank bank = bank_1d(mu, var);
  const Categorical cat(Tensor::vector(logits));
  double norm = 0;
  for (double l : logits) norm += std::exp(l);
  for (int g = 0; g < 100; ++g) {
    const double z = -4.0 + 8.0 * g / 99.0;
    double dens[3], total = 0;
    for (int k = 0; k < 3; ++k) {
      dens[k] = std::exp(logits[k]) / norm * std::exp(-(z - mu[k]) * (z - mu[k]) / (2 * var[k])) /
                std::sqrt(2 * std::numbers::pi * var[k]);
      total += dens[k];
    }
    const Tensor p = class_posterior(bank, cat, Tensor::vector({z}));
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(p[k], dens[k] / total, 1e-10);
  }
}

TEST(ClassLogPosterior, BatchRowsNormalise) {
  Rng rng(2);
  const ClassPriorBank bank = ClassPriorBank::random(4, 3, rng);
  const Categorical cat = Categorical::uniform(4);
  const Tensor lp = class_log_posterior(bank, cat.log_probs(), Tensor::matrix(5, 3, uniform_values(rng, 15, -2, 2)));
  ASSERT_EQ(lp.shape(), (ad::Shape{5, 4}));
  for (int i = 0; i < 5; ++i) {
    double s = 0;
    for (int k = 0; k < 4; ++k) s += std::exp(lp.at(i, k));
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(SoftmaxEquivalence, MatchesPosteriorForSharedIsotropicVariance) {
  Rng rng(5);
  const std::size_t k = 4, d = 3;
  const Tensor means = Tensor::matrix(k, d, uniform_values(rng, k * d, -2, 2));
  const Tensor log_vars = Tensor::filled({k, d}, std::log(0.7));
  const ClassPriorBank bank(means, log_vars);
  const Categorical cat(Tensor::vector(uniform_values(rng, k, -1, 1)));
  for (int t = 0; t < 10; ++t) {
    const Tensor z = Tensor::vector(uniform_values(rng, d, -3, 3));
    const Tensor logits = softmax_equivalence_logits(bank, cat, z);
    const Tensor soft = ad::exp(ad::log_softmax(logits));
    const Tensor post = class_posterior(bank, cat, z);
    for (std::size_t c = 0; c < k; ++c) EXPECT_NEAR(soft[c], post[c], 1e-10);
  }
}

TEST(SoftmaxEquivalence, ExpandedQuadratic) {
  const ClassPriorBank bank = bank_1d({0, 2}, {1, 1});
  const AffineLayer layer = softmax_equivalence(bank, Categorical::uniform(2));
  EXPECT_NEAR(layer.weights[0], 0.0, 1e-15);
  EXPECT_NEAR(layer.weights[1], 2.0, 1e-15);
  // Biases carry log p(y) = -ln 2 on top of -mu^2 / 2.
  EXPECT_NEAR(layer.biases[0] - layer.biases[1], 2.0, 1e-15);
  EXPECT_NEAR(layer.biases[1], -2.0 - std::log(2.0), 1e-12);
}

TEST(SoftmaxEquivalence, EqualMeansLeaveOnlyLabelPrior) {
  const ClassPriorBank bank = bank_1d({0.5, 0.5, 0.5}, {2, 2, 2});
  const Categorical cat(Tensor::vector({0.1, -0.4, 0.9}));
  const Tensor post = class_posterior(bank, cat, Tensor::vector({1.3}));
  const auto probs = cat.probs();
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(post[k], probs[k], 1e-12);
}

TEST(SoftmaxEquivalence, RejectsUnequalCovariances) {
  const ClassPriorBank bank = bank_1d({0, 1}, {1, 2});
  EXPECT_THROW(softmax_equivalence(bank, Categorical::uniform(2)), ContractError);
}

TEST(Categorical, NormalisedProbabilities) {
  const Categorical cat(Tensor::vector({0.0, std::log(3.0)}));
  const auto p = cat.probs();
  EXPECT_NEAR(p[0], 0.25, 1e-15);
  EXPECT_NEAR(p[1], 0.75, 1e-15);
}

}  // namespace
}  // namespace vc
