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
#include "vclass/errors.hpp"
#include "vclass/oracle.hpp"

namespace vc {
namespace {

using ad::Tensor;

double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

double normal_pdf(double z, double mean, double var) {
  return std::exp(-(z - mean) * (z - mean) / (2 * var)) / std::sqrt(2 * std::numbers::pi * var);
}

// Closed-form optimum for the symmetric N(+-1, 1) pair, class +, on the
// verifier's own grid: N(z; 1, 1) * sigmoid(2z)^(1/beta), normalised with
// trapezoidal weights into masses.
std::vector<double> reference_optimum(const std::vector<double>& grid, double beta, bool prior_only) {
  const auto w = trapezoid_weights(grid);
  std::vector<double> m(grid.size());
  double s = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double ratio = prior_only ? 1.0 : std::exp(log_sigmoid(2 * grid[i]) / beta);
    m[i] = normal_pdf(grid[i], 1, 1) * ratio * w[i];
    s += m[i];
  }
  for (double& v : m) v /= s;
  return m;
}

double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

Eq8Problem symmetric(double beta) {
  Eq8Problem p;
  p.classes = {{1.0, 1.0}, {-1.0, 1.0}};
  p.beta = beta;
  return p;
}

TEST(GridDist, UniformValidates) {
  const GridDist g = GridDist::uniform(linspace(0, 1, 11));
  EXPECT_NO_THROW(g.validate());
  GridDist bad = g;
  bad.masses[0] += 0.1;
  EXPECT_THROW(bad.validate(), ContractError);
}

TEST(Trapezoid, IntegratesLinearExactly) {
  const auto x = linspace(-1, 3, 9);
  const auto w = trapezoid_weights(x);
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * (2 * x[i] + 1);
  EXPECT_NEAR(s, 12.0, 1e-12);
}

TEST(Collapse, MassMovesToRightBoundary) {
  const auto grid = linspace(-5, 5, 1001);
  std::vector<double> f;
  for (double z : grid) f.push_back(log_sigmoid(2 * z));
  const CollapseResult r = verify_collapse(grid, f);
  EXPECT_EQ(r.argmax, 1000u);
  EXPECT_GE(r.optimum.masses[1000], 0.999);
  EXPECT_FALSE(r.tie);
  EXPECT_NEAR(r.optimal_value, f.back(), 1e-10);
  EXPECT_NO_THROW(r.optimum.validate());
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
    EXPECT_GE(r.objective_trace[i], r.objective_trace[i - 1]);
  }
}

TEST(Collapse, ConstantObjectiveFlagsTie) {
  const auto grid = linspace(-1, 1, 21);
  const std::vector<double> f(21, std::log(0.5));
  const CollapseResult r = verify_collapse(grid, f);
  EXPECT_TRUE(r.tie);
  EXPECT_NEAR(r.mass_at_argmax, 1.0, 1e-12);
  EXPECT_NEAR(r.optimal_value, std::log(0.5), 1e-12);
}

TEST(Eq8, SingleClassOptimumIsPrior) {
  Eq8Problem p;
  p.classes = {{0.5, 2.0}};
  const Eq8Result r = verify_eq8(p);
  EXPECT_LT(r.max_l1, 1e-6);
  EXPECT_LT(r.max_l1_to_prior, 1e-12);
}

TEST(Eq8, SymmetricPairAtBetaOne) {
  const Eq8Result r = verify_eq8(symmetric(1.0));
  const auto expected = reference_optimum(r.grid, 1.0, false);
  EXPECT_LT(l1(r.closed_form[0], expected), 1e-10);
  EXPECT_LT(l1(r.brute_force[0], expected), 0.05);
  EXPECT_LT(r.max_normalization_error, 1e-8);
  EXPECT_LT(r.max_normalizer_gap, 1e-8);
}

TEST(Eq8, LargeBetaApproachesPrior) {
  const Eq8Result r = verify_eq8(symmetric(100.0));
  const auto prior = reference_optimum(r.grid, 100.0, true);
  EXPECT_LT(l1(reference_optimum(r.grid, 100.0, false), prior), 0.02);
  EXPECT_LT(l1(r.brute_force[0], prior), 0.02);
}

TEST(Eq8, RejectsCoarseGrids) {
  Eq8Problem p = symmetric(1.0);
  p.grid_size = 500;
  EXPECT_THROW(verify_eq8(p), ContractError);
}

TEST(Eq8, BuildsFromOneDimensionalBank) {
  const ClassPriorBank bank(Tensor::matrix(2, 1, {1, -1}), Tensor::zeros({2, 1}));
  const Eq8Problem p = eq8_problem(bank, Categorical::uniform(2), 3.0);
  ASSERT_EQ(p.classes.size(), 2u);
  EXPECT_EQ(p.classes[1].mean, -1.0);
  EXPECT_EQ(p.classes[0].var, 1.0);
  EXPECT_EQ(p.beta, 3.0);
}

struct RatioCase {
  double q_mean;
  double slope;
  double intercept;
};

TEST(DiscriminatorOptimum, RecoversAnalyticRatio) {
  // log N(z; m, 1) - log N(z; 0, 1) = m z - m^2 / 2.
  for (const RatioCase c : {RatioCase{0.0, 0.0, 0.0}, RatioCase{1.0, 1.0, -0.5}, RatioCase{2.0, 2.0, -2.0}}) {
    Rng rng(17);
    const DiagGaussian q{Tensor::vector({c.q_mean}), Tensor::vector({0.0})};
    const DiagGaussian p{Tensor::vector({0.0}), Tensor::vector({0.0})};
    const DiscriminatorFit fit = verify_discriminator_optimum(q, p, 2000, rng);
    EXPECT_NEAR(fit.slope, c.slope, 0.1) << c.q_mean;
    EXPECT_NEAR(fit.intercept, c.intercept, 0.1) << c.q_mean;
    if (c.q_mean == 0.0) {
      for (double z = -3; z <= 3; z += 0.5) EXPECT_LT(std::abs(fit.slope * z + fit.intercept), 0.1);
    }
  }
}

TEST(DiscriminatorOptimum, RejectsUnequalVariances) {
  Rng rng(1);
  const DiagGaussian q{Tensor::vector({0.0}), Tensor::vector({0.5})};
  const DiagGaussian p{Tensor::vector({0.0}), Tensor::vector({0.0})};
  EXPECT_THROW(verify_discriminator_optimum(q, p, 10, rng), ContractError);
}

TEST(OracleSuite, AllChecksPass) {
  for (const OracleCheck& c : run_oracle_suite(1)) EXPECT_TRUE(c.pass) << c.name << " " << c.metric << " " << c.value;
}

}  // namespace
}  // namespace vc
