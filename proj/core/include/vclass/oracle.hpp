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

// Brute-force numerical checks of the objective's theoretical optima on
// discretised (grid) distributions.

#ifndef VCLASS_ORACLE_HPP_
#define VCLASS_ORACLE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vclass/distributions.hpp"

namespace vc {

// Probability masses on grid points; points are [G x dim], row-major.
struct GridDist {
  std::size_t dim = 1;
  std::vector<double> points;
  std::vector<double> masses;

  static GridDist uniform(std::vector<double> points, std::size_t dim = 1);

  std::size_t size() const { return masses.size(); }
  // Throws ContractError unless masses are >= 0 and sum to 1 +- 1e-10.
  void validate() const;
};

std::vector<double> linspace(double lo, double hi, std::size_t n);
// Trapezoidal quadrature weights for sorted 1-d points.
std::vector<double> trapezoid_weights(std::span<const double> points);

// --- collapse -------------------------------------------------------------

struct CollapseResult {
  GridDist optimum;
  std::vector<double> objective_trace;  // objective before the first and after every step
  std::size_t argmax = 0;               // first grid maximiser of the objective
  double mass_at_argmax = 0.0;          // mass on all grid maximisers
  double optimal_value = 0.0;           // sum_i q_i f_i at the returned optimum
  double max_value = 0.0;               // max_i f_i
  bool tie = false;                     // more than one maximiser (or constant f)
};

// Maximises E_q[f] over distributions on the grid by mirror ascent with
// multiplicative updates, starting from uniform. f is the per-point value of
// log p(y|z) for the one label every sample carries. The step size is set
// from the gap between the best and second-best grid values so the given
// number of steps concentrates the mass to double precision.
CollapseResult verify_collapse(std::span<const double> points, std::span<const double> log_posterior,
                               std::size_t steps = 50);

// --- optimal q ------------------------------------------------------------

struct Gaussian1D {
  double mean = 0.0;
  double var = 1.0;
};

struct Eq8Problem {
  std::vector<Gaussian1D> classes;  // p(z|y)
  std::vector<double> label_probs;  // p(y); empty means uniform
  double beta = 1.0;
  std::size_t grid_size = 4001;     // >= 2000
  std::size_t iterations = 5000;
};

// Builds the problem from one-dimensional priors.
Eq8Problem eq8_problem(const ClassPriorBank& priors, const Categorical& label_prior, double beta);

struct Eq8Result {
  std::vector<double> grid;
  std::vector<std::vector<double>> closed_form;  // per class, masses on the grid
  std::vector<std::vector<double>> brute_force;  // per class, masses on the grid
  std::vector<double> l1;                         // per class
  std::vector<double> l1_to_prior;                // closed form vs prior masses, per class
  double max_l1 = 0.0;
  double max_l1_to_prior = 0.0;
  double max_normalization_error = 0.0;  // |grid sum of closed form - 1|
  // beta == 1 only: |explicit normalizer - E_{p(z|y)}[p(y|z)]|, the latter by
  // an independent finer quadrature. 0 otherwise.
  double max_normalizer_gap = 0.0;
};

// Compares q*(z|y) proportional to p(z|y) p(y|z)^(1/beta) against a
// brute-force maximisation of the discretised per-class objective
//   sum_i q_i log p(y|z_i) - beta sum_i q_i log(q_i / (p(z_i|y) w_i))
// by mirror ascent. The grid spans +-6 standard deviations around every
// class. Throws NumericalError when the prior does not integrate to 1 within
// 1e-4 on the grid, ContractError for grids under 2000 points.
Eq8Result verify_eq8(const Eq8Problem& problem);

// --- discriminator optimum -------------------------------------------------

struct DiscriminatorFit {
  double slope = 0.0;
  double intercept = 0.0;
  double expected_slope = 0.0;
  double expected_intercept = 0.0;
  double slope_error = 0.0;
  double intercept_error = 0.0;
  double trained_aux = 0.0;  // auxiliary objective at the learned (w, b)
  double optimal_aux = 0.0;  // same samples, analytic log-ratio
};

// Trains an affine T(z) = w z + b by full-batch gradient ascent on
//   mean log sigma(T(z_q)) + mean log sigma(-T(z_p))
// and compares it to log q(z)/p(z). q and p must be 1-d with equal variance
// (ContractError otherwise).
DiscriminatorFit verify_discriminator_optimum(const DiagGaussian& q, const DiagGaussian& p,
                                              std::size_t train_steps, Rng& rng,
                                              std::size_t samples = 20000);

// --- report ---------------------------------------------------------------

struct OracleCheck {
  std::string name;
  std::string metric;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Runs the collapse, optimal-q and discriminator checks on their reference
// configurations.
std::vector<OracleCheck> run_oracle_suite(std::uint64_t seed);

// check,metric,value,tolerance,pass
void write_oracle_report(const std::vector<OracleCheck>& checks, const std::filesystem::path& path);

}  // namespace vc

#endif  // VCLASS_ORACLE_HPP_
