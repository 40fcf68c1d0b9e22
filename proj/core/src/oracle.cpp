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

#include "vclass/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>

#include "vclass/errors.hpp"
#include "vclass/model.hpp"
#include "vclass/objectives.hpp"

namespace vc {
namespace {

double logsumexp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

// Normalised masses from unnormalised log-masses.
std::vector<double> normalize_log(std::span<const double> log_masses) {
  const double z = logsumexp(log_masses);
  std::vector<double> out(log_masses.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(log_masses[i] - z);
  return out;
}

void renormalize_log(std::vector<double>& log_masses) {
  const double z = logsumexp(log_masses);
  for (auto& v : log_masses) v -= z;
}

double gaussian_log_pdf(double z, const Gaussian1D& g) {
  const double d = z - g.mean;
  return -0.5 * (d * d / g.var + std::log(2.0 * std::numbers::pi * g.var));
}

double l1(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

}  // namespace

GridDist GridDist::uniform(std::vector<double> points, std::size_t dim) {
  if (dim == 0 || points.empty() || points.size() % dim != 0) {
    throw DimensionError("GridDist: points must be [G x dim]");
  }
  GridDist g;
  g.dim = dim;
  const std::size_t n = points.size() / dim;
  g.points = std::move(points);
  g.masses.assign(n, 1.0 / static_cast<double>(n));
  return g;
}

void GridDist::validate() const {
  if (points.size() != masses.size() * dim) throw DimensionError("GridDist: one mass per point");
  double total = 0.0;
  for (double m : masses) {
    if (!(m >= 0.0)) throw ContractError("GridDist: negative mass");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-10) throw ContractError("GridDist: masses do not sum to 1");
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw ContractError("linspace: need at least two points");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

std::vector<double> trapezoid_weights(std::span<const double> points) {
  const std::size_t n = points.size();
  if (n < 2) throw ContractError("trapezoid_weights: need at least two points");
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = points[i + 1] - points[i];
    if (!(h > 0.0)) throw ContractError("trapezoid_weights: points must be strictly increasing");
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

// --- collapse -------------------------------------------------------------

CollapseResult verify_collapse(std::span<const double> points, std::span<const double> log_posterior,
                               std::size_t steps) {
  const std::size_t g = log_posterior.size();
  if (g == 0 || points.size() % g != 0) throw DimensionError("verify_collapse: one value per grid point");
  for (double f : log_posterior) {
    if (!std::isfinite(f)) throw DomainError("verify_collapse: objective must be finite on the grid");
  }
  CollapseResult r;
  r.optimum = GridDist::uniform({points.begin(), points.end()}, points.size() / g);
  r.max_value = *std::max_element(log_posterior.begin(), log_posterior.end());
  r.argmax = static_cast<std::size_t>(
      std::max_element(log_posterior.begin(), log_posterior.end()) - log_posterior.begin());
  const double tie_tol = 1e-12 * (1.0 + std::abs(r.max_value));

  std::vector<bool> is_max(g);
  std::size_t n_max = 0;
  double second = -INFINITY;
  for (std::size_t i = 0; i < g; ++i) {
    is_max[i] = r.max_value - log_posterior[i] <= tie_tol;
    if (is_max[i]) {
      ++n_max;
    } else {
      second = std::max(second, log_posterior[i]);
    }
  }
  r.tie = n_max > 1;

  // Objective written as max - E_q[max - f] so round-off cannot make the
  // recorded trace move against the ascent direction.
  auto objective = [&](std::span<const double> q) {
    double gap = 0.0;
    for (std::size_t i = 0; i < g; ++i) gap += q[i] * (r.max_value - log_posterior[i]);
    return r.max_value - gap;
  };
  r.objective_trace.push_back(objective(r.optimum.masses));

  // A constant objective is already optimal everywhere.
  const double gap = r.max_value - second;
  const double total_tilt =
      std::isfinite(second) ? (std::log(static_cast<double>(g)) + 40.0) / gap : 0.0;
  const double eta = steps > 0 ? total_tilt / static_cast<double>(steps) : 0.0;

  std::vector<double> log_q(g, -std::log(static_cast<double>(g)));
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < g; ++i) log_q[i] += eta * (log_posterior[i] - r.max_value);
    renormalize_log(log_q);
    for (std::size_t i = 0; i < g; ++i) r.optimum.masses[i] = std::exp(log_q[i]);
    r.objective_trace.push_back(objective(r.optimum.masses));
  }
  r.optimal_value = r.objective_trace.back();
  for (std::size_t i = 0; i < g; ++i) {
    if (is_max[i]) r.mass_at_argmax += r.optimum.masses[i];
  }
  return r;
}

// --- optimal q ------------------------------------------------------------

Eq8Problem eq8_problem(const ClassPriorBank& priors, const Categorical& label_prior, double beta) {
  if (priors.dim() != 1) throw DimensionError("eq8_problem: priors must be one-dimensional");
  Eq8Problem p;
  p.beta = beta;
  const auto mu = priors.means().values();
  const auto lv = priors.log_vars().values();
  for (std::size_t y = 0; y < priors.classes(); ++y) {
    p.classes.push_back({mu[y], std::exp(std::clamp(lv[y], kLogVarMin, kLogVarMax))});
  }
  p.label_probs = label_prior.probs();
  return p;
}

Eq8Result verify_eq8(const Eq8Problem& problem) {
  const std::size_t k = problem.classes.size();
  if (k == 0) throw ContractError("verify_eq8: need at least one class");
  if (!(problem.beta > 0.0)) throw ContractError("verify_eq8: beta must be positive");
  if (problem.grid_size < 2000) throw ContractError("verify_eq8: grid needs at least 2000 points");
  std::vector<double> pi = problem.label_probs;
  if (pi.empty()) pi.assign(k, 1.0 / static_cast<double>(k));
  if (pi.size() != k) throw DimensionError("verify_eq8: one label probability per class");
  for (const auto& c : problem.classes) {
    if (!(c.var > 0.0)) throw ContractError("verify_eq8: variances must be positive");
  }

  double lo = INFINITY, hi = -INFINITY;
  for (const auto& c : problem.classes) {
    const double sd = std::sqrt(c.var);
    lo = std::min(lo, c.mean - 6.0 * sd);
    hi = std::max(hi, c.mean + 6.0 * sd);
  }
  Eq8Result r;
  r.grid = linspace(lo, hi, problem.grid_size);
  const std::size_t g = r.grid.size();
  const auto w = trapezoid_weights(r.grid);

  // log p(z_i|y) and log p(y|z_i).
  std::vector<std::vector<double>> log_prior(k, std::vector<double>(g));
  std::vector<std::vector<double>> log_post(k, std::vector<double>(g));
  std::vector<double> joint(k);
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t y = 0; y < k; ++y) {
      log_prior[y][i] = gaussian_log_pdf(r.grid[i], problem.classes[y]);
      joint[y] = std::log(pi[y]) + log_prior[y][i];
    }
    const double lse = logsumexp(joint);
    for (std::size_t y = 0; y < k; ++y) log_post[y][i] = joint[y] - lse;
  }

  const double inv_beta = 1.0 / problem.beta;
  const double eta = 0.5 / problem.beta;
  std::vector<double> log_base(g), log_closed(g), log_q(g);
  for (std::size_t y = 0; y < k; ++y) {
    double integral = 0.0;
    for (std::size_t i = 0; i < g; ++i) integral += w[i] * std::exp(log_prior[y][i]);
    if (std::abs(integral - 1.0) > 1e-4) {
      throw NumericalError("verify_eq8: grid too coarse, prior integrates to " + std::to_string(integral));
    }
    for (std::size_t i = 0; i < g; ++i) {
      log_base[i] = std::log(w[i]) + log_prior[y][i];
      log_closed[i] = log_base[i] + inv_beta * log_post[y][i];
    }
    const auto prior_masses = normalize_log(log_base);
    auto closed = normalize_log(log_closed);
    const double total = std::accumulate(closed.begin(), closed.end(), 0.0);
    r.max_normalization_error = std::max(r.max_normalization_error, std::abs(total - 1.0));

    // Mirror ascent on the discretised objective, gradient
    //   log p(y|z_i) - beta (log(q_i / (p_i w_i)) + 1).
    std::fill(log_q.begin(), log_q.end(), -std::log(static_cast<double>(g)));
    for (std::size_t it = 0; it < problem.iterations; ++it) {
      for (std::size_t i = 0; i < g; ++i) {
        const double grad = log_post[y][i] - problem.beta * (log_q[i] - log_base[i] + 1.0);
        log_q[i] += eta * grad;
      }
      renormalize_log(log_q);
    }
    std::vector<double> brute(g);
    for (std::size_t i = 0; i < g; ++i) brute[i] = std::exp(log_q[i]);

    r.l1.push_back(l1(closed, brute));
    r.l1_to_prior.push_back(l1(closed, prior_masses));
    r.max_l1 = std::max(r.max_l1, r.l1.back());
    r.max_l1_to_prior = std::max(r.max_l1_to_prior, r.l1_to_prior.back());

    if (problem.beta == 1.0) {
      double explicit_norm = 0.0;
      for (std::size_t i = 0; i < g; ++i) explicit_norm += std::exp(log_base[i] + log_post[y][i]);
      // E_{p(z|y)}[p(y|z)] by composite Simpson over +-10 sd of class y.
      const auto& c = problem.classes[y];
      const double sd = std::sqrt(c.var);
      const std::size_t n = 40000;  // even
      const double a = c.mean - 10.0 * sd, h = 20.0 * sd / static_cast<double>(n);
      double simpson = 0.0;
      for (std::size_t i = 0; i <= n; ++i) {
        const double z = a + h * static_cast<double>(i);
        for (std::size_t yy = 0; yy < k; ++yy) {
          joint[yy] = std::log(pi[yy]) + gaussian_log_pdf(z, problem.classes[yy]);
        }
        const double f = std::exp(gaussian_log_pdf(z, c) + joint[y] - logsumexp(joint));
        const double coef = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        simpson += coef * f;
      }
      simpson *= h / 3.0;
      r.max_normalizer_gap = std::max(r.max_normalizer_gap, std::abs(explicit_norm - simpson));
    }
    r.closed_form.push_back(std::move(closed));
    r.brute_force.push_back(std::move(brute));
  }
  return r;
}

// --- discriminator optimum -------------------------------------------------

DiscriminatorFit verify_discriminator_optimum(const DiagGaussian& q, const DiagGaussian& p,
                                              std::size_t train_steps, Rng& rng,
                                              std::size_t samples) {
  if (q.dim() != 1 || p.dim() != 1) throw DimensionError("discriminator oracle: 1-d Gaussians only");
  if (samples == 0) throw ContractError("discriminator oracle: need samples");
  const double mq = q.mean[0], mp = p.mean[0];
  const double vq = std::exp(std::clamp(q.log_var[0], kLogVarMin, kLogVarMax));
  const double vp = std::exp(std::clamp(p.log_var[0], kLogVarMin, kLogVarMax));
  if (std::abs(vq - vp) > 1e-12 * std::max(vq, vp)) {
    throw ContractError("discriminator oracle: unequal variances make the log-ratio non-affine");
  }
  const double sd = std::sqrt(vq);
  DiscriminatorFit fit;
  fit.expected_slope = (mq - mp) / vq;
  fit.expected_intercept = -(mq * mq - mp * mp) / (2.0 * vq);

  std::vector<double> zq = standard_normal(rng, samples), zp = standard_normal(rng, samples);
  for (auto& v : zq) v = mq + sd * v;
  for (auto& v : zp) v = mp + sd * v;
  const ad::Tensor tq = ad::Tensor::matrix(samples, 1, zq);
  const ad::Tensor tp = ad::Tensor::matrix(samples, 1, zp);
  const std::vector<std::size_t> labels(samples, 0);

  DiscriminatorBank disc(ad::Tensor::zeros({1, 1}, true), ad::Tensor::zeros({1}, true));
  constexpr double kRate = 1.0, kMomentum = 0.9;
  double vel_w = 0.0, vel_b = 0.0;
  for (std::size_t step = 0; step < train_steps; ++step) {
    ad::Tensor w = disc.weights(), b = disc.biases();
    w.zero_grad();
    b.zero_grad();
    ad::backward(aux_loss_on_samples(disc, tq, tp, labels).surrogate);
    vel_w = kMomentum * vel_w + w.grad()[0];
    vel_b = kMomentum * vel_b + b.grad()[0];
    w.mutable_values()[0] += kRate * vel_w;
    b.mutable_values()[0] += kRate * vel_b;
  }
  fit.slope = disc.weights()[0];
  fit.intercept = disc.biases()[0];
  fit.slope_error = std::abs(fit.slope - fit.expected_slope);
  fit.intercept_error = std::abs(fit.intercept - fit.expected_intercept);
  fit.trained_aux = aux_loss_on_samples(disc, tq, tp, labels).value;
  const DiscriminatorBank optimum(ad::Tensor::matrix(1, 1, {fit.expected_slope}),
                                  ad::Tensor::vector({fit.expected_intercept}));
  fit.optimal_aux = aux_loss_on_samples(optimum, tq, tp, labels).value;
  return fit;
}

// --- report ---------------------------------------------------------------

std::vector<OracleCheck> run_oracle_suite(std::uint64_t seed) {
  std::vector<OracleCheck> checks;
  auto at_most = [&](std::string name, std::string metric, double value, double tol) {
    checks.push_back({std::move(name), std::move(metric), value, tol, value <= tol});
  };

  {
    // Two symmetric classes N(-1, 1), N(+1, 1); every sample labelled +.
    const ClassPriorBank bank(ad::Tensor::matrix(2, 1, {-1.0, 1.0}), ad::Tensor::zeros({2, 1}));
    const auto grid = linspace(-5.0, 5.0, 1001);
    const ad::Tensor post = class_log_posterior(bank, ad::Tensor::vector({std::log(0.5), std::log(0.5)}),
                                                ad::Tensor::matrix(grid.size(), 1, grid));
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) f[i] = post.at(i, 1);
    const auto r = verify_collapse(grid, f);
    checks.push_back({"collapse", "mass_at_argmax", r.mass_at_argmax, 0.999, r.mass_at_argmax >= 0.999});
    at_most("collapse", "value_gap", std::abs(r.optimal_value - r.max_value), 1e-10);
    at_most("collapse", "argmax_distance_to_boundary", std::abs(grid[r.argmax] - 5.0), 1e-12);
  }
  {
    Eq8Problem prob;
    prob.classes = {{-1.0, 1.0}, {1.0, 1.0}};
    prob.beta = 1.0;
    const auto r = verify_eq8(prob);
    at_most("optimal_q_beta1", "max_l1", r.max_l1, 0.05);
    at_most("optimal_q_beta1", "normalization_error", r.max_normalization_error, 1e-8);
    at_most("optimal_q_beta1", "normalizer_gap", r.max_normalizer_gap, 1e-8);
    prob.beta = 100.0;
    const auto r100 = verify_eq8(prob);
    at_most("optimal_q_beta100", "max_l1", r100.max_l1, 0.05);
    at_most("optimal_q_beta100", "l1_to_prior", r100.max_l1_to_prior, 0.02);
  }
  {
    Rng rng(seed);
    const DiagGaussian q{ad::Tensor::vector({1.0}), ad::Tensor::vector({0.0})};
    const DiagGaussian p{ad::Tensor::vector({0.0}), ad::Tensor::vector({0.0})};
    const auto fit = verify_discriminator_optimum(q, p, 2000, rng);
    at_most("discriminator_optimum", "slope_error", fit.slope_error, 0.1);
    at_most("discriminator_optimum", "intercept_error", fit.intercept_error, 0.1);
  }
  return checks;
}

void write_oracle_report(const std::vector<OracleCheck>& checks, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "check,metric,value,tolerance,pass\n";
  char buf[64];
  for (const auto& c : checks) {
    os << c.name << ',' << c.metric << ',';
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,", c.value, c.tolerance);
    os << buf << (c.pass ? "pass" : "fail") << '\n';
  }
}

}  // namespace vc
