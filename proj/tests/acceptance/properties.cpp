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

// Criteria 1-8: property suite.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "acceptance.hpp"
#include "test_support.hpp"
#include "vclass/eval.hpp"
#include "vclass/objectives.hpp"
#include "vclass/oracle.hpp"
#include "vclass/trainer.hpp"

namespace vc::acceptance {
namespace {

using ad::Tensor;
using testing::finite_difference_check;
using testing::uniform_values;

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

// Values in +-[0.1, 2] so no coordinate sits within a step of a kink.
std::vector<double> away_from_zero(Rng& rng, std::size_t n) {
  auto v = uniform_values(rng, n, 0.1, 2.0);
  std::bernoulli_distribution flip(0.5);
  for (double& x : v) {
    if (flip(rng)) x = -x;
  }
  return v;
}

// Weighted sum of a primitive's output, so every output coordinate carries
// a distinct adjoint.
Tensor weighted(const Tensor& y, Rng& weights_rng) {
  return ad::sum(ad::mul(y, Tensor(y.shape(), uniform_values(weights_rng, y.size(), -1, 1))));
}

Outcome criterion1() {
  double worst_primitive = 0, worst_objective = 0;
  std::string worst_name;
  std::size_t checks = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const Tensor a = Tensor::matrix(3, 4, away_from_zero(rng, 12), true);
    const Tensor b = Tensor::matrix(3, 4, away_from_zero(rng, 12), true);
    const Tensor c = Tensor::matrix(4, 2, away_from_zero(rng, 8), true);
    const Tensor v = Tensor::vector(away_from_zero(rng, 4), true);
    const Tensor s = Tensor::scalar(away_from_zero(rng, 1)[0], true);
    Tensor pos = Tensor::matrix(3, 4, uniform_values(rng, 12, 0.2, 3.0), true);
    const std::vector<std::size_t> idx{3, 0, 2};
    const std::vector<std::size_t> rows{2, 0, 0, 1};

    const std::uint64_t wseed = rng();
    const std::vector<std::pair<const char*, std::function<Tensor()>>> prims = {
        {"matmul", [&] { return ad::matmul(a, c); }},
        {"transpose", [&] { return ad::transpose(a); }},
        {"reshape", [&] { return ad::reshape(a, {4, 3}); }},
        {"add", [&] { return ad::add(a, b); }},
        {"add_broadcast", [&] { return ad::add(a, s); }},
        {"sub", [&] { return ad::sub(a, b); }},
        {"mul", [&] { return ad::mul(a, b); }},
        {"mul_broadcast", [&] { return ad::mul(s, a); }},
        {"add_rowvec", [&] { return ad::add_rowvec(a, v); }},
        {"negate", [&] { return ad::negate(a); }},
        {"scale", [&] { return ad::scale(a, -1.7); }},
        {"add_scalar", [&] { return ad::add_scalar(a, 0.4); }},
        {"exp", [&] { return ad::exp(a); }},
        {"log", [&] { return ad::log(pos); }},
        {"tanh", [&] { return ad::tanh(a); }},
        {"relu", [&] { return ad::relu(a); }},
        {"sigmoid", [&] { return ad::sigmoid(a); }},
        {"log_sigmoid", [&] { return ad::log_sigmoid(a); }},
        {"square", [&] { return ad::square(a); }},
        {"clamp", [&] { return ad::clamp(a, -1.05, 1.05); }},
        {"sum", [&] { return ad::sum(a); }},
        {"mean", [&] { return ad::mean(a); }},
        {"sum_last", [&] { return ad::sum_last(a); }},
        {"logsumexp", [&] { return ad::logsumexp(a); }},
        {"log_softmax", [&] { return ad::log_softmax(a); }},
        {"pick", [&] { return ad::pick(a, idx); }},
        {"gather_rows", [&] { return ad::gather_rows(a, rows); }},
    };
    for (const auto& [name, op] : prims) {
      const auto report = finite_difference_check(
          [&, op = op] {
            Rng w(wseed);
            return weighted(op(), w);
          },
          {a, b, c, v, s, pos});
      ++checks;
      if (report.max_rel_error > worst_primitive) {
        worst_primitive = report.max_rel_error;
        worst_name = name;
      }
    }

    const VcModel model = testing::random_model(rng);
    const Batch batch = testing::random_batch(rng, 4, 5, 3);
    for (Objective o : {Objective::ce, Objective::gm, Objective::vc}) {
      worst_objective = std::max(worst_objective, testing::objective_fd_check(model, batch, o, 1.0).max_rel_error);
      ++checks;
    }
    const Tensor q = Tensor::matrix(4, 3, uniform_values(rng, 12, -2, 2));
    const Tensor p = Tensor::matrix(4, 3, uniform_values(rng, 12, -2, 2));
    const auto aux = finite_difference_check(
        [&] { return aux_loss_on_samples(model.discriminators, q, p, batch.ys).surrogate; },
        model.discriminators.parameters());
    worst_objective = std::max(worst_objective, aux.max_rel_error);
    ++checks;
  }
  const bool pass = worst_primitive < 1e-4 && worst_objective < 1e-4;
  return {1, pass,
          fmt("%zu checks over 100 seeds; worst primitive rel err %.2e (%s), worst objective rel err %.2e",
              checks, worst_primitive, worst_name.c_str(), worst_objective)};
}

Outcome criterion2() {
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(1000 + seed);
    std::uniform_int_distribution<std::size_t> kd(2, 6), dd(1, 5);
    const std::size_t k = kd(rng), d = dd(rng), m = 8, input = 6;
    VcModel model = VcModel::create({input, {7}, d, k, Activation::tanh}, rng);
    const double var = uniform_values(rng, 1, 0.2, 3.0)[0];
    const std::vector<double> mu = uniform_values(rng, k * d, -2, 2);
    const std::vector<double> logits = uniform_values(rng, k, -1, 1);
    model.priors = ClassPriorBank(Tensor::matrix(k, d, mu, true), Tensor::filled({k, d}, std::log(var), true));
    model.label_prior = Categorical(Tensor::vector(logits, true));
    const Batch batch = testing::random_batch(rng, m, input, k);

    // Affine softmax cross-entropy written out directly.
    const Tensor z = model.encoder.encode(batch.xs);
    double log_norm = 0;
    for (double l : logits) log_norm += std::exp(l);
    log_norm = std::log(log_norm);
    double ce = 0;
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> a(k);
      double amax = -1e300;
      for (std::size_t c = 0; c < k; ++c) {
        double wz = 0, mm = 0;
        for (std::size_t j = 0; j < d; ++j) {
          wz += mu[c * d + j] * z.at(i, j) / var;
          mm += mu[c * d + j] * mu[c * d + j];
        }
        a[c] = wz - mm / (2 * var) + logits[c] - log_norm;
        amax = std::max(amax, a[c]);
      }
      double se = 0;
      for (double x : a) se += std::exp(x - amax);
      ce += -(a[batch.ys[i]] - amax - std::log(se));
    }
    ce /= static_cast<double>(m);

    worst = std::max(worst, std::abs(-j_ce(model, batch).parts.ce_term - ce));
    worst = std::max(worst, std::abs(-j_vc(model, batch, 0.0).parts.ce_term - ce));
    worst = std::max(worst, std::abs(j_vc(model, batch, 0.0).parts.total - j_ce(model, batch).parts.total));
  }
  return {2, worst < 1e-8, fmt("50 configurations; max abs err %.2e", worst)};
}

Outcome criterion3() {
  Rng rng(2024);
  const DiagGaussian q{Tensor::vector({1.0}), Tensor::vector({0.0})};
  const DiagGaussian p{Tensor::vector({0.0}), Tensor::vector({0.0})};
  const DiscriminatorFit fit = verify_discriminator_optimum(q, p, 2000, rng, 20000);
  // log N(z; 1, 1) - log N(z; 0, 1) = z - 1/2.
  const double slope_err = std::abs(fit.slope - 1.0);
  const double intercept_err = std::abs(fit.intercept + 0.5);
  return {3, slope_err < 0.1 && intercept_err < 0.1,
          fmt("learned T(z) = %.4f z %+.4f; slope err %.4f, intercept err %.4f", fit.slope, fit.intercept, slope_err,
              intercept_err)};
}

double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

std::vector<double> closed_form_plus(const std::vector<double>& grid, double beta, bool prior_only) {
  const auto w = trapezoid_weights(grid);
  std::vector<double> m(grid.size());
  double s = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double dens = std::exp(-0.5 * (grid[i] - 1) * (grid[i] - 1));
    m[i] = dens * (prior_only ? 1.0 : std::exp(log_sigmoid(2 * grid[i]) / beta)) * w[i];
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

Outcome criterion4() {
  Eq8Problem problem;
  problem.classes = {{1.0, 1.0}, {-1.0, 1.0}};
  problem.beta = 1.0;
  const Eq8Result r1 = verify_eq8(problem);
  const double l1_beta1 = l1(r1.brute_force[0], closed_form_plus(r1.grid, 1.0, false));
  problem.beta = 100.0;
  const Eq8Result r100 = verify_eq8(problem);
  const auto prior = closed_form_plus(r100.grid, 100.0, true);
  const double l1_closed_prior = l1(closed_form_plus(r100.grid, 100.0, false), prior);
  const double l1_brute_prior = l1(r100.brute_force[0], prior);
  const bool pass = l1_beta1 < 0.05 && l1_closed_prior < 0.02 && l1_brute_prior < 0.02;
  return {4, pass,
          fmt("beta=1: L1(brute force, N(z;1,1)sigma(2z)) = %.2e; beta=100: L1(closed form, prior) = %.4f, "
              "L1(brute force, prior) = %.4f",
              l1_beta1, l1_closed_prior, l1_brute_prior)};
}

Outcome criterion5() {
  const auto grid = linspace(-5, 5, 1001);
  std::vector<double> f;
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    f.push_back(log_sigmoid(2 * grid[i]));  // log p(+|z) for N(+-1, 1), equal weights
    if (f[i] > f[best]) best = i;
  }
  const CollapseResult r = verify_collapse(grid, f);
  const double mass = r.optimum.masses[best];
  return {5, mass >= 0.999 && r.argmax == best,
          fmt("grid argmax z = %.1f; mass there %.12f", grid[best], mass)};
}

Outcome criterion6() {
  std::vector<double> probs;
  std::vector<std::size_t> labels;
  auto add = [&](double conf, bool correct) {
    probs.push_back(conf);
    probs.push_back(1 - conf);
    labels.push_back(correct ? 0 : 1);
  };
  for (int i = 0; i < 60; ++i) add(0.70, i < 30);
  for (int i = 0; i < 40; ++i) add(0.95, true);
  const double two_bin = ece(PredictionSet::from_probs(probs, 2, labels));
  probs.clear();
  labels.clear();
  for (int i = 0; i < 4; ++i) add(0.75, i < 3);
  for (int i = 0; i < 8; ++i) add(0.625, i < 5);
  for (int i = 0; i < 3; ++i) add(1.0, true);
  const double calibrated = ece(PredictionSet::from_probs(probs, 2, labels));
  // 0.14 is not representable; accept the nearest-rounding neighbourhood.
  const bool pass = std::abs(two_bin - 0.14) <= 4 * std::numeric_limits<double>::epsilon() && calibrated == 0.0;
  return {6, pass, fmt("two-bin ECE = %.17g; calibrated ECE = %.17g", two_bin, calibrated)};
}

Outcome criterion7() {
  std::size_t exact = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> len(1, 60);
    std::uniform_int_distribution<int> level(0, 20);  // coarse levels force ties
    std::vector<double> a(len(rng)), b(len(rng));
    for (double& x : a) x = level(rng) / 20.0;
    for (double& x : b) x = level(rng) / 20.0;
    std::uint64_t half = 0;
    for (double x : a) {
      for (double y : b) half += x > y ? 2 : (x == y ? 1 : 0);
    }
    const double brute = static_cast<double>(half) / 2.0 / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
    if (ood_auroc(a, b) == brute) ++exact;
  }
  return {7, exact == 200, fmt("%zu / 200 score sets match the pair count exactly", exact)};
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome criterion8() {
  Rng data_rng(3);
  const Dataset ds = gen_hierarchical(SyntheticSpec::synthetic3(), data_rng);
  TrainConfig c;
  c.objective = Objective::vc;
  c.epochs = 4;
  c.latent_dim = 2;
  c.hidden_dims = {64, 64};
  c.seed = 11;
  const auto dir = std::filesystem::temp_directory_path() / "vclass_acceptance_determinism";
  std::filesystem::create_directories(dir);
  write_metrics_csv(train(c, ds).history, dir / "a.csv");
  write_metrics_csv(train(c, ds).history, dir / "b.csv");
  const std::string a = read_bytes(dir / "a.csv"), b = read_bytes(dir / "b.csv");
  return {8, !a.empty() && a == b, fmt("two seeded vc runs, metrics.csv %zu bytes each, identical: %s", a.size(),
                                       a == b ? "yes" : "no")};
}

}  // namespace

std::vector<Outcome> run_properties() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<Outcome> out{criterion1(), criterion2(), criterion3(), criterion4(),
                           criterion5(), criterion6(), criterion7(), criterion8()};
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= 60.0) {
    for (Outcome& o : out) {
      o.pass = false;
      o.detail += fmt(" [property suite took %.1f s, limit 60 s]", secs);
    }
  }
  return out;
}

}  // namespace vc::acceptance
