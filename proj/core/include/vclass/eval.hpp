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

// Evaluation: accuracy, calibration (ECE, temperature scaling), FGSM,
// corruption sweeps, OOD AUROC and latent-space diagnostics.

#ifndef VCLASS_EVAL_HPP_
#define VCLASS_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vclass/autodiff.hpp"
#include "vclass/datagen.hpp"
#include "vclass/model.hpp"

namespace vc {

struct PredictionSet {
  std::size_t classes = 0;
  std::vector<double> probs;  // [n x classes]
  std::vector<std::size_t> predicted;
  std::vector<std::size_t> labels;

  // Fills `predicted` by argmax (lowest index on ties).
  static PredictionSet from_probs(std::vector<double> probs, std::size_t classes,
                                  std::vector<std::size_t> labels);

  std::size_t size() const { return labels.size(); }
  double confidence(std::size_t i) const;
  double accuracy() const;
};

// Encoded latents [n x d], batched.
std::vector<double> encode_dataset(const VcModel& model, const Dataset& ds);
// log p(z|y) + log p(y) per row: [n x K].
std::vector<double> dataset_logits(const VcModel& model, const Dataset& ds);
// softmax(logits / temperature).
std::vector<double> softmax_rows(std::span<const double> logits, std::size_t classes,
                                 double temperature = 1.0);
PredictionSet predict_dataset(const VcModel& model, const Dataset& ds);
double accuracy(const VcModel& model, const Dataset& ds);

struct ReliabilityBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double mean_confidence = 0.0;
  double accuracy = 0.0;
};

// Equal-width bins over (0, 1] on max-probability confidence.
std::vector<ReliabilityBin> reliability_table(const PredictionSet& preds, std::size_t bins = 20);
double ece(const PredictionSet& preds, std::size_t bins = 20);

// Mean negative log-likelihood of softmax(logits / T).
double temperature_nll(std::span<const double> logits, std::size_t classes,
                       std::span<const std::size_t> labels, double temperature);
// T minimising validation NLL, by golden-section search on log T in [-3, 3].
double temperature_scale(std::span<const double> logits, std::size_t classes,
                         std::span<const std::size_t> labels);

// x_adv = clamp(x + eps * sign(d/dx [-log p(y|x)]), 0, 1), per row.
ad::Tensor fgsm(const VcModel& model, const ad::Tensor& x, std::span<const std::size_t> labels,
                double eps);

struct RobustnessPoint {
  double eps = 0.0;
  double accuracy = 0.0;
};
std::vector<RobustnessPoint> robustness_curve(const VcModel& model, const Dataset& ds,
                                              std::span<const double> eps_list);

// P(score_in > score_out) over all pairs, ties counted 1/2. Throws on empty input.
double ood_auroc(std::span<const double> scores_in, std::span<const double> scores_out);

// Probability of the predicted class.
std::vector<double> max_prob_scores(const VcModel& model, const Dataset& ds);
// log sum_y p(z|y) p(y) at z = f(x).
std::vector<double> mixture_log_density_scores(const VcModel& model, const Dataset& ds);

inline constexpr double kKlCap = 1e6;

// KL(N(m1, diag v1) || N(m2, diag v2)), capped at kKlCap (also when v1 has
// a zero entry).
double diag_gaussian_kl(std::span<const double> mean1, std::span<const double> var1,
                        std::span<const double> mean2, std::span<const double> var2);

struct ClassLatentReport {
  std::size_t label = 0;
  std::size_t count = 0;
  std::vector<double> mean;
  std::vector<double> variance;  // maximum-likelihood diagonal
  double kl_to_prior = 0.0;      // KL(fit || prior)
  double trace_ratio = 0.0;      // tr(fit) / tr(prior)
  bool degenerate = false;       // fewer than d + 1 samples
};

std::vector<ClassLatentReport> latent_diagnostics(std::span<const double> latents, std::size_t dim,
                                                  std::span<const std::size_t> labels,
                                                  const ClassPriorBank& priors);
std::vector<ClassLatentReport> latent_diagnostics(const VcModel& model, const Dataset& ds);

struct ShiftResult {
  Corruption kind{};
  int intensity = 0;
  double accuracy = 0.0;
  double ece = 0.0;
};

// Accuracy and ECE on every (corruption, intensity 1..5) copy of ds. Each
// cell uses its own rng stream derived from seed, so results do not depend
// on evaluation order. temperature rescales the model's logits.
std::vector<ShiftResult> corruption_sweep(const VcModel& model, const Dataset& ds,
                                          std::uint64_t seed, double temperature = 1.0);

}  // namespace vc

#endif  // VCLASS_EVAL_HPP_
