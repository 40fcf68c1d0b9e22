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

#include "vclass/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vclass/distributions.hpp"
#include "vclass/errors.hpp"

namespace vc {
namespace {

// Fixed chunk size so every pass over a dataset groups rows identically.
constexpr std::size_t kEvalChunk = 512;

template <typename Fn>
void for_each_chunk(const Dataset& ds, Fn&& fn) {
  for (std::size_t start = 0; start < ds.size(); start += kEvalChunk) {
    const std::size_t stop = std::min(ds.size(), start + kEvalChunk);
    std::vector<std::size_t> rows(stop - start);
    std::iota(rows.begin(), rows.end(), start);
    fn(rows);
  }
}

std::size_t argmax(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

double accuracy_of_logits(std::span<const double> logits, std::size_t k,
                          std::span<const std::size_t> labels) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (argmax(logits.subspan(i * k, k)) == labels[i]) ++correct;
  }
  return labels.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(labels.size());
}

std::vector<double> batch_logits(const VcModel& model, const ad::Tensor& x) {
  const ad::Tensor joint = model.log_joint(x);
  return {joint.values().begin(), joint.values().end()};
}

std::size_t bin_index(double confidence, std::size_t bins) {
  const double scaled = std::ceil(confidence * static_cast<double>(bins)) - 1.0;
  if (scaled <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(scaled), bins - 1);
}

}  // namespace

PredictionSet PredictionSet::from_probs(std::vector<double> probs, std::size_t classes,
                                        std::vector<std::size_t> labels) {
  if (classes == 0 || probs.size() != classes * labels.size()) {
    throw DimensionError("PredictionSet: need one probability vector per label");
  }
  PredictionSet p;
  p.classes = classes;
  p.probs = std::move(probs);
  p.labels = std::move(labels);
  p.predicted.resize(p.labels.size());
  for (std::size_t i = 0; i < p.labels.size(); ++i) {
    p.predicted[i] = argmax(std::span<const double>(p.probs).subspan(i * classes, classes));
  }
  return p;
}

double PredictionSet::confidence(std::size_t i) const { return probs[i * classes + predicted[i]]; }

double PredictionSet::accuracy() const {
  if (labels.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predicted[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

std::vector<double> encode_dataset(const VcModel& model, const Dataset& ds) {
  std::vector<double> out;
  out.reserve(ds.size() * model.latent_dim());
  for_each_chunk(ds, [&](const std::vector<std::size_t>& rows) {
    const ad::Tensor z = model.encoder.encode(ds.features(rows));
    out.insert(out.end(), z.values().begin(), z.values().end());
  });
  return out;
}

std::vector<double> dataset_logits(const VcModel& model, const Dataset& ds) {
  std::vector<double> out;
  out.reserve(ds.size() * model.classes());
  for_each_chunk(ds, [&](const std::vector<std::size_t>& rows) {
    const auto l = batch_logits(model, ds.features(rows));
    out.insert(out.end(), l.begin(), l.end());
  });
  return out;
}

std::vector<double> softmax_rows(std::span<const double> logits, std::size_t classes,
                                 double temperature) {
  if (classes == 0 || logits.size() % classes != 0) throw DimensionError("softmax_rows: ragged logits");
  if (!(temperature > 0.0)) throw ContractError("temperature must be positive");
  std::vector<double> out(logits.size());
  for (std::size_t start = 0; start < logits.size(); start += classes) {
    double mx = -INFINITY;
    for (std::size_t y = 0; y < classes; ++y) {
      out[start + y] = temperature == 1.0 ? logits[start + y] : logits[start + y] / temperature;
      mx = std::max(mx, out[start + y]);
    }
    double total = 0.0;
    for (std::size_t y = 0; y < classes; ++y) total += (out[start + y] = std::exp(out[start + y] - mx));
    for (std::size_t y = 0; y < classes; ++y) out[start + y] /= total;
  }
  return out;
}

PredictionSet predict_dataset(const VcModel& model, const Dataset& ds) {
  return PredictionSet::from_probs(softmax_rows(dataset_logits(model, ds), model.classes()),
                                   model.classes(), ds.ys);
}

double accuracy(const VcModel& model, const Dataset& ds) {
  return accuracy_of_logits(dataset_logits(model, ds), model.classes(), ds.ys);
}

std::vector<ReliabilityBin> reliability_table(const PredictionSet& preds, std::size_t bins) {
  if (bins == 0) throw ContractError("reliability_table: need at least one bin");
  std::vector<ReliabilityBin> table(bins);
  std::vector<double> conf_sum(bins, 0.0), correct(bins, 0.0);
  for (std::size_t b = 0; b < bins; ++b) {
    table[b].lower = static_cast<double>(b) / static_cast<double>(bins);
    table[b].upper = static_cast<double>(b + 1) / static_cast<double>(bins);
  }
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double c = preds.confidence(i);
    const std::size_t b = bin_index(c, bins);
    ++table[b].count;
    conf_sum[b] += c;
    correct[b] += preds.predicted[i] == preds.labels[i] ? 1.0 : 0.0;
  }
  for (std::size_t b = 0; b < bins; ++b) {
    if (table[b].count == 0) continue;
    const double n = static_cast<double>(table[b].count);
    table[b].mean_confidence = conf_sum[b] / n;
    table[b].accuracy = correct[b] / n;
  }
  return table;
}

double ece(const PredictionSet& preds, std::size_t bins) {
  if (preds.size() == 0) throw ContractError("ece: no predictions");
  double total = 0.0;
  for (const auto& b : reliability_table(preds, bins)) {
    if (b.count == 0) continue;
    total += static_cast<double>(b.count) * std::abs(b.accuracy - b.mean_confidence);
  }
  return total / static_cast<double>(preds.size());
}

double temperature_nll(std::span<const double> logits, std::size_t classes,
                       std::span<const std::size_t> labels, double temperature) {
  if (logits.size() != classes * labels.size()) throw DimensionError("temperature_nll: ragged logits");
  if (labels.empty()) throw ContractError("temperature_nll: no samples");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = logits.subspan(i * classes, classes);
    double mx = -INFINITY;
    for (double v : row) mx = std::max(mx, v / temperature);
    double s = 0.0;
    for (double v : row) s += std::exp(v / temperature - mx);
    total += mx + std::log(s) - row[labels[i]] / temperature;
  }
  return total / static_cast<double>(labels.size());
}

double temperature_scale(std::span<const double> logits, std::size_t classes,
                         std::span<const std::size_t> labels) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = -3.0, hi = 3.0;
  auto f = [&](double log_t) { return temperature_nll(logits, classes, labels, std::exp(log_t)); };
  double a = hi - ratio * (hi - lo), b = lo + ratio * (hi - lo);
  double fa = f(a), fb = f(b);
  while (hi - lo > 1e-9) {
    if (fa <= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - ratio * (hi - lo);
      fa = f(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + ratio * (hi - lo);
      fb = f(b);
    }
  }
  return std::exp(0.5 * (lo + hi));
}

ad::Tensor fgsm(const VcModel& model, const ad::Tensor& x, std::span<const std::size_t> labels,
                double eps) {
  if (!(eps >= 0.0)) throw ContractError("fgsm: eps must be non-negative");
  const bool single = x.rank() == 1;
  const ad::Tensor xb = single ? ad::reshape(x.detach(), {1, x.size()}) : x.detach();
  if (xb.dim(0) != labels.size()) throw DimensionError("fgsm: one label per input row required");
  if (eps == 0.0) return x.detach();

  const ad::Tensor leaf(xb.shape(), std::vector<double>(xb.values().begin(), xb.values().end()), true);
  const ad::Tensor z = model.encoder.encode(leaf);
  const ad::Tensor loss =
      -ad::sum(ad::pick(class_log_posterior(model.priors, model.label_prior.log_probs(), z), labels));
  ad::backward(loss);
  const auto g = leaf.grad();
  std::vector<double> out(leaf.values().begin(), leaf.values().end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double s = g[i] > 0.0 ? 1.0 : g[i] < 0.0 ? -1.0 : 0.0;
    out[i] = std::clamp(out[i] + eps * s, 0.0, 1.0);
  }
  for (auto p : model.parameters()) p.zero_grad();
  return ad::Tensor(x.shape(), std::move(out));
}

std::vector<RobustnessPoint> robustness_curve(const VcModel& model, const Dataset& ds,
                                              std::span<const double> eps_list) {
  std::vector<RobustnessPoint> out;
  for (double eps : eps_list) {
    std::vector<double> logits;
    logits.reserve(ds.size() * model.classes());
    for_each_chunk(ds, [&](const std::vector<std::size_t>& rows) {
      std::vector<std::size_t> y;
      for (std::size_t r : rows) y.push_back(ds.ys[r]);
      const ad::Tensor x = ds.features(rows);
      const auto l = batch_logits(model, eps == 0.0 ? x : fgsm(model, x, y, eps));
      logits.insert(logits.end(), l.begin(), l.end());
    });
    out.push_back({eps, accuracy_of_logits(logits, model.classes(), ds.ys)});
  }
  return out;
}

double ood_auroc(std::span<const double> scores_in, std::span<const double> scores_out) {
  if (scores_in.empty() || scores_out.empty()) throw ContractError("ood_auroc: empty score list");
  struct Entry {
    double score;
    bool in;
  };
  std::vector<Entry> all;
  all.reserve(scores_in.size() + scores_out.size());
  for (double s : scores_in) all.push_back({s, true});
  for (double s : scores_out) all.push_back({s, false});
  std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.score < b.score; });
  // Mann-Whitney U for the in-distribution scores, counted in half units so
  // ties stay exact.
  std::uint64_t half_units = 0;
  std::uint64_t out_below = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    std::uint64_t in_group = 0, out_group = 0;
    while (j < all.size() && all[j].score == all[i].score) {
      (all[j].in ? in_group : out_group) += 1;
      ++j;
    }
    half_units += in_group * (2 * out_below + out_group);
    out_below += out_group;
    i = j;
  }
  const double pairs = static_cast<double>(scores_in.size()) * static_cast<double>(scores_out.size());
  return static_cast<double>(half_units) / 2.0 / pairs;
}

std::vector<double> max_prob_scores(const VcModel& model, const Dataset& ds) {
  const std::size_t k = model.classes();
  const auto probs = softmax_rows(dataset_logits(model, ds), k);
  std::vector<double> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto row = std::span<const double>(probs).subspan(i * k, k);
    out[i] = *std::max_element(row.begin(), row.end());
  }
  return out;
}

std::vector<double> mixture_log_density_scores(const VcModel& model, const Dataset& ds) {
  const std::size_t k = model.classes();
  const auto logits = dataset_logits(model, ds);
  std::vector<double> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto row = std::span<const double>(logits).subspan(i * k, k);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - mx);
    out[i] = mx + std::log(s);
  }
  return out;
}

double diag_gaussian_kl(std::span<const double> mean1, std::span<const double> var1,
                        std::span<const double> mean2, std::span<const double> var2) {
  const std::size_t d = mean1.size();
  if (var1.size() != d || mean2.size() != d || var2.size() != d) {
    throw DimensionError("diag_gaussian_kl: dimension mismatch");
  }
  double kl = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    if (!(var1[j] > 0.0)) return kKlCap;
    if (!(var2[j] > 0.0)) throw DomainError("diag_gaussian_kl: reference variance must be positive");
    const double diff = mean1[j] - mean2[j];
    kl += 0.5 * (std::log(var2[j] / var1[j]) + (var1[j] + diff * diff) / var2[j] - 1.0);
  }
  return std::isfinite(kl) ? std::min(kl, kKlCap) : kKlCap;
}

std::vector<ClassLatentReport> latent_diagnostics(std::span<const double> latents, std::size_t dim,
                                                  std::span<const std::size_t> labels,
                                                  const ClassPriorBank& priors) {
  if (dim != priors.dim() || latents.size() != labels.size() * dim) {
    throw DimensionError("latent_diagnostics: latents do not match the prior dimension");
  }
  const std::size_t k = priors.classes();
  const auto mu = priors.means().values();
  const auto lv = priors.log_vars().values();
  std::vector<ClassLatentReport> out(k);
  for (std::size_t y = 0; y < k; ++y) {
    auto& r = out[y];
    r.label = y;
    r.mean.assign(dim, 0.0);
    r.variance.assign(dim, 0.0);
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= k) throw DimensionError("latent_diagnostics: label out of range");
    auto& r = out[labels[i]];
    ++r.count;
    for (std::size_t j = 0; j < dim; ++j) r.mean[j] += latents[i * dim + j];
  }
  for (auto& r : out) {
    if (r.count == 0) continue;
    for (auto& m : r.mean) m /= static_cast<double>(r.count);
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& r = out[labels[i]];
    for (std::size_t j = 0; j < dim; ++j) {
      const double diff = latents[i * dim + j] - r.mean[j];
      r.variance[j] += diff * diff;
    }
  }
  for (std::size_t y = 0; y < k; ++y) {
    auto& r = out[y];
    std::vector<double> pm(mu.begin() + static_cast<std::ptrdiff_t>(y * dim),
                           mu.begin() + static_cast<std::ptrdiff_t>((y + 1) * dim));
    std::vector<double> pv(dim);
    double prior_trace = 0.0, trace = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      pv[j] = std::exp(std::clamp(lv[y * dim + j], kLogVarMin, kLogVarMax));
      prior_trace += pv[j];
    }
    r.degenerate = r.count < dim + 1;
    if (r.count == 0) {
      r.kl_to_prior = kKlCap;
      continue;
    }
    for (auto& v : r.variance) {
      v /= static_cast<double>(r.count);
      trace += v;
    }
    r.trace_ratio = trace / prior_trace;
    r.kl_to_prior = diag_gaussian_kl(r.mean, r.variance, pm, pv);
  }
  return out;
}

std::vector<ClassLatentReport> latent_diagnostics(const VcModel& model, const Dataset& ds) {
  return latent_diagnostics(encode_dataset(model, ds), model.latent_dim(), ds.ys, model.priors);
}

std::vector<ShiftResult> corruption_sweep(const VcModel& model, const Dataset& ds,
                                          std::uint64_t seed, double temperature) {
  std::vector<ShiftResult> out;
  for (std::size_t kind_index = 0; kind_index < std::size(kAllCorruptions); ++kind_index) {
    for (int intensity = 1; intensity <= 5; ++intensity) {
      std::seed_seq seq{seed, static_cast<std::uint64_t>(kind_index), static_cast<std::uint64_t>(intensity)};
      Rng rng(seq);
      const Corruption kind = kAllCorruptions[kind_index];
      const Dataset shifted = corrupt(ds, kind, intensity, rng);
      const auto probs = softmax_rows(dataset_logits(model, shifted), model.classes(), temperature);
      const PredictionSet preds = PredictionSet::from_probs(probs, model.classes(), shifted.ys);
      out.push_back({kind, intensity, preds.accuracy(), ece(preds)});
    }
  }
  return out;
}

}  // namespace vc
