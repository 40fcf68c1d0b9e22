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

#include "vclass/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <string>

#include "vclass/errors.hpp"

namespace vc {
namespace {

// Columns of a random Gaussian [rows x cols] matrix, orthonormalised by
// modified Gram-Schmidt. Row-major output.
std::vector<double> random_orthonormal_columns(std::size_t rows, std::size_t cols, Rng& rng) {
  std::vector<double> m = standard_normal(rng, rows * cols);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t prev = 0; prev < c; ++prev) {
      double dot = 0.0;
      for (std::size_t r = 0; r < rows; ++r) dot += m[r * cols + c] * m[r * cols + prev];
      for (std::size_t r = 0; r < rows; ++r) m[r * cols + c] -= dot * m[r * cols + prev];
    }
    double norm = 0.0;
    for (std::size_t r = 0; r < rows; ++r) norm += m[r * cols + c] * m[r * cols + c];
    norm = std::sqrt(norm);
    if (norm < 1e-8) throw ContractError("observation map: degenerate random basis");
    for (std::size_t r = 0; r < rows; ++r) m[r * cols + c] /= norm;
  }
  return m;
}

std::vector<double> identity(std::size_t n) {
  std::vector<double> m(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m[i * n + i] = 1.0;
  return m;
}

}  // namespace

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "?";
}

std::vector<double> TrueLatentModel::posterior(std::span<const double> z) const {
  const std::size_t k = class_probs.size();
  if (z.size() != dim) throw DimensionError("posterior: latent has the wrong dimension");
  std::vector<double> logp(k);
  for (std::size_t y = 0; y < k; ++y) {
    double acc = std::log(class_probs[y]);
    for (std::size_t j = 0; j < dim; ++j) {
      const double v = variances[y * dim + j];
      const double diff = z[j] - means[y * dim + j];
      acc -= 0.5 * (diff * diff / v + std::log(2.0 * std::numbers::pi * v));
    }
    logp[y] = acc;
  }
  const double mx = *std::max_element(logp.begin(), logp.end());
  double total = 0.0;
  for (auto& v : logp) total += (v = std::exp(v - mx));
  for (auto& v : logp) v /= total;
  return logp;
}

// --- Dataset --------------------------------------------------------------

std::span<const double> Dataset::row(std::size_t i) const {
  return std::span<const double>(xs).subspan(i * num_features, num_features);
}

void Dataset::validate() const {
  const std::size_t n = ys.size();
  if (xs.size() != n * num_features) throw DimensionError("dataset: feature count does not match rows");
  if (splits.size() != n) throw DimensionError("dataset: one split tag per row required");
  for (std::size_t y : ys) {
    if (y >= num_classes) throw DimensionError("dataset: label " + std::to_string(y) + " out of range");
  }
  if (image_shape && image_shape->rows * image_shape->cols != num_features) {
    throw DimensionError("dataset: image shape does not match feature count");
  }
  if (!true_z.empty() && (!true_model || true_z.size() != n * true_model->dim)) {
    throw DimensionError("dataset: true latents do not match rows");
  }
}

ad::Tensor Dataset::features() const {
  return ad::Tensor::matrix(size(), num_features, xs);
}

ad::Tensor Dataset::features(std::span<const std::size_t> rows) const {
  std::vector<double> out;
  out.reserve(rows.size() * num_features);
  for (std::size_t r : rows) {
    if (r >= size()) throw DimensionError("dataset: row " + std::to_string(r) + " out of range");
    const auto src = row(r);
    out.insert(out.end(), src.begin(), src.end());
  }
  return ad::Tensor::matrix(rows.size(), num_features, std::move(out));
}

std::vector<std::size_t> Dataset::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (splits[i] == s) out.push_back(i);
  }
  return out;
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
  Dataset out;
  out.num_features = num_features;
  out.num_classes = num_classes;
  out.image_shape = image_shape;
  out.true_model = true_model;
  const std::size_t dz = true_model ? true_model->dim : 0;
  out.xs.reserve(rows.size() * num_features);
  for (std::size_t r : rows) {
    if (r >= size()) throw DimensionError("dataset: row " + std::to_string(r) + " out of range");
    const auto src = row(r);
    out.xs.insert(out.xs.end(), src.begin(), src.end());
    out.ys.push_back(ys[r]);
    out.splits.push_back(splits[r]);
    if (!true_z.empty()) {
      out.true_z.insert(out.true_z.end(), true_z.begin() + static_cast<std::ptrdiff_t>(r * dz),
                        true_z.begin() + static_cast<std::ptrdiff_t>((r + 1) * dz));
    }
  }
  return out;
}

Dataset Dataset::split(Split s) const { return select(indices(s)); }

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t y : ys) ++counts.at(y);
  return counts;
}

Dataset carve_validation(const Dataset& ds, double fraction, Rng& rng) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ContractError("validation fraction must be in [0, 1)");
  auto train_rows = ds.indices(Split::train);
  std::shuffle(train_rows.begin(), train_rows.end(), rng);
  const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(train_rows.size())));
  Dataset out = ds;
  for (std::size_t i = 0; i < take; ++i) out.splits[train_rows[i]] = Split::validation;
  return out;
}

Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.num_features != b.num_features) throw DimensionError("concat: feature counts differ");
  if (a.true_z.empty() != b.true_z.empty()) throw ContractError("concat: only one side has true latents");
  Dataset out = a;
  out.num_classes = std::max(a.num_classes, b.num_classes);
  if (a.image_shape.has_value() != b.image_shape.has_value()) out.image_shape.reset();
  out.xs.insert(out.xs.end(), b.xs.begin(), b.xs.end());
  out.ys.insert(out.ys.end(), b.ys.begin(), b.ys.end());
  out.splits.insert(out.splits.end(), b.splits.begin(), b.splits.end());
  out.true_z.insert(out.true_z.end(), b.true_z.begin(), b.true_z.end());
  return out;
}

// --- synthetic ------------------------------------------------------------

SyntheticSpec SyntheticSpec::synthetic3() {
  SyntheticSpec s;
  s.classes = 3;
  s.latent_dim = 2;
  s.class_probs = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  const double radius = 3.0;
  for (int y = 0; y < 3; ++y) {
    const double angle = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * y / 3.0;
    s.means.push_back(radius * std::cos(angle));
    s.means.push_back(radius * std::sin(angle));
  }
  s.variances.assign(6, 1.0);
  return s;
}

ObservationMap::ObservationMap(const SyntheticSpec& spec)
    : d_(spec.latent_dim), ambient_(spec.ambient_dim), tanh_strength_(spec.tanh_strength) {
  if (d_ == 0) throw ContractError("observation map: latent_dim must be positive");
  if (!(spec.tanh_strength > -1.0) || !std::isfinite(spec.tanh_strength)) {
    throw ContractError("observation map: tanh strength must exceed -1 to stay invertible");
  }
  if (ambient_ < d_) throw ContractError("observation map: ambient dim smaller than latent dim");
  if (spec.identity_lift && ambient_ != d_) {
    throw ContractError("observation map: identity lift needs ambient_dim == latent_dim");
  }
  Rng rng(spec.seed);
  rotation_ = spec.rotate ? random_orthonormal_columns(d_, d_, rng) : identity(d_);
  lift_ = spec.identity_lift ? identity(d_) : random_orthonormal_columns(ambient_, d_, rng);
}

std::vector<double> ObservationMap::apply(std::span<const double> z) const {
  if (z.size() != d_) throw DimensionError("observation map: latent has the wrong dimension");
  std::vector<double> v(d_, 0.0);
  for (std::size_t i = 0; i < d_; ++i) {
    double u = 0.0;
    for (std::size_t j = 0; j < d_; ++j) u += rotation_[i * d_ + j] * z[j];
    v[i] = u + tanh_strength_ * std::tanh(u);
  }
  std::vector<double> x(ambient_, 0.0);
  for (std::size_t r = 0; r < ambient_; ++r) {
    for (std::size_t j = 0; j < d_; ++j) x[r] += lift_[r * d_ + j] * v[j];
  }
  return x;
}

std::vector<double> ObservationMap::invert(std::span<const double> x) const {
  if (x.size() != ambient_) throw DimensionError("observation map: input has the wrong dimension");
  std::vector<double> u(d_, 0.0);
  for (std::size_t j = 0; j < d_; ++j) {
    double v = 0.0;
    for (std::size_t r = 0; r < ambient_; ++r) v += lift_[r * d_ + j] * x[r];
    // Solve u + a tanh(u) = v; the map is strictly increasing.
    double t = v / (1.0 + std::max(tanh_strength_, 0.0));
    for (int it = 0; it < 100; ++it) {
      const double th = std::tanh(t);
      const double step = (t + tanh_strength_ * th - v) / (1.0 + tanh_strength_ * (1.0 - th * th));
      t -= step;
      if (std::abs(step) < 1e-15 * (1.0 + std::abs(t))) break;
    }
    u[j] = t;
  }
  std::vector<double> z(d_, 0.0);
  for (std::size_t j = 0; j < d_; ++j) {
    for (std::size_t i = 0; i < d_; ++i) z[j] += rotation_[i * d_ + j] * u[i];
  }
  return z;
}

Dataset gen_hierarchical(const SyntheticSpec& spec, Rng& rng) {
  const std::size_t k = spec.classes, d = spec.latent_dim;
  if (k < 2) throw ContractError("synthetic spec: need at least two classes");
  if (spec.means.size() != k * d || spec.variances.size() != k * d) {
    throw DimensionError("synthetic spec: means and variances must be [K x d]");
  }
  for (double v : spec.variances) {
    if (!(v > 0.0)) throw ContractError("synthetic spec: variances must be positive");
  }
  std::vector<double> probs = spec.class_probs;
  if (probs.empty()) probs.assign(k, 1.0 / static_cast<double>(k));
  if (probs.size() != k) throw DimensionError("synthetic spec: one class probability per class");
  const double mass = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(mass - 1.0) > 1e-9 || std::any_of(probs.begin(), probs.end(), [](double p) { return p < 0; })) {
    throw ContractError("synthetic spec: class probabilities must form a distribution");
  }
  const ObservationMap h(spec);

  Dataset ds;
  ds.num_features = spec.ambient_dim;
  ds.num_classes = k;
  ds.true_model = TrueLatentModel{d, probs, spec.means, spec.variances};
  const std::size_t n = spec.n_train + spec.n_validation + spec.n_test;
  ds.xs.reserve(n * spec.ambient_dim);
  std::discrete_distribution<std::size_t> pick_class(probs.begin(), probs.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t y = pick_class(rng);
    std::vector<double> z(d);
    for (std::size_t j = 0; j < d; ++j) {
      z[j] = spec.means[y * d + j] + std::sqrt(spec.variances[y * d + j]) * normal(rng);
    }
    const auto x = h.apply(z);
    ds.xs.insert(ds.xs.end(), x.begin(), x.end());
    ds.true_z.insert(ds.true_z.end(), z.begin(), z.end());
    ds.ys.push_back(y);
    ds.splits.push_back(i < spec.n_train                       ? Split::train
                        : i < spec.n_train + spec.n_validation ? Split::validation
                                                               : Split::test);
  }
  return ds;
}

// --- corruption -----------------------------------------------------------

std::string_view to_string(Corruption c) {
  switch (c) {
    case Corruption::gaussian_noise: return "gaussian_noise";
    case Corruption::contrast: return "contrast";
    case Corruption::box_blur: return "box_blur";
  }
  return "?";
}

Corruption parse_corruption(std::string_view name) {
  for (Corruption c : kAllCorruptions) {
    if (name == to_string(c)) return c;
  }
  throw ContractError("unknown corruption '" + std::string(name) + "'");
}

double corruption_severity(Corruption kind, int intensity) {
  static constexpr double kNoise[] = {0.04, 0.08, 0.12, 0.18, 0.26};
  static constexpr double kContrast[] = {0.5, 0.4, 0.3, 0.2, 0.1};
  if (intensity < 1 || intensity > 5) throw ContractError("corruption intensity must be in 1..5");
  switch (kind) {
    case Corruption::gaussian_noise: return kNoise[intensity - 1];
    case Corruption::contrast: return kContrast[intensity - 1];
    case Corruption::box_blur: return static_cast<double>(intensity);
  }
  return 0.0;
}

Dataset corrupt(const Dataset& ds, Corruption kind, int intensity, Rng& rng,
                std::optional<double> severity_override) {
  if (!ds.image_shape) throw ContractError("corrupt: dataset is not image-shaped");
  const double severity = corruption_severity(kind, intensity);
  const double s = severity_override.value_or(severity);
  const std::size_t rows = ds.image_shape->rows, cols = ds.image_shape->cols;
  const std::size_t f = ds.num_features;
  Dataset out = ds;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> scratch(f);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    double* x = out.xs.data() + i * f;
    switch (kind) {
      case Corruption::gaussian_noise:
        for (std::size_t j = 0; j < f; ++j) x[j] += s * normal(rng);
        break;
      case Corruption::contrast: {
        const double mean = std::accumulate(x, x + f, 0.0) / static_cast<double>(f);
        for (std::size_t j = 0; j < f; ++j) x[j] = (x[j] - mean) * s + mean;
        break;
      }
      case Corruption::box_blur: {
        const long passes = std::lround(s);
        for (long p = 0; p < passes; ++p) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
              double acc = 0.0;
              int count = 0;
              for (std::size_t rr = r == 0 ? 0 : r - 1; rr <= std::min(rows - 1, r + 1); ++rr) {
                for (std::size_t cc = c == 0 ? 0 : c - 1; cc <= std::min(cols - 1, c + 1); ++cc) {
                  acc += x[rr * cols + cc];
                  ++count;
                }
              }
              scratch[r * cols + c] = acc / count;
            }
          }
          std::copy(scratch.begin(), scratch.end(), x);
        }
        break;
      }
    }
    for (std::size_t j = 0; j < f; ++j) x[j] = std::clamp(x[j], 0.0, 1.0);
  }
  return out;
}

Dataset subsample(const Dataset& ds, std::size_t n, Rng& rng, bool stratified) {
  if (n > ds.size()) {
    throw ContractError("subsample: requested " + std::to_string(n) + " rows from " +
                        std::to_string(ds.size()));
  }
  std::vector<std::size_t> chosen;
  if (!stratified) {
    chosen.resize(ds.size());
    std::iota(chosen.begin(), chosen.end(), std::size_t{0});
    std::shuffle(chosen.begin(), chosen.end(), rng);
    chosen.resize(n);
    return ds.select(chosen);
  }
  const std::size_t k = ds.num_classes;
  std::vector<std::vector<std::size_t>> by_class(k);
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.ys[i]].push_back(i);
  for (std::size_t y = 0; y < k; ++y) {
    const std::size_t quota = n / k + (y < n % k ? 1 : 0);
    if (quota > by_class[y].size()) {
      throw ContractError("subsample: class " + std::to_string(y) + " has only " +
                          std::to_string(by_class[y].size()) + " rows, need " + std::to_string(quota));
    }
    std::shuffle(by_class[y].begin(), by_class[y].end(), rng);
    chosen.insert(chosen.end(), by_class[y].begin(), by_class[y].begin() + static_cast<std::ptrdiff_t>(quota));
  }
  std::shuffle(chosen.begin(), chosen.end(), rng);
  return ds.select(chosen);
}

void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  char buf[32];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    os << to_string(ds.splits[i]) << ',' << ds.ys[i];
    for (double v : ds.row(i)) {
      std::snprintf(buf, sizeof buf, ",%.9g", v);
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace vc
