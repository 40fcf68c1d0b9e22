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

// Datasets: synthetic hierarchical generators (y -> z -> x), IDX ingestion,
// corruption transforms and seeded subsampling.

#ifndef VCLASS_DATAGEN_HPP_
#define VCLASS_DATAGEN_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vclass/autodiff.hpp"
#include "vclass/distributions.hpp"

namespace vc {

enum class Split : std::uint8_t { train, validation, test };

std::string_view to_string(Split s);

struct ImageShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

// Ground-truth generative parameters kept alongside synthetic data, so the
// true p(y|x) is available to diagnostics.
struct TrueLatentModel {
  std::size_t dim = 0;
  std::vector<double> class_probs;  // [K]
  std::vector<double> means;        // [K x dim]
  std::vector<double> variances;    // [K x dim]

  // p(y | z) under the true model, for one latent.
  std::vector<double> posterior(std::span<const double> z) const;
};

struct Dataset {
  std::size_t num_features = 0;
  std::size_t num_classes = 0;
  std::vector<double> xs;  // row-major [n x num_features]
  std::vector<std::size_t> ys;
  std::vector<Split> splits;
  std::optional<ImageShape> image_shape;
  std::vector<double> true_z;  // [n x true_model->dim]; synthetic data only
  std::optional<TrueLatentModel> true_model;

  std::size_t size() const { return ys.size(); }
  std::span<const double> row(std::size_t i) const;
  // Checks the structural invariants; throws DimensionError.
  void validate() const;

  ad::Tensor features() const;
  ad::Tensor features(std::span<const std::size_t> rows) const;
  std::vector<std::size_t> indices(Split s) const;
  Dataset select(std::span<const std::size_t> rows) const;
  Dataset split(Split s) const;
  std::vector<std::size_t> class_counts() const;
};

// Moves a seeded fraction of the train rows to the validation split.
Dataset carve_validation(const Dataset& ds, double fraction, Rng& rng);

// Concatenates two datasets with the same feature layout.
Dataset concat(const Dataset& a, const Dataset& b);

// --- synthetic generator --------------------------------------------------

// Observation map x = h(z): u = R z (orthonormal R), v = u + a * tanh(u)
// (strictly increasing for a > -1), x = L v (L has orthonormal columns).
struct SyntheticSpec {
  std::size_t classes = 3;
  std::size_t latent_dim = 2;
  std::vector<double> class_probs;  // [K]; empty means uniform
  std::vector<double> means;        // [K x latent_dim]
  std::vector<double> variances;    // [K x latent_dim]
  bool rotate = true;
  double tanh_strength = 0.5;
  std::size_t ambient_dim = 16;
  bool identity_lift = false;  // requires ambient_dim == latent_dim
  std::size_t n_train = 3000;
  std::size_t n_validation = 600;
  std::size_t n_test = 1500;
  std::uint64_t seed = 1;  // fixes R and L; sampling uses the caller's rng

  // K = 3, 2-d latents, means on a radius-3 circle, unit variances,
  // 16-dim ambient space.
  static SyntheticSpec synthetic3();
};

class ObservationMap {
 public:
  // Throws ContractError when the configuration is not invertible.
  explicit ObservationMap(const SyntheticSpec& spec);

  std::vector<double> apply(std::span<const double> z) const;
  std::vector<double> invert(std::span<const double> x) const;
  std::size_t latent_dim() const { return d_; }
  std::size_t ambient_dim() const { return ambient_; }

 private:
  std::size_t d_;
  std::size_t ambient_;
  std::vector<double> rotation_;  // [d x d]
  std::vector<double> lift_;      // [ambient x d]
  double tanh_strength_;
};

Dataset gen_hierarchical(const SyntheticSpec& spec, Rng& rng);

// --- IDX ------------------------------------------------------------------

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// Reads big-endian IDX images (u8, [n, rows, cols]) and labels (u8, [n]).
// gzip-compressed files are read transparently. Pixels are scaled to [0, 1].
// Throws FormatError with the failing byte offset.
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path, Split split = Split::train);

// Loads train-* and t10k-* IDX pairs (optionally .gz) from a directory.
Dataset load_mnist_dir(const std::filesystem::path& dir);

void write_idx_images(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
                      std::span<const std::uint8_t> pixels);
void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels);

// --- corruption / subsampling ---------------------------------------------

enum class Corruption { gaussian_noise, contrast, box_blur };

std::string_view to_string(Corruption c);
Corruption parse_corruption(std::string_view name);
inline constexpr Corruption kAllCorruptions[] = {Corruption::gaussian_noise, Corruption::contrast,
                                                 Corruption::box_blur};

// Severity parameter for intensity 1..5:
//   gaussian_noise: noise sd        {0.04, 0.08, 0.12, 0.18, 0.26}
//   contrast:       contrast factor {0.5, 0.4, 0.3, 0.2, 0.1}
//   box_blur:       3x3 box passes  {1, 2, 3, 4, 5}
double corruption_severity(Corruption kind, int intensity);

// Corrupted copy with outputs clamped to [0, 1]; labels are untouched.
// severity_override replaces the table value.
Dataset corrupt(const Dataset& ds, Corruption kind, int intensity, Rng& rng,
                std::optional<double> severity_override = std::nullopt);

// n rows without replacement, uniformly or with equal per-class counts
// (the remainder going to the lowest class ids).
Dataset subsample(const Dataset& ds, std::size_t n, Rng& rng, bool stratified);

// One row per sample: split,label,features...
void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path);

}  // namespace vc

#endif  // VCLASS_DATAGEN_HPP_
