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

#include "vclass/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "vclass/distributions.hpp"
#include "vclass/errors.hpp"

namespace vc {

std::string csv_number(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os || !(os << text)) throw std::runtime_error("cannot write " + path.string());
}

std::string priors_csv(const VcModel& model) {
  std::string out = "class,dim,mean,variance,label_prob\n";
  const std::size_t d = model.latent_dim();
  const auto mu = model.priors.means().values();
  const auto lv = model.priors.log_vars().values();
  const auto pi = model.label_prior.probs();
  for (std::size_t y = 0; y < model.classes(); ++y) {
    for (std::size_t j = 0; j < d; ++j) {
      out += std::to_string(y) + ',' + std::to_string(j) + ',' + csv_number(mu[y * d + j]) + ',' +
             csv_number(std::exp(std::clamp(lv[y * d + j], kLogVarMin, kLogVarMax))) + ',' +
             csv_number(pi[y]) + '\n';
    }
  }
  return out;
}

std::string latents_csv(std::span<const double> latents, std::size_t dim,
                        std::span<const std::size_t> labels) {
  if (latents.size() != labels.size() * dim) throw DimensionError("latents_csv: one latent per label");
  std::string out = "id,label";
  for (std::size_t j = 0; j < dim; ++j) out += ",z" + std::to_string(j);
  out += '\n';
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += std::to_string(i) + ',' + std::to_string(labels[i]);
    for (std::size_t j = 0; j < dim; ++j) out += ',' + csv_number(latents[i * dim + j]);
    out += '\n';
  }
  return out;
}

std::string calibration_csv(const std::vector<ReliabilityBin>& table) {
  std::string out = "bin,lower,upper,count,mean_confidence,accuracy\n";
  for (std::size_t b = 0; b < table.size(); ++b) {
    const auto& r = table[b];
    out += std::to_string(b) + ',' + csv_number(r.lower) + ',' + csv_number(r.upper) + ',' +
           std::to_string(r.count) + ',' + csv_number(r.mean_confidence) + ',' +
           csv_number(r.accuracy) + '\n';
  }
  return out;
}

std::string robustness_csv(const std::vector<RobustnessRow>& rows) {
  std::string out = "model,eps,accuracy\n";
  for (const auto& r : rows) {
    out += r.model + ',' + csv_number(r.point.eps) + ',' + csv_number(r.point.accuracy) + '\n';
  }
  return out;
}

std::string ood_csv(const std::vector<OodRow>& rows) {
  std::string out = "in_dataset,out_dataset,score,auroc\n";
  for (const auto& r : rows) {
    out += r.in_dataset + ',' + r.out_dataset + ',' + r.score + ',' + csv_number(r.auroc) + '\n';
  }
  return out;
}

std::string shift_csv(const std::vector<ShiftResult>& rows) {
  std::string out = "corruption,intensity,accuracy,ece\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.kind)) + ',' + std::to_string(r.intensity) + ',' +
           csv_number(r.accuracy) + ',' + csv_number(r.ece) + '\n';
  }
  return out;
}

}  // namespace vc
