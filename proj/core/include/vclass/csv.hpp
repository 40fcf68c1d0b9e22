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

// CSV exports shared by the command-line tools.

#ifndef VCLASS_CSV_HPP_
#define VCLASS_CSV_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vclass/eval.hpp"
#include "vclass/model.hpp"

namespace vc {

// Fixed-precision number formatting used by every export (%.10g).
std::string csv_number(double v);

// Writes text to path, throwing std::runtime_error on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

// class,dim,mean,variance,label_prob
std::string priors_csv(const VcModel& model);
// id,label,z0,...,z{d-1}
std::string latents_csv(std::span<const double> latents, std::size_t dim,
                        std::span<const std::size_t> labels);
// bin,lower,upper,count,mean_confidence,accuracy
std::string calibration_csv(const std::vector<ReliabilityBin>& table);

struct RobustnessRow {
  std::string model;
  RobustnessPoint point;
};
// model,eps,accuracy
std::string robustness_csv(const std::vector<RobustnessRow>& rows);

struct OodRow {
  std::string in_dataset;
  std::string out_dataset;
  std::string score;
  double auroc = 0.0;
};
// in_dataset,out_dataset,score,auroc
std::string ood_csv(const std::vector<OodRow>& rows);

// corruption,intensity,accuracy,ece
std::string shift_csv(const std::vector<ShiftResult>& rows);

}  // namespace vc

#endif  // VCLASS_CSV_HPP_
