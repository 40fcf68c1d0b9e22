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

// Plain-text checkpoint format, version 1:
//
//   vclass-checkpoint 1
//   activation relu
//   layers 784 256 128 8
//   classes 10
//   tensor <name> <rank> <dim>...
//   <values, space separated, %.17g>
//   ...
//   end
//
// Tensor sections appear in the order encoder.w0, encoder.b0, ...,
// priors.means, priors.log_vars, label_prior.logits, disc.weights,
// disc.biases. Values round-trip bit-exactly.

#ifndef VCLASS_CHECKPOINT_HPP_
#define VCLASS_CHECKPOINT_HPP_

#include <filesystem>
#include <iosfwd>

#include "vclass/model.hpp"

namespace vc {

void write_checkpoint(const VcModel& model, std::ostream& out);
void save_checkpoint(const VcModel& model, const std::filesystem::path& path);

// Throws FormatError on malformed input.
VcModel read_checkpoint(std::istream& in);
VcModel load_checkpoint(const std::filesystem::path& path);

}  // namespace vc

#endif  // VCLASS_CHECKPOINT_HPP_
