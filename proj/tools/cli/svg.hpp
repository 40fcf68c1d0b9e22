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

#ifndef VCLASS_TOOLS_CLI_SVG_HPP_
#define VCLASS_TOOLS_CLI_SVG_HPP_

#include <cstddef>
#include <span>
#include <string>

#include "vclass/distributions.hpp"

namespace vc::cli {

// 800x800 scatter of 2-d latents coloured by label, with the 1 and 2
// standard-deviation ellipses of every class prior. Labels beyond the
// palette reuse colours cyclically. Throws ContractError unless dim == 2.
std::string latent_scatter_svg(std::span<const double> latents, std::size_t dim,
                               std::span<const std::size_t> labels, const ClassPriorBank& priors);

}  // namespace vc::cli

#endif  // VCLASS_TOOLS_CLI_SVG_HPP_
