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

#ifndef VCLASS_TOOLS_CLI_COMMANDS_HPP_
#define VCLASS_TOOLS_CLI_COMMANDS_HPP_

#include <ostream>

#include "config.hpp"

namespace vc::cli {

// Each command writes only under config.out and returns a process exit code.
// Errors propagate as exceptions; main() maps them to exit codes.

// checkpoint.txt, metrics.csv, priors.csv, latents.csv, run_config.txt.
int cmd_train(const RunConfig& config, std::ostream& log);

// calibration.csv and eval_summary.csv; calibration_scaled.csv when a
// temperature is fitted; shift.csv and ood.csv when requested.
int cmd_eval(const RunConfig& config, std::ostream& log);

// robustness.csv over config.eps on the test split.
int cmd_attack(const RunConfig& config, std::ostream& log);

// oracle_report.csv. Returns 0 iff every check passes.
int cmd_oracle(const RunConfig& config, std::ostream& log);

// latents.csv, plus scatter.svg for two-dimensional latents.
int cmd_export_latents(const RunConfig& config, std::ostream& log);

}  // namespace vc::cli

#endif  // VCLASS_TOOLS_CLI_COMMANDS_HPP_
