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

#ifndef VCLASS_TOOLS_CLI_CONFIG_HPP_
#define VCLASS_TOOLS_CLI_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vclass/datagen.hpp"
#include "vclass/trainer.hpp"

namespace vc::cli {

// Bad configuration. line() is 1-based within source(), or 0 for flags.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, std::size_t line, const std::string& what);

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

struct RunConfig {
  TrainConfig train;
  std::string data = "synthetic3";  // synthetic3 | mnist:<dir>
  std::uint64_t data_seed = 1;
  double validation_fraction = 0.1;  // carved from the IDX train split
  std::size_t subsample = 0;         // > 0: keep this many train rows
  bool stratified = true;
  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> checkpoint;  // default: <out>/checkpoint.txt
  std::string model_name;                            // default: objective name
  std::vector<double> eps{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  bool temperature = true;  // fit a temperature on validation rows in eval
  bool shift = false;       // corruption sweep in eval
  std::string ood;          // "", "noise" or "corrupt:<kind>:<intensity>"
  std::string latent_split = "test";

  std::filesystem::path checkpoint_path() const;
  std::string resolved_model_name() const;
};

// Applies one `key = value` assignment. Throws ConfigError.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value,
                   const std::string& source, std::size_t line);

// Flat `key = value` lines; `#` starts a comment; blank lines are ignored.
void apply_config_text(RunConfig& config, std::string_view text, const std::string& source);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

// Every key with its resolved value, one `key = value` line each.
std::string format_run_config(const RunConfig& config);

// Dataset named by config.data, with validation rows and optional
// subsampling applied.
Dataset load_data(const RunConfig& config);

}  // namespace vc::cli

#endif  // VCLASS_TOOLS_CLI_CONFIG_HPP_
