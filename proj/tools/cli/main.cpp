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

// vclass: train, evaluate, attack and inspect variational classifiers.
//
// Exit codes: 0 success, 1 failure (including a failed oracle check),
// 2 bad configuration or missing checkpoint, 3 numerical failure.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "vclass/errors.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> seed;
  std::optional<std::string> objective;
  std::optional<std::string> beta;
  std::optional<std::string> latent_dim;
  std::optional<std::string> out;
  std::optional<std::string> data;
  std::optional<std::string> epochs;
  std::optional<std::string> checkpoint;
  std::vector<std::string> set;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key = value config file");
  cmd->add_option("--seed", f.seed, "training seed");
  cmd->add_option("--objective", f.objective, "ce, gm or vc");
  cmd->add_option("--beta", f.beta, "weight of the latent KL term");
  cmd->add_option("--latent-dim", f.latent_dim, "latent dimension");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--data", f.data, "synthetic3 or mnist:<dir>");
  cmd->add_option("--epochs", f.epochs, "training epochs");
  cmd->add_option("--checkpoint", f.checkpoint, "checkpoint to read");
  cmd->add_option("--set", f.set, "extra key=value setting (repeatable)");
}

// Config file first, then flags, then --set entries in order.
vc::cli::RunConfig resolve(const Flags& f) {
  vc::cli::RunConfig c;
  if (!f.config.empty()) vc::cli::apply_config_file(c, f.config);
  auto flag = [&c](const std::optional<std::string>& v, const char* key, const char* name) {
    if (v) vc::cli::apply_setting(c, key, *v, name, 0);
  };
  flag(f.seed, "seed", "--seed");
  flag(f.objective, "objective", "--objective");
  flag(f.beta, "beta", "--beta");
  flag(f.latent_dim, "latent_dim", "--latent-dim");
  flag(f.out, "out", "--out");
  flag(f.data, "data", "--data");
  flag(f.epochs, "epochs", "--epochs");
  flag(f.checkpoint, "checkpoint", "--checkpoint");
  for (const std::string& kv : f.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw vc::cli::ConfigError("--set", 0, "expected key=value, got '" + kv + "'");
    vc::cli::apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1), "--set", 0);
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational classification: train, evaluate, attack and verify."};
  app.require_subcommand(1);

  Flags flags;
  using Command = int (*)(const vc::cli::RunConfig&, std::ostream&);
  const std::pair<const char*, Command> commands[] = {
      {"train", vc::cli::cmd_train},
      {"eval", vc::cli::cmd_eval},
      {"attack", vc::cli::cmd_attack},
      {"oracle", vc::cli::cmd_oracle},
      {"export-latents", vc::cli::cmd_export_latents},
  };
  const char* descriptions[] = {
      "train a model and write checkpoint, metrics, priors and latents",
      "accuracy, calibration, temperature scaling, corruption shift and OOD",
      "FGSM robustness curve",
      "brute-force checks of the objective's optima",
      "latent CSV and 2-d scatter SVG",
  };
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    subs.push_back(app.add_subcommand(commands[i].first, descriptions[i]));
    add_flags(subs.back(), flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const vc::cli::RunConfig config = resolve(flags);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) return commands[i].second(config, std::cout);
    }
    return 1;
  } catch (const vc::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const vc::ContractError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const vc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
