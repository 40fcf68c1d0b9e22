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

#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>

#include "svg.hpp"
#include "vclass/checkpoint.hpp"
#include "vclass/csv.hpp"
#include "vclass/errors.hpp"
#include "vclass/eval.hpp"
#include "vclass/oracle.hpp"

namespace vc::cli {
namespace {

namespace fs = std::filesystem;

void prepare_out(const RunConfig& config) {
  fs::create_directories(config.out);
  write_text_file(config.out / "run_config.txt", format_run_config(config));
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "validation") return Split::validation;
  return Split::test;
}

VcModel load_model(const RunConfig& config) {
  const fs::path path = config.checkpoint_path();
  if (!fs::is_regular_file(path)) {
    throw ConfigError("checkpoint", 0, "no checkpoint at " + path.string());
  }
  return load_checkpoint(path);
}

// Test split, checked against the model's input layout.
Dataset eval_rows(const RunConfig& config, const VcModel& model, Split split = Split::test) {
  Dataset ds = load_data(config).split(split);
  if (ds.num_features != model.encoder.input_dim() || ds.num_classes > model.classes()) {
    throw ConfigError("data", 0,
                      "dataset '" + config.data + "' does not match the checkpoint's input layout");
  }
  if (ds.size() == 0) throw ConfigError("data", 0, "no " + std::string(to_string(split)) + " rows");
  return ds;
}

Dataset uniform_noise_like(const Dataset& ds, std::uint64_t seed) {
  std::seed_seq seq{seed, std::uint64_t{0x6e6f697365}};
  Rng rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Dataset out = ds;
  for (double& v : out.xs) v = unit(rng);
  return out;
}

// "noise" or "corrupt:<kind>:<intensity>".
Dataset ood_rows(const RunConfig& config, const Dataset& test) {
  if (config.ood == "noise") return uniform_noise_like(test, config.data_seed);
  if (config.ood.rfind("corrupt:", 0) == 0) {
    const std::string rest = config.ood.substr(8);
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      const Corruption kind = parse_corruption(rest.substr(0, colon));
      const int intensity = std::stoi(rest.substr(colon + 1));
      Rng rng(config.data_seed);
      return corrupt(test, kind, intensity, rng);
    }
  }
  throw ConfigError("ood", 0, "expected noise or corrupt:<kind>:<intensity>, got '" + config.ood + "'");
}

void write_latents(const RunConfig& config, const VcModel& model, const Dataset& rows,
                   std::ostream& log, bool with_svg) {
  const std::vector<double> z = encode_dataset(model, rows);
  write_text_file(config.out / "latents.csv", latents_csv(z, model.latent_dim(), rows.ys));
  if (!with_svg) return;
  if (model.latent_dim() != 2) {
    log << "warning: latent dimension is " << model.latent_dim()
        << ", not 2; scatter.svg skipped\n";
    return;
  }
  write_text_file(config.out / "scatter.svg",
                  latent_scatter_svg(z, 2, rows.ys, model.priors));
}

}  // namespace

int cmd_train(const RunConfig& config, std::ostream& log) {
  config.train.validate();
  prepare_out(config);
  const Dataset ds = load_data(config);
  const fs::path checkpoint = config.out / "checkpoint.txt";

  TrainHooks hooks;
  hooks.checkpoint_path = checkpoint;
  hooks.on_epoch = [&log](const EpochMetrics& m) {
    log << "epoch " << m.epoch << " " << to_string(m.split) << " objective "
        << csv_number(m.parts.total) << " accuracy " << csv_number(m.accuracy) << "\n";
  };
  const TrainResult result = train(config.train, ds, hooks);

  write_metrics_csv(result.history, config.out / "metrics.csv");
  write_text_file(config.out / "priors.csv", priors_csv(result.model));
  const Split split = parse_split(config.latent_split);
  write_latents(config, result.model, ds.split(split), log, false);

  log << "best epoch " << result.best_epoch << ", " << result.steps << " steps\n";
  const Dataset test = ds.split(Split::test);
  if (test.size() > 0) log << "test accuracy " << csv_number(accuracy(result.model, test)) << "\n";
  return 0;
}

int cmd_eval(const RunConfig& config, std::ostream& log) {
  const VcModel model = load_model(config);
  prepare_out(config);
  const Dataset test = eval_rows(config, model);

  const std::vector<double> logits = dataset_logits(model, test);
  const PredictionSet preds =
      PredictionSet::from_probs(softmax_rows(logits, model.classes()), model.classes(), test.ys);
  write_text_file(config.out / "calibration.csv", calibration_csv(reliability_table(preds)));

  std::string summary = "metric,value\n";
  auto add = [&summary, &log](const std::string& name, double v) {
    summary += name + "," + csv_number(v) + "\n";
    log << name << " " << csv_number(v) << "\n";
  };
  add("accuracy", preds.accuracy());
  add("ece", ece(preds));

  double temperature = 1.0;
  if (config.temperature) {
    const Dataset validation = load_data(config).split(Split::validation);
    if (validation.size() == 0) {
      log << "warning: no validation rows; temperature scaling skipped\n";
    } else {
      const std::vector<double> val_logits = dataset_logits(model, validation);
      temperature = temperature_scale(val_logits, model.classes(), validation.ys);
      const PredictionSet scaled = PredictionSet::from_probs(
          softmax_rows(logits, model.classes(), temperature), model.classes(), test.ys);
      write_text_file(config.out / "calibration_scaled.csv",
                      calibration_csv(reliability_table(scaled)));
      add("temperature", temperature);
      add("accuracy_scaled", scaled.accuracy());
      add("ece_scaled", ece(scaled));
    }
  }
  write_text_file(config.out / "eval_summary.csv", summary);

  if (config.shift) {
    write_text_file(config.out / "shift.csv",
                    shift_csv(corruption_sweep(model, test, config.data_seed)));
  }
  if (!config.ood.empty()) {
    const Dataset out = ood_rows(config, test);
    std::vector<OodRow> rows;
    rows.push_back({config.data, config.ood, "max_prob",
                    ood_auroc(max_prob_scores(model, test), max_prob_scores(model, out))});
    rows.push_back({config.data, config.ood, "mixture_log_density",
                    ood_auroc(mixture_log_density_scores(model, test),
                              mixture_log_density_scores(model, out))});
    for (const OodRow& r : rows) log << "auroc " << r.score << " " << csv_number(r.auroc) << "\n";
    write_text_file(config.out / "ood.csv", ood_csv(rows));
  }
  return 0;
}

int cmd_attack(const RunConfig& config, std::ostream& log) {
  const VcModel model = load_model(config);
  prepare_out(config);
  const Dataset test = eval_rows(config, model);
  std::vector<RobustnessRow> rows;
  for (const RobustnessPoint& p : robustness_curve(model, test, config.eps)) {
    log << "eps " << csv_number(p.eps) << " accuracy " << csv_number(p.accuracy) << "\n";
    rows.push_back({config.resolved_model_name(), p});
  }
  write_text_file(config.out / "robustness.csv", robustness_csv(rows));
  return 0;
}

int cmd_oracle(const RunConfig& config, std::ostream& log) {
  prepare_out(config);
  const std::vector<OracleCheck> checks = run_oracle_suite(config.train.seed);
  write_oracle_report(checks, config.out / "oracle_report.csv");
  bool all = true;
  for (const OracleCheck& c : checks) {
    log << (c.pass ? "PASS " : "FAIL ") << c.name << " " << c.metric << " = " << csv_number(c.value)
        << " (tolerance " << csv_number(c.tolerance) << ")\n";
    all = all && c.pass;
  }
  return all ? 0 : 1;
}

int cmd_export_latents(const RunConfig& config, std::ostream& log) {
  const VcModel model = load_model(config);
  prepare_out(config);
  const Dataset rows = eval_rows(config, model, parse_split(config.latent_split));
  write_latents(config, model, rows, log, true);
  return 0;
}

}  // namespace vc::cli
