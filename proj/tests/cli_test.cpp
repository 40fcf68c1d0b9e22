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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "svg.hpp"
#include "vclass/errors.hpp"

namespace vc::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vclass_cli_" + name);
  fs::remove_all(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(VCLASS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Config, ParsesKeysCommentsAndBlankLines) {
  RunConfig c;
  apply_config_text(c, "# comment\n\nobjective = gm  # trailing\nbeta=2.5\nhidden_dims = 32, 16\n"
                       "eps = 0, 0.1\nstratified = false\ndata = mnist:/tmp/x\n", "cfg");
  EXPECT_EQ(c.train.objective, Objective::gm);
  EXPECT_EQ(c.train.beta, 2.5);
  EXPECT_EQ(c.train.hidden_dims, (std::vector<std::size_t>{32, 16}));
  EXPECT_EQ(c.eps, (std::vector<double>{0.0, 0.1}));
  EXPECT_FALSE(c.stratified);
  EXPECT_EQ(c.data, "mnist:/tmp/x");
  EXPECT_EQ(c.checkpoint_path(), fs::path("out") / "checkpoint.txt");
  EXPECT_EQ(c.resolved_model_name(), "gm");
}

TEST(Config, ErrorsCarryLineNumbers) {
  RunConfig c;
  try {
    apply_config_text(c, "beta = 1\n\nobjective = softmax\n", "run.cfg");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.source(), "run.cfg");
    EXPECT_NE(std::string(e.what()).find("run.cfg:3"), std::string::npos);
  }
  EXPECT_THROW(apply_config_text(c, "no_such_key = 1\n", "x"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "epochs = ten\n", "x"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "just words\n", "x"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "momentum = 1.5\n", "x"), ConfigError);
}

TEST(Config, FormattedConfigReparses) {
  RunConfig c;
  apply_config_text(c, "objective = ce\nbeta = 0.3\nlatent_dim = 2\nood = noise\n", "x");
  RunConfig back;
  apply_config_text(back, format_run_config(c), "echo");
  EXPECT_EQ(format_run_config(back), format_run_config(c));
}

TEST(Svg, ScatterHasPointsAndEllipses) {
  const ClassPriorBank bank(ad::Tensor::matrix(2, 2, {0, 0, 2, 2}), ad::Tensor::zeros({2, 2}));
  const std::vector<double> z{0.1, 0.2, 1.9, 2.1, 0.0, -0.3};
  const std::vector<std::size_t> labels{0, 1, 0};
  const std::string svg = latent_scatter_svg(z, 2, labels, bank);
  EXPECT_NE(svg.find("width=\"800\" height=\"800\""), std::string::npos);
  std::size_t circles = 0, ellipses = 0;
  for (std::size_t p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) ++circles;
  for (std::size_t p = svg.find("<ellipse"); p != std::string::npos; p = svg.find("<ellipse", p + 1)) ++ellipses;
  EXPECT_EQ(circles, 3u);
  EXPECT_EQ(ellipses, 4u);
  const ClassPriorBank bank3(ad::Tensor::zeros({2, 3}), ad::Tensor::zeros({2, 3}));
  EXPECT_THROW(latent_scatter_svg(std::vector<double>(6), 3, std::vector<std::size_t>{0, 1}, bank3),
               ContractError);
}

TEST(Cli, TrainHappyPathAndDeterminism) {
  const fs::path a = fresh_dir("train_a"), b = fresh_dir("train_b");
  const std::string common = "train --objective vc --beta 1.0 --latent-dim 2 --data synthetic3 --seed 7 --epochs 3 ";
  ASSERT_EQ(run(common + "--out " + a.string()), 0);
  for (const char* f : {"checkpoint.txt", "metrics.csv", "priors.csv", "latents.csv", "run_config.txt"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
  ASSERT_EQ(run(common + "--out " + b.string()), 0);
  EXPECT_EQ(slurp(a / "metrics.csv"), slurp(b / "metrics.csv"));
  EXPECT_EQ(slurp(a / "checkpoint.txt"), slurp(b / "checkpoint.txt"));
}

TEST(Cli, BadConfigurationExitsTwo) {
  const fs::path out = fresh_dir("bad");
  EXPECT_EQ(run("train --objective softmax --out " + out.string()), 2);
  EXPECT_EQ(run("train --set nonsense=1 --out " + out.string()), 2);
  EXPECT_EQ(run("train --config " + (out / "missing.cfg").string()), 2);
  EXPECT_EQ(run("eval --out " + out.string()), 2);
  EXPECT_EQ(run("attack --checkpoint " + (out / "none.txt").string() + " --out " + out.string()), 2);
  EXPECT_EQ(run("--bogus"), 2);
}

TEST(Cli, EvaluationCommandsWriteOutputs) {
  const fs::path out = fresh_dir("eval");
  ASSERT_EQ(run("train --objective ce --latent-dim 2 --epochs 2 --out " + out.string()), 0);
  ASSERT_EQ(run("eval --set ood=noise --out " + out.string()), 0);
  ASSERT_EQ(run("attack --set eps=0,0.1 --out " + out.string()), 0);
  ASSERT_EQ(run("export-latents --out " + out.string()), 0);
  for (const char* f : {"calibration.csv", "calibration_scaled.csv", "eval_summary.csv", "ood.csv", "robustness.csv",
                        "scatter.svg"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  EXPECT_EQ(slurp(out / "robustness.csv").substr(0, 19), "model,eps,accuracy\n");
}

TEST(Cli, ExportLatentsSkipsSvgAboveTwoDimensions) {
  const fs::path out = fresh_dir("latent3");
  ASSERT_EQ(run("train --latent-dim 3 --epochs 1 --out " + out.string()), 0);
  ASSERT_EQ(run("export-latents --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "latents.csv"));
  EXPECT_FALSE(fs::exists(out / "scatter.svg"));
}

TEST(Cli, OracleReportPasses) {
  const fs::path out = fresh_dir("oracle");
  EXPECT_EQ(run("oracle --out " + out.string()), 0);
  const std::string report = slurp(out / "oracle_report.csv");
  EXPECT_EQ(report.substr(0, report.find('\n')), "check,metric,value,tolerance,pass");
}

}  // namespace
}  // namespace vc::cli
