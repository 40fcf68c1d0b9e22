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

#include "config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "vclass/errors.hpp"

namespace vc::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Parser {
  std::string_view key;
  std::string_view value;
  const std::string& source;
  std::size_t line;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(source, line, std::string(key) + ": " + what);
  }

  double real() const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) fail("expected a number, got '" + std::string(value) + "'");
    return v;
  }

  double non_negative() const {
    const double v = real();
    if (!(v >= 0.0)) fail("must be non-negative");
    return v;
  }

  double positive() const {
    const double v = real();
    if (!(v > 0.0)) fail("must be positive");
    return v;
  }

  std::uint64_t integer() const {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      fail("expected a non-negative integer, got '" + std::string(value) + "'");
    }
    return v;
  }

  std::size_t count() const { return static_cast<std::size_t>(integer()); }

  bool boolean() const {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    fail("expected true or false, got '" + std::string(value) + "'");
  }

  template <typename T>
  std::vector<T> list(T (Parser::*item)() const) const {
    std::vector<T> out;
    std::string_view rest = value;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      Parser sub{key, trim(rest.substr(0, comma)), source, line};
      out.push_back((sub.*item)());
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    return out;
  }
};

std::string join(const std::vector<double>& values) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", values[i]);
    out += (i ? "," : "") + std::string(buf);
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + what : source + ": " + what),
      source_(source),
      line_(line) {}

std::filesystem::path RunConfig::checkpoint_path() const {
  return checkpoint.value_or(out / "checkpoint.txt");
}

std::string RunConfig::resolved_model_name() const {
  return model_name.empty() ? std::string(to_string(train.objective)) : model_name;
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value,
                   const std::string& source, std::size_t line) {
  const Parser p{key, trim(value), source, line};
  TrainConfig& t = c.train;
  if (key == "objective") {
    if (p.value != "ce" && p.value != "gm" && p.value != "vc") {
      p.fail("unknown objective '" + std::string(p.value) + "' (expected ce, gm or vc)");
    }
    t.objective = parse_objective(p.value);
  } else if (key == "beta") {
    t.beta = p.non_negative();
  } else if (key == "epochs") {
    t.epochs = p.count();
  } else if (key == "batch_size") {
    t.batch_size = p.count();
    if (t.batch_size == 0) p.fail("must be at least 1");
  } else if (key == "lr_theta") {
    t.lr_theta = p.non_negative();
  } else if (key == "lr_phi") {
    t.lr_phi = p.non_negative();
  } else if (key == "lr_pi") {
    t.lr_pi = p.non_negative();
  } else if (key == "lr_psi") {
    t.lr_psi = p.non_negative();
  } else if (key == "lr_decay_every") {
    t.lr_decay_every = p.count();
  } else if (key == "lr_decay_factor") {
    t.lr_decay_factor = p.positive();
    if (t.lr_decay_factor > 1.0) p.fail("must be at most 1");
  } else if (key == "momentum") {
    t.momentum = p.non_negative();
    if (t.momentum >= 1.0) p.fail("must be below 1");
  } else if (key == "weight_decay") {
    t.weight_decay = p.non_negative();
  } else if (key == "grad_clip") {
    t.grad_clip = p.non_negative();
  } else if (key == "early_stop_patience") {
    t.early_stop_patience = p.count();
  } else if (key == "seed") {
    t.seed = p.integer();
  } else if (key == "latent_dim") {
    t.latent_dim = p.count();
    if (t.latent_dim == 0) p.fail("must be at least 1");
  } else if (key == "hidden_dims") {
    t.hidden_dims = p.value.empty() ? std::vector<std::size_t>{} : p.list(&Parser::count);
  } else if (key == "activation") {
    if (p.value != "relu" && p.value != "tanh") p.fail("expected relu or tanh");
    t.activation = parse_activation(p.value);
  } else if (key == "data") {
    if (p.value != "synthetic3" && p.value.substr(0, 6) != "mnist:") {
      p.fail("expected synthetic3 or mnist:<dir>");
    }
    c.data = p.value;
  } else if (key == "data_seed") {
    c.data_seed = p.integer();
  } else if (key == "validation_fraction") {
    c.validation_fraction = p.non_negative();
    if (c.validation_fraction >= 1.0) p.fail("must be below 1");
  } else if (key == "subsample") {
    c.subsample = p.count();
  } else if (key == "stratified") {
    c.stratified = p.boolean();
  } else if (key == "out") {
    if (p.value.empty()) p.fail("must not be empty");
    c.out = std::string(p.value);
  } else if (key == "checkpoint") {
    c.checkpoint = std::string(p.value);
  } else if (key == "model_name") {
    c.model_name = p.value;
  } else if (key == "eps") {
    c.eps = p.list(&Parser::non_negative);
  } else if (key == "temperature") {
    c.temperature = p.boolean();
  } else if (key == "shift") {
    c.shift = p.boolean();
  } else if (key == "ood") {
    c.ood = p.value;
  } else if (key == "latent_split") {
    if (p.value != "train" && p.value != "validation" && p.value != "test") {
      p.fail("expected train, validation or test");
    }
    c.latent_split = p.value;
  } else {
    throw ConfigError(source, line, "unknown key '" + std::string(key) + "'");
  }
}

void apply_config_text(RunConfig& config, std::string_view text, const std::string& source) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(source, line_no, "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(source, line_no, "missing key before '='");
    apply_setting(config, key, line.substr(eq + 1), source, line_no);
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError(path.string(), 0, "cannot read config file");
  std::ostringstream ss;
  ss << is.rdbuf();
  apply_config_text(config, ss.str(), path.string());
}

std::string format_run_config(const RunConfig& c) {
  std::ostringstream os;
  os << format_config(c.train) << "data = " << c.data << "\n"
     << "data_seed = " << c.data_seed << "\n"
     << "validation_fraction = " << join({c.validation_fraction}) << "\n"
     << "subsample = " << c.subsample << "\n"
     << "stratified = " << (c.stratified ? "true" : "false") << "\n"
     << "out = " << c.out.string() << "\n"
     << "checkpoint = " << c.checkpoint_path().string() << "\n"
     << "model_name = " << c.resolved_model_name() << "\n"
     << "eps = " << join(c.eps) << "\n"
     << "temperature = " << (c.temperature ? "true" : "false") << "\n"
     << "shift = " << (c.shift ? "true" : "false") << "\n"
     << "ood = " << c.ood << "\n"
     << "latent_split = " << c.latent_split << "\n";
  return os.str();
}

Dataset load_data(const RunConfig& c) {
  Rng rng(c.data_seed);
  Dataset ds;
  if (c.data == "synthetic3") {
    ds = gen_hierarchical(SyntheticSpec::synthetic3(), rng);
  } else if (c.data.rfind("mnist:", 0) == 0) {
    ds = carve_validation(load_mnist_dir(c.data.substr(6)), c.validation_fraction, rng);
  } else {
    throw ConfigError("data", 0, "unknown dataset '" + c.data + "'");
  }
  if (c.subsample > 0) {
    const Dataset train = subsample(ds.split(Split::train), c.subsample, rng, c.stratified);
    ds = concat(concat(train, ds.split(Split::validation)), ds.split(Split::test));
  }
  return ds;
}

}  // namespace vc::cli
