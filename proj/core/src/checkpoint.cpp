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

#include "vclass/checkpoint.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

#include "vclass/errors.hpp"

namespace vc {
namespace {

constexpr const char* kMagic = "vclass-checkpoint";
constexpr int kVersion = 1;

void write_tensor(std::ostream& out, const std::string& name, const ad::Tensor& t) {
  out << "tensor " << name << ' ' << t.rank();
  for (std::size_t d : t.shape()) out << ' ' << d;
  out << '\n';
  char buf[32];
  const auto vals = t.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", vals[i]);
    out << (i ? " " : "") << buf;
  }
  out << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string line() {
    offset_ = static_cast<std::uint64_t>(std::max<std::streamoff>(0, in_.tellg()));
    std::string s;
    if (!std::getline(in_, s)) fail("unexpected end of checkpoint");
    return s;
  }

  [[noreturn]] void fail(const std::string& what) const { throw FormatError("checkpoint: " + what, offset_); }

  // "key v1 v2 ..." -> values, after checking the key.
  std::istringstream expect(const std::string& key) {
    std::istringstream is(line());
    std::string k;
    is >> k;
    if (k != key) fail("expected '" + key + "', found '" + k + "'");
    return is;
  }

  ad::Tensor tensor(const std::string& name) {
    std::istringstream head = expect("tensor");
    std::string found;
    std::size_t rank = 0;
    head >> found >> rank;
    if (found != name) fail("expected tensor " + name + ", found " + found);
    ad::Shape shape(rank);
    for (auto& d : shape) {
      if (!(head >> d)) fail("bad shape for " + name);
    }
    const std::string body = line();
    std::vector<double> vals;
    vals.reserve(ad::shape_size(shape));
    const char* p = body.data();
    const char* end = body.data() + body.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) fail("bad number in " + name);
      vals.push_back(v);
      p = next;
    }
    if (vals.size() != ad::shape_size(shape)) fail("wrong value count for " + name);
    return ad::Tensor(std::move(shape), std::move(vals), true);
  }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

}  // namespace

void write_checkpoint(const VcModel& model, std::ostream& out) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "activation " << to_string(model.encoder.activation()) << '\n';
  out << "layers";
  for (std::size_t d : model.encoder.layer_dims()) out << ' ' << d;
  out << '\n' << "classes " << model.classes() << '\n';
  const auto& w = model.encoder.weights();
  const auto& b = model.encoder.biases();
  for (std::size_t l = 0; l < w.size(); ++l) {
    write_tensor(out, "encoder.w" + std::to_string(l), w[l]);
    write_tensor(out, "encoder.b" + std::to_string(l), b[l]);
  }
  write_tensor(out, "priors.means", model.priors.means());
  write_tensor(out, "priors.log_vars", model.priors.log_vars());
  write_tensor(out, "label_prior.logits", model.label_prior.logits());
  write_tensor(out, "disc.weights", model.discriminators.weights());
  write_tensor(out, "disc.biases", model.discriminators.biases());
  out << "end\n";
}

void save_checkpoint(const VcModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  write_checkpoint(model, out);
}

VcModel read_checkpoint(std::istream& in) {
  Reader r(in);
  {
    std::istringstream head = r.expect(kMagic);
    int version = 0;
    head >> version;
    if (version != kVersion) r.fail("unsupported version " + std::to_string(version));
  }
  std::string act;
  r.expect("activation") >> act;
  Activation activation{};
  try {
    activation = parse_activation(act);
  } catch (const ContractError&) {
    r.fail("unknown activation " + act);
  }
  std::vector<std::size_t> dims;
  {
    std::istringstream is = r.expect("layers");
    for (std::size_t d; is >> d;) dims.push_back(d);
    if (dims.size() < 2) r.fail("need at least two layer dims");
  }
  std::size_t classes = 0;
  r.expect("classes") >> classes;

  std::vector<ad::Tensor> w, b;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    w.push_back(r.tensor("encoder.w" + std::to_string(l)));
    b.push_back(r.tensor("encoder.b" + std::to_string(l)));
  }
  VcModel model;
  try {
    model.encoder = MlpEncoder(std::move(w), std::move(b), activation);
    // Separate statements: argument evaluation order is unspecified.
    ad::Tensor means = r.tensor("priors.means");
    ad::Tensor log_vars = r.tensor("priors.log_vars");
    model.priors = ClassPriorBank(std::move(means), std::move(log_vars));
    model.label_prior = Categorical(r.tensor("label_prior.logits"));
    ad::Tensor disc_w = r.tensor("disc.weights");
    ad::Tensor disc_b = r.tensor("disc.biases");
    model.discriminators = DiscriminatorBank(std::move(disc_w), std::move(disc_b));
  } catch (const DimensionError& e) {
    r.fail(e.what());
  } catch (const ContractError& e) {
    r.fail(e.what());
  }
  if (model.encoder.layer_dims() != dims || model.classes() != classes) {
    r.fail("tensor shapes disagree with the header");
  }
  r.expect("end");
  return model;
}

VcModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace vc
