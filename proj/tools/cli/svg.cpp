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

#include "svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "vclass/errors.hpp"

namespace vc::cli {
namespace {

constexpr double kSize = 800.0;
constexpr double kMargin = 40.0;

// Tableau-10 hues.
constexpr std::array<const char*, 10> kPalette{"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                               "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
                                               "#9c755f", "#bab0ac"};

std::string fmt(const char* pattern, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

}  // namespace

std::string latent_scatter_svg(std::span<const double> latents, std::size_t dim,
                               std::span<const std::size_t> labels, const ClassPriorBank& priors) {
  if (dim != 2 || priors.dim() != 2) throw ContractError("scatter needs two-dimensional latents");
  if (latents.size() != labels.size() * 2) throw DimensionError("latents and labels disagree");

  const auto means = priors.means().values();
  const auto log_vars = priors.log_vars().values();
  std::vector<double> sd(log_vars.size());
  for (std::size_t i = 0; i < sd.size(); ++i) {
    sd[i] = std::exp(0.5 * std::clamp(log_vars[i], kLogVarMin, kLogVarMax));
  }

  // Square data window covering every point and every 2-sigma ellipse.
  double lo[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  double hi[2] = {-lo[0], -lo[1]};
  auto extend = [&](std::size_t axis, double v) {
    if (!std::isfinite(v)) return;
    lo[axis] = std::min(lo[axis], v);
    hi[axis] = std::max(hi[axis], v);
  };
  for (std::size_t i = 0; i < latents.size(); ++i) extend(i % 2, latents[i]);
  for (std::size_t i = 0; i < means.size(); ++i) {
    extend(i % 2, means[i] - 2.0 * sd[i]);
    extend(i % 2, means[i] + 2.0 * sd[i]);
  }
  if (!(lo[0] <= hi[0])) lo[0] = hi[0] = lo[1] = hi[1] = 0.0;
  const double cx = 0.5 * (lo[0] + hi[0]);
  const double cy = 0.5 * (lo[1] + hi[1]);
  const double span = std::max({hi[0] - lo[0], hi[1] - lo[1], 1e-9});
  const double scale = (kSize - 2.0 * kMargin) / span;
  auto px = [&](double x) { return kSize / 2.0 + (x - cx) * scale; };
  auto py = [&](double y) { return kSize / 2.0 - (y - cy) * scale; };

  std::string out = fmt(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" viewBox=\"0 0 %g %g\">\n",
      kSize, kSize, kSize, kSize);
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<g fill-opacity=\"0.5\">\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double x = latents[2 * i];
    const double y = latents[2 * i + 1];
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    out += fmt("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2\" fill=\"%s\"/>\n", px(x), py(y),
               kPalette[labels[i] % kPalette.size()]);
  }
  out += "</g>\n<g fill=\"none\" stroke-width=\"2\">\n";
  for (std::size_t k = 0; k < priors.classes(); ++k) {
    const char* colour = kPalette[k % kPalette.size()];
    for (double n : {1.0, 2.0}) {
      out += fmt(
          "<ellipse cx=\"%.2f\" cy=\"%.2f\" rx=\"%.2f\" ry=\"%.2f\" stroke=\"%s\"%s/>\n",
          px(means[2 * k]), py(means[2 * k + 1]), n * sd[2 * k] * scale, n * sd[2 * k + 1] * scale,
          colour, n > 1.0 ? " stroke-dasharray=\"6 4\"" : "");
    }
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace vc::cli
