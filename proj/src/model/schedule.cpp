// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/model/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "braindiff/core/error.hpp"

namespace bd {

NoiseSchedule NoiseSchedule::from_betas(std::vector<double> betas) {
  if (betas.empty()) throw ArgumentError("noise schedule needs at least one step");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0 && betas[i] < 1.0))
      throw ArgumentError("beta_" + std::to_string(i + 1) + " = " + std::to_string(betas[i]) +
                          " is outside (0, 1)");
    if (i > 0 && betas[i] < betas[i - 1])
      throw ArgumentError("betas must be non-decreasing (step " + std::to_string(i + 1) + ")");
  }
  NoiseSchedule s;
  s.alpha_bar_.resize(betas.size());
  double prod = 1.0;
  for (std::size_t i = 0; i < betas.size(); ++i) s.alpha_bar_[i] = prod *= 1.0 - betas[i];
  s.beta_ = std::move(betas);
  return s;
}

NoiseSchedule NoiseSchedule::linear(std::size_t steps, double beta_start, double beta_end) {
  if (steps == 0) throw ArgumentError("noise schedule needs at least one step");
  std::vector<double> b(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double f = steps == 1 ? 0.0 : double(i) / double(steps - 1);
    b[i] = beta_start + f * (beta_end - beta_start);
  }
  return from_betas(std::move(b));
}

NoiseSchedule NoiseSchedule::standard(std::size_t steps) {
  if (steps == 0) throw ArgumentError("noise schedule needs at least one step");
  const double k = steps < 1000 ? 1000.0 / double(steps) : 1.0;
  NoiseSchedule s = linear(steps, std::min(1e-4 * k, 0.999), std::min(0.02 * k, 0.999));
  return s;
}

std::size_t NoiseSchedule::Index(std::size_t t) const {
  if (t < 1 || t > beta_.size())
    throw IndexError("diffusion step " + std::to_string(t) + " outside [1, " +
                     std::to_string(beta_.size()) + "]");
  return t - 1;
}

}  // namespace bd
