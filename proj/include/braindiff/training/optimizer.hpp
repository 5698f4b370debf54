// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "braindiff/core/nn.hpp"

namespace bd {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double grad_clip = 1.0;  // global L2 norm; 0 disables
};

/// First and second moments per parameter, in ParameterSet order.
struct AdamState {
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;

  static AdamState zeros(const ParameterSet& params);
  bool operator==(const AdamState&) const = default;
};

/// Group prefix from kParameterGroups owning `name`; empty when none does.
std::string parameter_group(const std::string& name);

/// Throws StateError unless every parameter belongs to a declared group,
/// every group has parameters, and every parameter holds a gradient.
void audit_parameter_groups(const ParameterSet& params);

/// Scales all gradients so their global L2 norm is at most max_norm.
/// Returns the norm before scaling. Throws NumericError naming the first
/// parameter with a non-finite gradient.
double clip_gradients(ParameterSet& params, double max_norm);

/// One clipped Adam update with bias correction. Returns the pre-clip norm.
double adam_step(ParameterSet& params, AdamState& state, const AdamConfig& config);

}  // namespace bd
