// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/training/optimizer.hpp"

#include <cmath>

#include "braindiff/core/error.hpp"
#include "braindiff/model/brain_diffuser.hpp"

namespace bd {

AdamState AdamState::zeros(const ParameterSet& params) {
  AdamState s;
  for (const auto& [_, t] : params.items()) {
    s.first.emplace_back(t.numel(), 0.0);
    s.second.emplace_back(t.numel(), 0.0);
  }
  return s;
}

std::string parameter_group(const std::string& name) {
  for (auto g : kParameterGroups)
    if (name.starts_with(g)) return std::string(g.substr(0, g.size() - 1));
  return {};
}

void audit_parameter_groups(const ParameterSet& params) {
  std::array<std::size_t, kParameterGroups.size()> seen{};
  for (const auto& [name, t] : params.items()) {
    std::size_t k = 0;
    while (k < kParameterGroups.size() && !name.starts_with(kParameterGroups[k])) ++k;
    if (k == kParameterGroups.size()) throw StateError("parameter '" + name + "' belongs to no declared group");
    ++seen[k];
    if (t.grad().size() != t.numel()) throw StateError("parameter '" + name + "' received no gradient");
  }
  for (std::size_t k = 0; k < seen.size(); ++k)
    if (seen[k] == 0) throw StateError("parameter group '" + std::string(kParameterGroups[k]) + "' is empty");
}

double clip_gradients(ParameterSet& params, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, t] : params.items()) {
    for (double g : t.grad()) {
      if (!std::isfinite(g))
        throw NumericError("non-finite gradient in parameter '" + name + "' (group " + parameter_group(name) + ")");
      sq += g * g;
    }
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (const auto& [_, t] : params.items()) {
      Tensor h = t;
      for (double& g : h.mutable_grad()) g *= s;
    }
  }
  return norm;
}

double adam_step(ParameterSet& params, AdamState& state, const AdamConfig& c) {
  const auto& items = params.items();
  if (state.first.size() != items.size() || state.second.size() != items.size())
    throw StateError("optimizer state does not match the parameter set");
  const double norm = clip_gradients(params, c.grad_clip);
  ++state.step;
  const double correct1 = 1.0 - std::pow(c.beta1, double(state.step));
  const double correct2 = 1.0 - std::pow(c.beta2, double(state.step));
  for (std::size_t k = 0; k < items.size(); ++k) {
    Tensor t = items[k].second;
    if (t.grad().empty()) continue;
    auto value = t.mutable_data();
    auto grad = t.grad();
    auto& m = state.first[k];
    auto& v = state.second[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grad[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
      value[i] -= c.learning_rate * (m[i] / correct1) / (std::sqrt(v[i] / correct2) + c.epsilon);
    }
  }
  return norm;
}

}  // namespace bd
