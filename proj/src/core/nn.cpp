// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/core/nn.hpp"

#include <algorithm>
#include <cmath>

#include "braindiff/core/error.hpp"

namespace bd {

Tensor ParameterSet::add(const std::string& name, Shape shape) {
  return add_constant(name, std::move(shape), 0.0);
}

Tensor ParameterSet::add_constant(const std::string& name, Shape shape, double value) {
  if (contains(name)) throw ArgumentError("duplicate parameter name '" + name + "'");
  Tensor t = Tensor::full(std::move(shape), value, true);
  items_.emplace_back(name, t);
  return t;
}

Tensor ParameterSet::add_uniform(const std::string& name, Shape shape, double bound, Rng& rng) {
  Tensor t = add(name, std::move(shape));
  for (auto& v : t.mutable_data()) v = (2.0 * rng.uniform() - 1.0) * bound;
  return t;
}

Tensor ParameterSet::get(const std::string& name) const {
  for (const auto& [n, t] : items_)
    if (n == name) return t;
  throw ArgumentError("unknown parameter '" + name + "'");
}

bool ParameterSet::contains(const std::string& name) const {
  return std::any_of(items_.begin(), items_.end(), [&](const auto& it) { return it.first == name; });
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : items_) n += t.numel();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [_, t] : items_) t.zero_grad();
}

namespace nn {

Conv make_conv3d(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
                 std::size_t k, std::size_t stride, std::size_t groups, Rng& rng,
                 bool with_bias) {
  if (groups == 0 || in % groups || out % groups)
    throw DimensionError("conv '" + name + "': channels not divisible by groups");
  const std::size_t fan_in = (in / groups) * k * k * k;
  Conv conv;
  conv.weight = params.add_uniform(name + ".weight", {out, in / groups, k, k, k},
                                   std::sqrt(3.0 / static_cast<double>(fan_in)), rng);
  if (with_bias) conv.bias = params.add(name + ".bias", {out});
  conv.spec.stride = {stride, stride, stride};
  conv.spec.pad = {k / 2, k / 2, k / 2};
  conv.spec.groups = groups;
  return conv;
}

Conv make_conv2d(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
                 std::size_t k, std::size_t stride, Rng& rng, bool with_bias) {
  const std::size_t fan_in = in * k * k;
  Conv conv;
  conv.weight = params.add_uniform(name + ".weight", {out, in, 1, k, k},
                                   std::sqrt(3.0 / static_cast<double>(fan_in)), rng);
  if (with_bias) conv.bias = params.add(name + ".bias", {out});
  conv.spec.stride = {1, stride, stride};
  conv.spec.pad = {0, k / 2, k / 2};
  return conv;
}

Linear make_linear(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
                   Rng& rng, bool with_bias) {
  Linear lin;
  lin.weight = params.add_uniform(name + ".weight", {out, in},
                                  std::sqrt(3.0 / static_cast<double>(in)), rng);
  if (with_bias) lin.bias = params.add(name + ".bias", {out});
  return lin;
}

InstanceNorm make_instance_norm(ParameterSet& params, const std::string& name, std::size_t channels) {
  InstanceNorm norm;
  norm.gamma = params.add_constant(name + ".gamma", {channels}, 1.0);
  norm.beta = params.add(name + ".beta", {channels});
  return norm;
}

}  // namespace nn
}  // namespace bd
