// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "braindiff/core/ops.hpp"
#include "braindiff/core/rng.hpp"
#include "braindiff/core/tensor.hpp"

namespace bd {

/// Ordered, named collection of trainable leaves. Insertion order is the
/// serialization order and the optimizer's iteration order.
class ParameterSet {
 public:
  /// Zero-initialized parameter.
  Tensor add(const std::string& name, Shape shape);
  /// Uniform(-bound, bound) initialized parameter.
  Tensor add_uniform(const std::string& name, Shape shape, double bound, Rng& rng);
  Tensor add_constant(const std::string& name, Shape shape, double value);

  const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }
  /// Throws ArgumentError for unknown names.
  Tensor get(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
};

namespace nn {

struct Conv {
  Tensor weight;
  Tensor bias;
  ops::ConvSpec spec;

  Tensor operator()(const Tensor& x) const { return ops::conv3d(x, weight, bias, spec); }
  std::size_t parameter_count() const { return weight.numel() + (bias.defined() ? bias.numel() : 0); }
};

/// 3-D convolution, cube kernel k, padding k/2. Drop the bias when a
/// normalization follows, since it would cancel out.
Conv make_conv3d(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
                 std::size_t k, std::size_t stride, std::size_t groups, Rng& rng,
                 bool with_bias = true);
/// 2-D convolution over (C, 1, H, W) grids, square kernel k, padding k/2.
Conv make_conv2d(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
                 std::size_t k, std::size_t stride, Rng& rng, bool with_bias = true);

struct Linear {
  Tensor weight;  // (out, in)
  Tensor bias;    // (out)

  Tensor operator()(const Tensor& x) const { return ops::linear(x, weight, bias); }
};

Linear make_linear(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
                   Rng& rng, bool with_bias = true);

struct InstanceNorm {
  Tensor gamma;
  Tensor beta;

  Tensor operator()(const Tensor& x) const { return ops::instance_norm(x, gamma, beta); }
};

InstanceNorm make_instance_norm(ParameterSet& params, const std::string& name, std::size_t channels);

}  // namespace nn
}  // namespace bd
