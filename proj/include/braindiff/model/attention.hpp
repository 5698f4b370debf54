// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>

#include "braindiff/core/nn.hpp"

namespace bd {

/// Learnable maps of one attention site: query (d, d_in), key and value
/// (d, d_context).
struct AttentionProjections {
  Tensor query;
  Tensor key;
  Tensor value;

  std::size_t inner_dim() const { return query.dim(0); }
};

AttentionProjections make_attention_projections(ParameterSet& params, const std::string& name,
                                                std::size_t input_dim, std::size_t context_dim,
                                                std::size_t inner_dim, Rng& rng);

/// softmax(Q K^T / sqrt(d)) for Q = x Wq^T, K = context Wk^T. x: (N, d_in),
/// context: (M, d_context). Returns (N, M).
Tensor attention_weights(const Tensor& x, const Tensor& context, const AttentionProjections& proj);

/// attention_weights(...) * V with V = context Wv^T; (N, d). Throws
/// DimensionError naming the projection that does not fit.
Tensor cross_attention(const Tensor& x, const Tensor& context, const AttentionProjections& proj);

/// Called with the (N, M) weight matrix of every attention evaluation.
using AttentionObserver = std::function<void(const Tensor& weights)>;

}  // namespace bd
