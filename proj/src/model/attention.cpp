// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/model/attention.hpp"

#include <cmath>

#include "braindiff/core/error.hpp"

namespace bd {
namespace {

void Require(bool ok, const std::string& what, const Tensor& got, const Shape& want_hint) {
  if (!ok)
    throw DimensionError("cross-attention: " + what + " has shape " + shape_string(got.shape()) +
                         ", expected " + shape_string(want_hint));
}

void CheckShapes(const Tensor& x, const Tensor& ctx, const AttentionProjections& p) {
  if (x.rank() != 2) throw DimensionError("cross-attention: query grid must be 2-D, got " + shape_string(x.shape()));
  if (ctx.rank() != 2) throw DimensionError("cross-attention: context must be 2-D, got " + shape_string(ctx.shape()));
  const std::size_t d = p.query.defined() && p.query.rank() == 2 ? p.query.dim(0) : 0;
  Require(d > 0 && p.query.dim(1) == x.dim(1), "query projection", p.query, {d, x.dim(1)});
  Require(p.key.rank() == 2 && p.key.dim(0) == d && p.key.dim(1) == ctx.dim(1), "key projection",
          p.key, {d, ctx.dim(1)});
  Require(p.value.rank() == 2 && p.value.dim(1) == ctx.dim(1), "value projection", p.value,
          {d, ctx.dim(1)});
}

}  // namespace

AttentionProjections make_attention_projections(ParameterSet& params, const std::string& name,
                                                std::size_t input_dim, std::size_t context_dim,
                                                std::size_t inner_dim, Rng& rng) {
  AttentionProjections p;
  p.query = params.add_uniform(name + ".query", {inner_dim, input_dim},
                               std::sqrt(3.0 / double(input_dim)), rng);
  p.key = params.add_uniform(name + ".key", {inner_dim, context_dim},
                             std::sqrt(3.0 / double(context_dim)), rng);
  p.value = params.add_uniform(name + ".value", {inner_dim, context_dim},
                               std::sqrt(3.0 / double(context_dim)), rng);
  return p;
}

Tensor attention_weights(const Tensor& x, const Tensor& context, const AttentionProjections& proj) {
  CheckShapes(x, context, proj);
  const Tensor q = ops::matmul_nt(x, proj.query);
  const Tensor k = ops::matmul_nt(context, proj.key);
  const double inv_sqrt_d = 1.0 / std::sqrt(double(proj.inner_dim()));
  return ops::softmax_rows(ops::scale(ops::matmul_nt(q, k), inv_sqrt_d));
}

Tensor cross_attention(const Tensor& x, const Tensor& context, const AttentionProjections& proj) {
  const Tensor w = attention_weights(x, context, proj);
  return ops::matmul(w, ops::matmul_nt(context, proj.value));
}

}  // namespace bd
