// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/model/denoiser.hpp"

#include <cmath>

#include "braindiff/core/error.hpp"

namespace bd {
namespace {

Denoiser::ResBlock MakeResBlock(ParameterSet& params, const std::string& name, std::size_t in,
                                std::size_t out, std::size_t time_dim, Rng& rng) {
  Denoiser::ResBlock b;
  b.conv1 = nn::make_conv2d(params, name + ".conv1", in, out, 3, 1, rng);
  b.conv2 = nn::make_conv2d(params, name + ".conv2", out, out, 3, 1, rng);
  if (in != out) b.skip = nn::make_conv2d(params, name + ".skip", in, out, 1, 1, rng);
  b.time_projection = nn::make_linear(params, name + ".time", time_dim, out, rng);
  return b;
}

Denoiser::AttentionSite MakeAttentionSite(ParameterSet& params, const std::string& name,
                                          std::size_t channels, std::size_t context_dim,
                                          std::size_t inner, Rng& rng) {
  Denoiser::AttentionSite s;
  s.projections = make_attention_projections(params, name, channels, context_dim, inner, rng);
  s.output = params.add_uniform(name + ".output", {channels, inner}, std::sqrt(3.0 / double(inner)), rng);
  return s;
}

}  // namespace

void ConditionConfig::validate() const {
  if (tokens < 1 || tokens > 2) throw ArgumentError("condition tokens must be 1 or 2");
  if (dim == 0) throw ArgumentError("condition dim must be positive");
}

ConditionEncoder::ConditionEncoder(const ConditionConfig& config, ParameterSet& params, Rng& rng,
                                   const std::string& prefix)
    : config_(config) {
  config_.validate();
  class_embedding_ = params.add_uniform(prefix + ".class_embedding", {kNumClasses, config_.dim}, 1.0, rng);
  if (config_.tokens == 2 && config_.use_logit_token)
    logit_projection_ = nn::make_linear(params, prefix + ".logit_projection", kNumClasses, config_.dim, rng);
}

Tensor ConditionEncoder::forward(DiagnosticClass label, const Tensor& logits) const {
  Tensor tokens = ops::row(class_embedding_, class_index(label));
  if (config_.tokens == 1) return tokens;
  Tensor second;
  if (config_.use_logit_token && logits.defined()) {
    if (logits.numel() != kNumClasses)
      throw DimensionError("logit token expects 3 logits, got " + shape_string(logits.shape()));
    second = logit_projection_(ops::reshape(logits, {1, kNumClasses}));
  } else {
    second = Tensor::zeros({1, config_.dim});
  }
  return ops::concat0(tokens, second);
}

void UNetConfig::validate() const {
  if (base_channels == 0 || attention_dim == 0) throw ArgumentError("unet widths must be positive");
  if (time_dim < 2 || time_dim % 2) throw ArgumentError("unet time_dim must be even and >= 2");
}

Tensor timestep_embedding(std::size_t t, std::size_t dim) {
  const std::size_t half = dim / 2;
  std::vector<double> v(dim, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    const double f = std::exp(-std::log(10000.0) * double(i) / double(half));
    v[i] = std::sin(double(t) * f);
    v[i + half] = std::cos(double(t) * f);
  }
  return Tensor::from({1, dim}, std::move(v));
}

Tensor Denoiser::ResBlock::operator()(const Tensor& x, const Tensor& time) const {
  Tensor h = conv1(ops::silu(x));
  h = ops::add_channel(h, ops::reshape(time_projection(time), {h.dim(0)}));
  h = conv2(ops::silu(h));
  return ops::add(h, skip.weight.defined() ? skip(x) : x);
}

Tensor Denoiser::AttentionSite::operator()(const Tensor& x, const Tensor& context,
                                           const AttentionObserver& observer) const {
  const std::size_t c = x.dim(0), n = x.numel() / c;
  const Tensor tokens = ops::transpose(ops::reshape(x, {c, n}));
  const Tensor w = attention_weights(tokens, context, projections);
  if (observer) observer(w);
  const Tensor attended = ops::matmul(w, ops::matmul_nt(context, projections.value));
  const Tensor mixed = ops::matmul_nt(attended, output);  // (N, c)
  return ops::add(x, ops::reshape(ops::transpose(mixed), x.shape()));
}

Denoiser::Denoiser(const UNetConfig& config, std::size_t latent_channels, std::size_t context_dim,
                   ParameterSet& params, Rng& rng, const std::string& prefix)
    : config_(config), latent_channels_(latent_channels), context_dim_(context_dim) {
  config_.validate();
  const std::size_t c = config_.base_channels, td = config_.time_dim, ad = config_.attention_dim;
  time_in_ = nn::make_linear(params, prefix + ".time_in", td, td, rng);
  time_out_ = nn::make_linear(params, prefix + ".time_out", td, td, rng);
  input_ = nn::make_conv2d(params, prefix + ".input", latent_channels, c, 3, 1, rng);
  res_top_in_ = MakeResBlock(params, prefix + ".res_top_in", c, c, td, rng);
  down_ = nn::make_conv2d(params, prefix + ".down", c, 2 * c, 3, 2, rng);
  res_mid_in_ = MakeResBlock(params, prefix + ".res_mid_in", 2 * c, 2 * c, td, rng);
  mid_attention_ = MakeAttentionSite(params, prefix + ".mid_attention", 2 * c, context_dim, ad, rng);
  res_mid_out_ = MakeResBlock(params, prefix + ".res_mid_out", 2 * c, 2 * c, td, rng);
  up_ = nn::make_conv2d(params, prefix + ".up", 2 * c, c, 3, 1, rng);
  merge_ = nn::make_conv2d(params, prefix + ".merge", 2 * c, c, 3, 1, rng);
  res_top_out_ = MakeResBlock(params, prefix + ".res_top_out", c, c, td, rng);
  top_attention_ = MakeAttentionSite(params, prefix + ".top_attention", c, context_dim, ad, rng);
  output_ = nn::make_conv2d(params, prefix + ".output", c, latent_channels, 3, 1, rng);
}

Tensor Denoiser::forward(const Tensor& z_t, std::size_t t, const Tensor& context) const {
  if (z_t.rank() != 3 || z_t.dim(0) != latent_channels_ || z_t.dim(1) < 2 || z_t.dim(2) < 2)
    throw DimensionError("denoiser expects a (" + std::to_string(latent_channels_) +
                         ", H, W) latent, got " + shape_string(z_t.shape()));
  if (context.rank() != 2 || context.dim(1) != context_dim_)
    throw DimensionError("denoiser context must be (M, " + std::to_string(context_dim_) + "), got " +
                         shape_string(context.shape()));
  const std::size_t h = z_t.dim(1), w = z_t.dim(2);
  const Tensor time = time_out_(ops::silu(time_in_(timestep_embedding(t, config_.time_dim))));

  const Tensor top = res_top_in_(input_(ops::reshape(z_t, {latent_channels_, 1, h, w})), time);
  Tensor mid = res_mid_in_(down_(top), time);
  mid = mid_attention_(mid, context, observer_);
  mid = res_mid_out_(mid, time);
  Tensor up = up_(ops::resize_nearest3d(mid, {1, h, w}));
  up = merge_(ops::concat0(up, top));
  up = res_top_out_(up, time);
  up = top_attention_(up, context, observer_);
  return ops::reshape(output_(ops::silu(up)), z_t.shape());
}

}  // namespace bd
