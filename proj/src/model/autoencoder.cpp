// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/model/autoencoder.hpp"

#include "braindiff/core/error.hpp"
#include "braindiff/model/fenet.hpp"

namespace bd {
namespace {

std::size_t Halve(std::size_t n) { return (n - 1) / 2 + 1; }  // k3, pad 1, stride 2

// (C, H, W) <-> (C, 1, H, W) for the 2-D convolutions.
Tensor AsGrid(const Tensor& x) { return ops::reshape(x, {x.dim(0), 1, x.dim(1), x.dim(2)}); }
Tensor AsImage(const Tensor& x) { return ops::reshape(x, {x.dim(0), x.dim(2), x.dim(3)}); }

}  // namespace

void AutoencoderConfig::validate() const {
  if (latent_channels == 0 || hidden_channels == 0)
    throw ArgumentError("autoencoder channel counts must be positive");
  if (downsample_levels == 0 || downsample_levels > 4)
    throw ArgumentError("autoencoder downsample_levels must be in [1, 4]");
}

std::array<std::size_t, 3> AutoencoderConfig::latent_shape() const {
  std::size_t h = kRegions, w = kFeatureDim;
  for (std::size_t l = 0; l < downsample_levels; ++l) h = Halve(h), w = Halve(w);
  return {latent_channels, h, w};
}

Encoder::Encoder(const AutoencoderConfig& config, ParameterSet& params, Rng& rng,
                 const std::string& prefix)
    : config_(config) {
  config_.validate();
  const std::size_t hid = config_.hidden_channels;
  input_ = nn::make_conv2d(params, prefix + ".input", 1, hid, 3, 1, rng);
  for (std::size_t l = 0; l < config_.downsample_levels; ++l) {
    const bool last = l + 1 == config_.downsample_levels;
    down_.push_back(nn::make_conv2d(params, prefix + ".down" + std::to_string(l), hid,
                                    last ? config_.latent_channels : hid, 3, 2, rng, !last));
  }
}

Tensor Encoder::forward(const Tensor& features) const {
  if (features.shape() != Shape{kRegions, kFeatureDim})
    throw DimensionError("encoder expects a (90, 80) feature matrix, got " +
                         shape_string(features.shape()));
  Tensor h = ops::relu(input_(ops::reshape(features, {1, 1, kRegions, kFeatureDim})));
  for (std::size_t l = 0; l < down_.size(); ++l) {
    h = down_[l](h);
    if (l + 1 < down_.size()) h = ops::relu(h);
  }
  // Unit-scale latents keep the forward process and the reconstruction
  // objective from trading off through the latent magnitude.
  return AsImage(ops::instance_norm(h, Tensor(), Tensor()));
}

Decoder::Decoder(const AutoencoderConfig& config, ParameterSet& params, Rng& rng,
                 const std::string& prefix)
    : config_(config) {
  config_.validate();
  const std::size_t hid = config_.hidden_channels;
  std::size_t h = kRegions, w = kFeatureDim;
  for (std::size_t l = 0; l < config_.downsample_levels; ++l) {
    extents_.push_back({h, w});
    h = Halve(h), w = Halve(w);
  }
  input_ = nn::make_conv2d(params, prefix + ".input", config_.latent_channels, hid, 3, 1, rng);
  for (std::size_t l = 0; l < config_.downsample_levels; ++l)
    up_.push_back(nn::make_conv2d(params, prefix + ".up" + std::to_string(l), hid, hid, 3, 1, rng));
  output_ = nn::make_conv2d(params, prefix + ".output", hid, 1, 3, 1, rng);
  row_head_ = nn::make_linear(params, prefix + ".row_head", kFeatureDim, kRegions, rng);
  // Lets the head fit the population's per-edge level; on sparse targets the
  // shared head alone saturates every logit toward zero.
  edge_bias_ = params.add(prefix + ".edge_bias", {kRegions, kRegions});
}

Tensor Decoder::forward(const Tensor& latent) const {
  const auto ls = config_.latent_shape();
  if (latent.shape() != Shape{ls[0], ls[1], ls[2]})
    throw DimensionError("decoder expects a " + shape_string({ls[0], ls[1], ls[2]}) +
                         " latent, got " + shape_string(latent.shape()));
  Tensor h = ops::relu(input_(AsGrid(latent)));
  for (std::size_t l = 0; l < up_.size(); ++l) {
    const auto& ext = extents_[extents_.size() - 1 - l];
    h = ops::relu(up_[l](ops::resize_nearest3d(h, {1, ext[0], ext[1]})));
  }
  Tensor rows = ops::reshape(output_(h), {kRegions, kFeatureDim});
  return ops::symmetrize_zero_diag(ops::sigmoid(ops::add(row_head_(rows), edge_bias_)));
}

ConnectivityMatrix Decoder::decode(const Tensor& latent) const {
  NoGradGuard guard;
  return to_network(forward(latent));
}

Tensor network_tensor(const ConnectivityMatrix& m) {
  return Tensor::from({kRegions, kRegions}, {m.weights().begin(), m.weights().end()});
}

ConnectivityMatrix to_network(const Tensor& t) {
  if (t.shape() != Shape{kRegions, kRegions})
    throw DimensionError("network tensor must be (90, 90), got " + shape_string(t.shape()));
  return ConnectivityMatrix({t.data().begin(), t.data().end()});
}

}  // namespace bd
