// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Latent autoencoder around the diffusion model. The feature matrix is read
// as a one-channel 90x80 image; the encoder halves its extent per
// downsampling level and standardizes every latent channel, and the decoder
// mirrors it back to 90x80 before a row head produces the 90x90 network.

#include <array>
#include <string>
#include <vector>

#include "braindiff/core/nn.hpp"
#include "braindiff/data/types.hpp"

namespace bd {

struct AutoencoderConfig {
  std::size_t latent_channels = 4;
  std::size_t hidden_channels = 8;
  std::size_t downsample_levels = 1;

  void validate() const;
  /// (channels, height, width) of the latent for a 90x80 input.
  std::array<std::size_t, 3> latent_shape() const;
  static AutoencoderConfig desk() { return {}; }
  static AutoencoderConfig tiny() { return {2, 4, 2}; }
};

class Encoder {
 public:
  Encoder(const AutoencoderConfig& config, ParameterSet& params, Rng& rng,
          const std::string& prefix = "encoder");
  /// features: (90, 80). Returns the latent (C, H, W).
  Tensor forward(const Tensor& features) const;

 private:
  AutoencoderConfig config_;
  nn::Conv input_;
  std::vector<nn::Conv> down_;
};

class Decoder {
 public:
  Decoder(const AutoencoderConfig& config, ParameterSet& params, Rng& rng,
          const std::string& prefix = "decoder");
  /// latent (C, H, W) -> (90, 90) network tensor: sigmoid of the head output
  /// plus a learned per-edge offset, symmetrized, zero diagonal.
  Tensor forward(const Tensor& latent) const;
  /// Validated, detached copy of forward().
  ConnectivityMatrix decode(const Tensor& latent) const;

 private:
  AutoencoderConfig config_;
  std::vector<std::array<std::size_t, 2>> extents_;  // decoder input extent per level, outermost last
  nn::Conv input_;
  std::vector<nn::Conv> up_;
  nn::Conv output_;
  nn::Linear row_head_;
  Tensor edge_bias_;  // (90, 90)
};

/// Float64 (90, 90) tensor holding a network's weights.
Tensor network_tensor(const ConnectivityMatrix& m);
ConnectivityMatrix to_network(const Tensor& t);

}  // namespace bd
