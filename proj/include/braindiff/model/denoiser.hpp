// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Time-conditional U-Net noise predictor over latents, with cross-attention
// to conditioning tokens at the bottleneck and at full resolution, and the
// token encoder that produces those tokens.

#include <array>
#include <string>

#include "braindiff/core/nn.hpp"
#include "braindiff/data/types.hpp"
#include "braindiff/model/attention.hpp"

namespace bd {

struct ConditionConfig {
  std::size_t tokens = 2;  // class token, then the classifier-logit token
  std::size_t dim = 64;
  /// When off (or no logits are supplied) the logit token is all zeros.
  bool use_logit_token = false;

  void validate() const;
};

class ConditionEncoder {
 public:
  ConditionEncoder(const ConditionConfig& config, ParameterSet& params, Rng& rng,
                   const std::string& prefix = "condition");
  const ConditionConfig& config() const { return config_; }
  /// (tokens, dim). logits, when defined, is a 3-vector.
  Tensor forward(DiagnosticClass label, const Tensor& logits = Tensor()) const;

 private:
  ConditionConfig config_;
  Tensor class_embedding_;  // (3, dim)
  nn::Linear logit_projection_;
};

struct UNetConfig {
  std::size_t base_channels = 16;
  std::size_t time_dim = 32;
  std::size_t attention_dim = 32;

  void validate() const;
  static UNetConfig desk() { return {}; }
  static UNetConfig tiny() { return {8, 16, 8}; }
};

/// Sinusoidal embedding of step t: sin(t f_i) then cos(t f_i),
/// f_i = 10000^(-i / (dim/2)).
Tensor timestep_embedding(std::size_t t, std::size_t dim);

class Denoiser {
 public:
  Denoiser(const UNetConfig& config, std::size_t latent_channels, std::size_t context_dim,
           ParameterSet& params, Rng& rng, const std::string& prefix = "denoiser");

  /// z_t: (C, H, W); context: (M, context_dim). Returns the predicted noise,
  /// same shape as z_t.
  Tensor forward(const Tensor& z_t, std::size_t t, const Tensor& context) const;

  void set_attention_observer(AttentionObserver observer) { observer_ = std::move(observer); }
  const AttentionProjections& bottleneck_attention() const { return mid_attention_.projections; }
  const AttentionProjections& top_attention() const { return top_attention_.projections; }

  struct ResBlock {
    nn::Conv conv1;
    nn::Conv conv2;
    nn::Conv skip;  // weight undefined when channels match
    nn::Linear time_projection;
    Tensor operator()(const Tensor& x, const Tensor& time) const;
  };
  struct AttentionSite {
    AttentionProjections projections;
    Tensor output;  // (channels, inner_dim)
    Tensor operator()(const Tensor& x, const Tensor& context, const AttentionObserver& observer) const;
  };

 private:
  UNetConfig config_;
  std::size_t latent_channels_;
  std::size_t context_dim_;
  nn::Linear time_in_;
  nn::Linear time_out_;
  nn::Conv input_;
  ResBlock res_top_in_;
  nn::Conv down_;
  ResBlock res_mid_in_;
  AttentionSite mid_attention_;
  ResBlock res_mid_out_;
  nn::Conv up_;
  nn::Conv merge_;
  ResBlock res_top_out_;
  AttentionSite top_attention_;
  nn::Conv output_;
  AttentionObserver observer_;
};

}  // namespace bd
