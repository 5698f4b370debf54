// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// The full generator and classifier: volume -> features -> latent -> network,
// the conditional denoiser acting on the latent, and the GCN on networks.
// One ParameterSet owns every trainable tensor, grouped by name prefix.

#include <array>
#include <string_view>

#include "braindiff/model/autoencoder.hpp"
#include "braindiff/model/denoiser.hpp"
#include "braindiff/model/diffusion.hpp"
#include "braindiff/model/fenet.hpp"
#include "braindiff/model/gcn.hpp"
#include "braindiff/model/schedule.hpp"

namespace bd {

struct ModelConfig {
  FenetConfig fenet;
  AutoencoderConfig autoencoder;
  UNetConfig unet;
  ConditionConfig condition;
  GcnConfig gcn;
  std::size_t schedule_steps = 1000;

  void validate() const;
  Shape latent_shape() const;
  static ModelConfig desk();
  static ModelConfig tiny();
  bool operator==(const ModelConfig&) const;
};

/// Name prefixes of the six parameter groups.
inline constexpr std::array<std::string_view, 6> kParameterGroups{
    "fenet.", "encoder.", "decoder.", "denoiser.", "condition.", "gcn."};

class BrainDiffuser {
 public:
  /// Parameters are initialized from `seed` alone.
  BrainDiffuser(const ModelConfig& config, std::uint64_t seed);
  BrainDiffuser(const BrainDiffuser&) = delete;
  BrainDiffuser& operator=(const BrainDiffuser&) = delete;

  const ModelConfig& config() const { return config_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  const NoiseSchedule& schedule() const { return schedule_; }

  const Fenet& fenet() const { return fenet_; }
  const Encoder& encoder() const { return encoder_; }
  const Decoder& decoder() const { return decoder_; }
  const Denoiser& denoiser() const { return denoiser_; }
  Denoiser& denoiser() { return denoiser_; }
  const ConditionEncoder& condition() const { return condition_; }
  const GcnClassifier& gcn() const { return gcn_; }

  NoisePredictor predictor() const;

  struct Reconstruction {
    Tensor features;  // (90, 80)
    Tensor latent;    // latent_shape()
    Tensor network;   // (90, 90)
    Tensor logits;    // (1, 3)
  };
  /// Differentiable path volume -> features -> latent -> network -> logits.
  Reconstruction reconstruct(const DtiVolume& volume) const;

  /// Conditioning tokens for label; `logits` feeds the logit token when the
  /// config enables it.
  Tensor context(DiagnosticClass label, const Tensor& logits = Tensor()) const;

  /// Pure generation: full reverse chain from noise, then decode.
  ConnectivityMatrix generate(DiagnosticClass label, Rng& rng) const;
  /// Subject-conditioned generation: the subject's latent is noised to step
  /// round(strength * T) and run back through the chain.
  ConnectivityMatrix generate_from(const DtiVolume& volume, DiagnosticClass label,
                                   double strength, Rng& rng) const;
  /// Reconstruction-path network without noise: decode(encode(fenet(x))).
  ConnectivityMatrix reconstruct_network(const DtiVolume& volume) const;
  ClassPrediction classify(const ConnectivityMatrix& network) const { return gcn_.classify(network); }

 private:
  ModelConfig config_;
  ParameterSet params_;
  Rng init_rng_;
  NoiseSchedule schedule_;
  Fenet fenet_;
  Encoder encoder_;
  Decoder decoder_;
  ConditionEncoder condition_;
  Denoiser denoiser_;
  GcnClassifier gcn_;
};

}  // namespace bd
