// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/model/brain_diffuser.hpp"

#include <cmath>

#include "braindiff/core/error.hpp"

namespace bd {

void ModelConfig::validate() const {
  fenet.validate();
  autoencoder.validate();
  unet.validate();
  condition.validate();
  if (gcn.hidden == 0) throw ArgumentError("gcn hidden width must be positive");
  if (schedule_steps == 0) throw ArgumentError("schedule_T must be positive");
}

Shape ModelConfig::latent_shape() const {
  const auto s = autoencoder.latent_shape();
  return {s[0], s[1], s[2]};
}

ModelConfig ModelConfig::desk() { return {}; }

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.fenet = FenetConfig::tiny();
  c.autoencoder = AutoencoderConfig::tiny();
  c.unet = UNetConfig::tiny();
  c.condition = {2, 16, false};
  c.gcn = {8};
  c.schedule_steps = 50;
  return c;
}

bool ModelConfig::operator==(const ModelConfig& o) const {
  return fenet.stem_channels == o.fenet.stem_channels && fenet.stem_stride == o.fenet.stem_stride &&
         fenet.channels_per_block == o.fenet.channels_per_block &&
         fenet.block_stride == o.fenet.block_stride && fenet.pool_bins == o.fenet.pool_bins &&
         autoencoder.latent_channels == o.autoencoder.latent_channels &&
         autoencoder.hidden_channels == o.autoencoder.hidden_channels &&
         autoencoder.downsample_levels == o.autoencoder.downsample_levels &&
         unet.base_channels == o.unet.base_channels && unet.time_dim == o.unet.time_dim &&
         unet.attention_dim == o.unet.attention_dim && condition.tokens == o.condition.tokens &&
         condition.dim == o.condition.dim && condition.use_logit_token == o.condition.use_logit_token &&
         gcn.hidden == o.gcn.hidden && schedule_steps == o.schedule_steps;
}

BrainDiffuser::BrainDiffuser(const ModelConfig& config, std::uint64_t seed)
    : config_((config.validate(), config)),
      init_rng_(seed),
      schedule_(NoiseSchedule::standard(config_.schedule_steps)),
      fenet_(config_.fenet, params_, init_rng_),
      encoder_(config_.autoencoder, params_, init_rng_),
      decoder_(config_.autoencoder, params_, init_rng_),
      condition_(config_.condition, params_, init_rng_),
      denoiser_(config_.unet, config_.autoencoder.latent_channels, config_.condition.dim, params_,
                init_rng_),
      gcn_(config_.gcn, params_, init_rng_) {}

NoisePredictor BrainDiffuser::predictor() const {
  return [this](const Tensor& z, std::size_t t, const Tensor& ctx) { return denoiser_.forward(z, t, ctx); };
}

BrainDiffuser::Reconstruction BrainDiffuser::reconstruct(const DtiVolume& volume) const {
  Reconstruction r;
  r.features = fenet_.forward(volume);
  r.latent = encoder_.forward(r.features);
  r.network = decoder_.forward(r.latent);
  r.logits = gcn_.logits(r.network);
  return r;
}

Tensor BrainDiffuser::context(DiagnosticClass label, const Tensor& logits) const {
  return condition_.forward(label, logits);
}

ConnectivityMatrix BrainDiffuser::generate(DiagnosticClass label, Rng& rng) const {
  NoGradGuard guard;
  return ddpm_sample(config_.latent_shape(), context(label), schedule_, predictor(), decoder_, rng);
}

ConnectivityMatrix BrainDiffuser::generate_from(const DtiVolume& volume, DiagnosticClass label,
                                                double strength, Rng& rng) const {
  if (!(strength > 0.0 && strength <= 1.0))
    throw ArgumentError("generation strength must be in (0, 1], got " + std::to_string(strength));
  NoGradGuard guard;
  const Reconstruction r = reconstruct(volume);
  const std::size_t t0 = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(strength * double(schedule_.steps()))));
  const Shape shape = r.latent.shape();
  const Tensor noisy = q_sample(r.latent, t0, Tensor::from(shape, rng.normals(shape_numel(shape))), schedule_);
  const Tensor ctx = context(label, config_.condition.use_logit_token ? r.logits : Tensor());
  return decoder_.decode(reverse_chain(noisy, t0, ctx, schedule_, predictor(), rng));
}

ConnectivityMatrix BrainDiffuser::reconstruct_network(const DtiVolume& volume) const {
  NoGradGuard guard;
  return to_network(reconstruct(volume).network);
}

}  // namespace bd
