// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "braindiff/core/rng.hpp"
#include "braindiff/core/tensor.hpp"
#include "braindiff/data/types.hpp"
#include "braindiff/model/schedule.hpp"

namespace bd {

class Decoder;

/// sqrt(alpha_bar_t) z0 + sqrt(1 - alpha_bar_t) eps. Differentiable in z0.
Tensor q_sample(const Tensor& z0, std::size_t t, const Tensor& eps, const NoiseSchedule& schedule);

/// (z_t, t, context) -> predicted noise.
using NoisePredictor = std::function<Tensor(const Tensor&, std::size_t, const Tensor&)>;

struct DiffusionDraw {
  std::size_t t = 1;
  Tensor eps;
};

/// t uniform on {1..T}, then eps ~ N(0, I) of the given shape.
DiffusionDraw draw_diffusion_noise(const Shape& shape, const NoiseSchedule& schedule, Rng& rng);

/// Mean squared error between the draw's noise and the prediction at z_t.
Tensor ldm_loss(const Tensor& z0, const Tensor& context, const NoiseSchedule& schedule,
                const NoisePredictor& predictor, const DiffusionDraw& draw);
Tensor ldm_loss(const Tensor& z0, const Tensor& context, const NoiseSchedule& schedule,
                const NoisePredictor& predictor, Rng& rng);

/// Ancestral steps t = from .. 1 starting at z (the latent at step `from`),
/// sigma_t^2 = beta_t and no noise on the last step. Runs without gradients.
Tensor reverse_chain(Tensor z, std::size_t from, const Tensor& context,
                     const NoiseSchedule& schedule, const NoisePredictor& predictor, Rng& rng);

/// z_T ~ N(0, I) run through the whole chain. Throws StateError when the
/// schedule is unconfigured.
Tensor ddpm_sample_latent(const Shape& latent_shape, const Tensor& context,
                          const NoiseSchedule& schedule, const NoisePredictor& predictor, Rng& rng);
ConnectivityMatrix ddpm_sample(const Shape& latent_shape, const Tensor& context,
                               const NoiseSchedule& schedule, const NoisePredictor& predictor,
                               const Decoder& decoder, Rng& rng);

}  // namespace bd
