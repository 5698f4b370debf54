// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/model/diffusion.hpp"

#include <cmath>

#include "braindiff/core/error.hpp"
#include "braindiff/core/ops.hpp"
#include "braindiff/model/autoencoder.hpp"

namespace bd {

Tensor q_sample(const Tensor& z0, std::size_t t, const Tensor& eps, const NoiseSchedule& schedule) {
  const double ab = schedule.alpha_bar(t);
  if (eps.shape() != z0.shape())
    throw DimensionError("q_sample: noise " + shape_string(eps.shape()) + " vs latent " +
                         shape_string(z0.shape()));
  return ops::add(ops::scale(z0, std::sqrt(ab)), ops::scale(eps, std::sqrt(1.0 - ab)));
}

DiffusionDraw draw_diffusion_noise(const Shape& shape, const NoiseSchedule& schedule, Rng& rng) {
  if (!schedule.configured()) throw StateError("noise schedule is not configured");
  DiffusionDraw d;
  d.t = static_cast<std::size_t>(rng.integer(1, schedule.steps()));
  d.eps = Tensor::from(shape, rng.normals(shape_numel(shape)));
  return d;
}

Tensor ldm_loss(const Tensor& z0, const Tensor& context, const NoiseSchedule& schedule,
                const NoisePredictor& predictor, const DiffusionDraw& draw) {
  const Tensor z_t = q_sample(z0, draw.t, draw.eps, schedule);
  const Tensor pred = predictor(z_t, draw.t, context);
  if (pred.shape() != z0.shape())
    throw DimensionError("noise prediction " + shape_string(pred.shape()) + " vs latent " +
                         shape_string(z0.shape()));
  return ops::mse(pred, draw.eps);
}

Tensor ldm_loss(const Tensor& z0, const Tensor& context, const NoiseSchedule& schedule,
                const NoisePredictor& predictor, Rng& rng) {
  return ldm_loss(z0, context, schedule, predictor, draw_diffusion_noise(z0.shape(), schedule, rng));
}

Tensor reverse_chain(Tensor z, std::size_t from, const Tensor& context,
                     const NoiseSchedule& schedule, const NoisePredictor& predictor, Rng& rng) {
  if (!schedule.configured()) throw StateError("noise schedule is not configured");
  if (from > schedule.steps())
    throw IndexError("reverse chain start " + std::to_string(from) + " beyond T = " +
                     std::to_string(schedule.steps()));
  NoGradGuard guard;
  std::vector<double> cur(z.data().begin(), z.data().end());
  const Shape shape = z.shape();
  for (std::size_t t = from; t >= 1; --t) {
    const Tensor eps = predictor(Tensor::from(shape, cur), t, context);
    if (eps.shape() != shape)
      throw DimensionError("noise prediction " + shape_string(eps.shape()) + " vs latent " +
                           shape_string(shape));
    const double beta = schedule.beta(t);
    const double inv_sqrt_alpha = 1.0 / std::sqrt(schedule.alpha(t));
    const double coef = beta / std::sqrt(1.0 - schedule.alpha_bar(t));
    const double sigma = std::sqrt(beta);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      cur[i] = inv_sqrt_alpha * (cur[i] - coef * eps[i]);
      if (t > 1) cur[i] += sigma * rng.normal();
    }
  }
  return Tensor::from(shape, std::move(cur));
}

Tensor ddpm_sample_latent(const Shape& latent_shape, const Tensor& context,
                          const NoiseSchedule& schedule, const NoisePredictor& predictor, Rng& rng) {
  if (!schedule.configured()) throw StateError("noise schedule is not configured");
  Tensor z = Tensor::from(latent_shape, rng.normals(shape_numel(latent_shape)));
  return reverse_chain(std::move(z), schedule.steps(), context, schedule, predictor, rng);
}

ConnectivityMatrix ddpm_sample(const Shape& latent_shape, const Tensor& context,
                               const NoiseSchedule& schedule, const NoisePredictor& predictor,
                               const Decoder& decoder, Rng& rng) {
  return decoder.decode(ddpm_sample_latent(latent_shape, context, schedule, predictor, rng));
}

}  // namespace bd
