// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

#include "braindiff/core/tensor.hpp"
#include "braindiff/data/types.hpp"

namespace bd {

/// Mean absolute difference over all 8100 entries.
double fe_loss(const ConnectivityMatrix& generated, const ConnectivityMatrix& reference);
/// Differentiable in `generated`, a (90, 90) tensor.
Tensor fe_loss(const Tensor& generated, const ConnectivityMatrix& reference);

/// Weights for the feature-extraction, latent-diffusion and classification terms.
using LossWeights = std::array<double, 3>;

struct LossBreakdown {
  double fe = 0.0;
  double ldm = 0.0;
  double classification = 0.0;
  double total = 0.0;
};

struct LossTerms {
  Tensor fe;
  Tensor ldm;
  Tensor classification;
};

/// w_fe * fe + w_ldm * ldm + w_c * classification as a graph node. Throws
/// NumericError naming the first non-finite term. Fills `breakdown` if given.
Tensor total_loss(const LossTerms& terms, const LossWeights& weights, LossBreakdown* breakdown = nullptr);

/// Weighted sum of already-averaged terms.
double weighted_total(double fe, double ldm, double classification, const LossWeights& weights);

}  // namespace bd
