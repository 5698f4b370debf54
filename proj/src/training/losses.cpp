// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/training/losses.hpp"

#include <cmath>

#include "braindiff/core/error.hpp"
#include "braindiff/core/ops.hpp"
#include "braindiff/model/autoencoder.hpp"

namespace bd {

double fe_loss(const ConnectivityMatrix& generated, const ConnectivityMatrix& reference) {
  double s = 0.0;
  for (std::size_t i = 0; i < kNetworkEntries; ++i) s += std::abs(generated.weights()[i] - reference.weights()[i]);
  return s / double(kNetworkEntries);
}

Tensor fe_loss(const Tensor& generated, const ConnectivityMatrix& reference) {
  if (generated.shape() != Shape{kRegions, kRegions})
    throw DimensionError("fe_loss expects a (90, 90) network, got " + shape_string(generated.shape()));
  return ops::l1(generated, network_tensor(reference));
}

double weighted_total(double fe, double ldm, double classification, const LossWeights& w) {
  return w[0] * fe + w[1] * ldm + w[2] * classification;
}

Tensor total_loss(const LossTerms& terms, const LossWeights& weights, LossBreakdown* breakdown) {
  const std::array<std::pair<const char*, const Tensor*>, 3> named{
      {{"L_FE", &terms.fe}, {"L_LDM", &terms.ldm}, {"L_C", &terms.classification}}};
  for (const auto& [name, t] : named) {
    if (!t->defined() || t->numel() != 1) throw DimensionError(std::string("loss term ") + name + " must be a scalar");
    if (!std::isfinite(t->item()))
      throw NumericError(std::string("non-finite loss term ") + name + " = " + std::to_string(t->item()));
  }
  Tensor total = ops::add(ops::add(ops::scale(terms.fe, weights[0]), ops::scale(terms.ldm, weights[1])),
                          ops::scale(terms.classification, weights[2]));
  if (breakdown) {
    breakdown->fe = terms.fe.item();
    breakdown->ldm = terms.ldm.item();
    breakdown->classification = terms.classification.item();
    breakdown->total = total.item();
  }
  return total;
}

}  // namespace bd
