// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/model/gcn.hpp"

#include <algorithm>
#include <cmath>

#include "braindiff/core/error.hpp"
#include "braindiff/model/autoencoder.hpp"

namespace bd {

ClassPrediction ClassPrediction::from_logits(std::span<const double> logits) {
  if (logits.size() != kNumClasses)
    throw DimensionError("class prediction needs 3 logits, got " + std::to_string(logits.size()));
  ClassPrediction p;
  std::copy(logits.begin(), logits.end(), p.logits.begin());
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) z += p.probabilities[k] = std::exp(logits[k] - top);
  for (auto& v : p.probabilities) v /= z;
  p.predicted = 0;
  for (std::size_t k = 1; k < kNumClasses; ++k)
    if (logits[k] > logits[p.predicted]) p.predicted = k;
  return p;
}

Tensor normalize_adjacency(const Tensor& adjacency) { return ops::gcn_normalize(adjacency); }

std::vector<double> normalize_adjacency(const ConnectivityMatrix& adjacency) {
  NoGradGuard guard;
  const Tensor n = ops::gcn_normalize(network_tensor(adjacency));
  return {n.data().begin(), n.data().end()};
}

GcnClassifier::GcnClassifier(const GcnConfig& config, ParameterSet& params, Rng& rng,
                             const std::string& prefix)
    : config_(config) {
  if (config_.hidden == 0) throw ArgumentError("gcn hidden width must be positive");
  node_weight_ = params.add_uniform(prefix + ".node_weight", {kRegions, config_.hidden},
                                    std::sqrt(3.0 / double(kRegions)), rng);
  readout_ = nn::make_linear(params, prefix + ".readout", kRegions * config_.hidden, kNumClasses, rng);
}

Tensor GcnClassifier::hidden(const Tensor& adjacency) const {
  if (adjacency.shape() != Shape{kRegions, kRegions})
    throw DimensionError("gcn expects a (90, 90) adjacency, got " + shape_string(adjacency.shape()));
  const Tensor propagated = ops::matmul(normalize_adjacency(adjacency), adjacency);
  return ops::relu(ops::matmul(propagated, node_weight_));
}

Tensor GcnClassifier::logits(const Tensor& adjacency) const {
  return readout_(ops::reshape(hidden(adjacency), {1, kRegions * config_.hidden}));
}

ClassPrediction GcnClassifier::classify(const ConnectivityMatrix& network) const {
  NoGradGuard guard;
  return ClassPrediction::from_logits(logits(network_tensor(network)).data());
}

Tensor classification_loss(const Tensor& logits, std::size_t label) {
  if (label >= kNumClasses) throw ValidationError("class label " + std::to_string(label) + " outside {0, 1, 2}");
  return ops::nll_floor(ops::softmax_rows(ops::reshape(logits, {1, kNumClasses})), label, kProbabilityFloor);
}

double cross_entropy_loss(const std::vector<ClassPrediction>& predictions,
                          const std::vector<std::size_t>& labels) {
  if (predictions.empty()) throw ArgumentError("cross-entropy over an empty batch");
  if (predictions.size() != labels.size())
    throw ArgumentError("cross-entropy: " + std::to_string(predictions.size()) + " predictions vs " +
                        std::to_string(labels.size()) + " labels");
  double acc = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= kNumClasses)
      throw ValidationError("class label " + std::to_string(labels[i]) + " outside {0, 1, 2}");
    acc -= std::log(std::max(predictions[i].probabilities[labels[i]], kProbabilityFloor));
  }
  return acc / double(labels.size());
}

}  // namespace bd
