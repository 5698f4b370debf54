// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// One graph-convolution layer over a 90-node network, node features being
// the adjacency rows, followed by a dense readout of the flattened hidden
// matrix into three class logits.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "braindiff/core/nn.hpp"
#include "braindiff/data/types.hpp"

namespace bd {

inline constexpr double kProbabilityFloor = 1e-12;

struct GcnConfig {
  std::size_t hidden = 32;
};

struct ClassPrediction {
  std::array<double, kNumClasses> logits{};
  std::array<double, kNumClasses> probabilities{};
  std::size_t predicted = 0;  // argmax, lowest index on ties

  static ClassPrediction from_logits(std::span<const double> logits);
};

/// D^{-1/2} (A + I) D^{-1/2} with D the row sums of A + I.
Tensor normalize_adjacency(const Tensor& adjacency);
std::vector<double> normalize_adjacency(const ConnectivityMatrix& adjacency);

class GcnClassifier {
 public:
  GcnClassifier(const GcnConfig& config, ParameterSet& params, Rng& rng,
                const std::string& prefix = "gcn");

  /// relu(normalize_adjacency(A) A W): (90, hidden). A is (90, 90).
  Tensor hidden(const Tensor& adjacency) const;
  /// Flattened hidden matrix through the readout: (1, 3).
  Tensor logits(const Tensor& adjacency) const;
  ClassPrediction classify(const ConnectivityMatrix& network) const;

  const Tensor& node_weight() const { return node_weight_; }
  const nn::Linear& readout() const { return readout_; }

 private:
  GcnConfig config_;
  Tensor node_weight_;  // (90, hidden)
  nn::Linear readout_;  // (3, 90 * hidden)
};

/// -log(max(softmax(logits)[label], 1e-12)); logits is (1, 3).
Tensor classification_loss(const Tensor& logits, std::size_t label);

/// -(1/N) sum_i log(max(p_i[label_i], 1e-12)). Throws ArgumentError for an
/// empty or mismatched batch and ValidationError for labels outside {0,1,2}.
double cross_entropy_loss(const std::vector<ClassPrediction>& predictions,
                          const std::vector<std::size_t>& labels);

}  // namespace bd
