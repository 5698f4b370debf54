// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace bd {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, 3>, 3> counts{};

  void add(std::size_t truth, std::size_t predicted);
  std::uint64_t total() const;
  std::uint64_t correct() const;
};

/// Percentages in [0, 100]. Sensitivity and F1 are micro-averaged, so in
/// single-label classification both equal accuracy. Specificity is the
/// macro average of one-vs-rest TN / (TN + FP).
struct ClassificationMetrics {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
};

/// Throws ArgumentError on an empty matrix.
ClassificationMetrics compute_metrics(const ConfusionMatrix& cm);

}  // namespace bd
