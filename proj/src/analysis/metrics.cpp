// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/analysis/metrics.hpp"

#include <string>

#include "braindiff/core/error.hpp"

namespace bd {

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
  if (truth >= 3 || predicted >= 3)
    throw ValidationError("class index out of range: " + std::to_string(truth) + ", " +
                          std::to_string(predicted));
  ++counts[truth][predicted];
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (const auto& r : counts)
    for (auto c : r) n += c;
  return n;
}

std::uint64_t ConfusionMatrix::correct() const { return counts[0][0] + counts[1][1] + counts[2][2]; }

ClassificationMetrics compute_metrics(const ConfusionMatrix& cm) {
  const std::uint64_t n = cm.total();
  if (n == 0) throw ArgumentError("compute_metrics: empty confusion matrix");
  std::uint64_t tp = 0, fp = 0, fn = 0;
  double specificity = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    std::uint64_t row = 0, col = 0;
    for (std::size_t m = 0; m < 3; ++m) row += cm.counts[k][m], col += cm.counts[m][k];
    const std::uint64_t tpk = cm.counts[k][k];
    const std::uint64_t fpk = col - tpk;
    const std::uint64_t tnk = n - row - col + tpk;
    tp += tpk;
    fp += fpk;
    fn += row - tpk;
    // A class that covers every subject has no negatives; count it as 1.
    specificity += (tnk + fpk) == 0 ? 1.0 : double(tnk) / double(tnk + fpk);
  }
  ClassificationMetrics m;
  m.accuracy = 100.0 * double(cm.correct()) / double(n);
  m.sensitivity = 100.0 * double(tp) / double(tp + fn);
  const double precision = double(tp) / double(tp + fp);
  const double recall = double(tp) / double(tp + fn);
  m.f1 = precision + recall == 0.0 ? 0.0 : 100.0 * 2.0 * precision * recall / (precision + recall);
  m.specificity = 100.0 * specificity / 3.0;
  return m;
}

}  // namespace bd
