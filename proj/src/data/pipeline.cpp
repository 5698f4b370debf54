// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/data/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "braindiff/core/error.hpp"
#include "braindiff/core/rng.hpp"

namespace bd {

ConnectivityMatrix normalize_connectivity(std::span<const double> raw, std::size_t rows,
                                          std::size_t cols) {
  if (rows != kRegions || cols != kRegions || raw.size() != rows * cols)
    throw DimensionError("normalize_connectivity: expected 90x90 input, got " + std::to_string(rows) +
                         "x" + std::to_string(cols));
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < kRegions; ++i)
    for (std::size_t j = 0; j < kRegions; ++j) {
      const double v = raw[i * kRegions + j];
      if (!std::isfinite(v))
        throw ValidationError("normalize_connectivity: non-finite entry at (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
      if (v < 0.0)
        throw ValidationError("normalize_connectivity: negative entry at (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
      if (i == j) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }

  std::vector<double> scaled(kNetworkEntries, 0.0);
  if (hi > lo) {
    const double range = hi - lo;
    for (std::size_t i = 0; i < kRegions; ++i)
      for (std::size_t j = 0; j < kRegions; ++j)
        if (i != j) scaled[i * kRegions + j] = (raw[i * kRegions + j] - lo) / range;
  }
  std::vector<double> out(kNetworkEntries, 0.0);
  for (std::size_t i = 0; i < kRegions; ++i)
    for (std::size_t j = 0; j < kRegions; ++j)
      if (i != j) {
        // min/max clamp guards the (a + b) / 2 rounding at the ends of [0, 1]
        const double v = 0.5 * (scaled[i * kRegions + j] + scaled[j * kRegions + i]);
        out[i * kRegions + j] = std::clamp(v, 0.0, 1.0);
      }
  return ConnectivityMatrix(std::move(out));
}

SplitIndices split_indices(std::span<const DiagnosticClass> labels, double test_fraction,
                           std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ArgumentError("split: test_fraction must lie in (0, 1)");
  std::array<std::vector<std::size_t>, kNumClasses> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[class_index(labels[i])].push_back(i);
  for (auto c : kAllClasses)
    if (members[class_index(c)].empty())
      throw ValidationError("split: cannot stratify, class " + std::string(class_name(c)) +
                            " has no members");

  const auto total_test =
      static_cast<std::size_t>(std::llround(static_cast<double>(labels.size()) * test_fraction));
  std::array<std::size_t, kNumClasses> quota{};
  std::array<double, kNumClasses> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double exact = static_cast<double>(members[c].size()) * test_fraction;
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - std::floor(exact);
    assigned += quota[c];
  }
  std::array<std::size_t, kNumClasses> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < total_test && k < kNumClasses; ++k) {
    const std::size_t c = order[k];
    if (quota[c] < members[c].size()) {
      ++quota[c];
      ++assigned;
    }
  }

  Rng rng(seed);
  SplitIndices split;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto shuffled = members[c];
    std::shuffle(shuffled.begin(), shuffled.end(), rng.engine());
    split.test.insert(split.test.end(), shuffled.begin(), shuffled.begin() + static_cast<long>(quota[c]));
    split.train.insert(split.train.end(), shuffled.begin() + static_cast<long>(quota[c]), shuffled.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

CohortSplit split_cohort(std::vector<SubjectRecord> records, double test_fraction, std::uint64_t seed) {
  std::vector<DiagnosticClass> labels;
  labels.reserve(records.size());
  for (const auto& r : records) labels.push_back(r.label);
  const auto idx = split_indices(labels, test_fraction, seed);
  CohortSplit split;
  split.seed = seed;
  for (auto i : idx.train) split.train.push_back(std::move(records[i]));
  for (auto i : idx.test) split.test.push_back(std::move(records[i]));
  return split;
}

}  // namespace bd
