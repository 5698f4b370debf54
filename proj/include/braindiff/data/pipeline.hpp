// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "braindiff/data/types.hpp"

namespace bd {

/// Per-subject min-max scaling of a raw fiber-count matrix.
///
/// Off-diagonal entries map to (raw - min) / (max - min) with min and max taken
/// over the off-diagonal entries only; the result is symmetrized as
/// (W + W^T) / 2 and its diagonal zeroed. A constant off-diagonal maps to all
/// zeros. `rows`/`cols` describe the layout of `raw` and must both be 90.
ConnectivityMatrix normalize_connectivity(std::span<const double> raw, std::size_t rows,
                                          std::size_t cols);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified train/test partition over positions in `labels`.
///
/// The test total is round(n * test_fraction); it is shared out across classes
/// by largest remainder (ties to the lower class index), so each class lands
/// within one subject of its exact proportion. Both lists come back in
/// ascending index order.
SplitIndices split_indices(std::span<const DiagnosticClass> labels, double test_fraction,
                           std::uint64_t seed);

CohortSplit split_cohort(std::vector<SubjectRecord> records, double test_fraction, std::uint64_t seed);

}  // namespace bd
