// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/data/types.hpp"

#include <cmath>

#include "braindiff/core/error.hpp"

namespace bd {

std::string_view class_name(DiagnosticClass c) {
  switch (c) {
    case DiagnosticClass::kNC:
      return "NC";
    case DiagnosticClass::kEMCI:
      return "EMCI";
    case DiagnosticClass::kLMCI:
      return "LMCI";
  }
  return "?";
}

DiagnosticClass parse_class(std::string_view name) {
  for (auto c : kAllClasses)
    if (class_name(c) == name) return c;
  throw ValidationError("unknown class label '" + std::string(name) + "' (expected NC, EMCI or LMCI)");
}

DiagnosticClass class_from_index(std::size_t index) {
  if (index >= kNumClasses)
    throw ValidationError("class index " + std::to_string(index) + " outside {0, 1, 2}");
  return static_cast<DiagnosticClass>(index);
}

ConnectivityMatrix::ConnectivityMatrix() : weights_(kNetworkEntries, 0.0) {}

ConnectivityMatrix::ConnectivityMatrix(std::vector<double> weights) {
  if (weights.size() != kNetworkEntries)
    throw DimensionError("connectivity matrix needs 90x90 = 8100 entries, got " +
                         std::to_string(weights.size()));
  if (auto problem = check(weights)) throw ValidationError("connectivity matrix: " + *problem);
  weights_ = std::move(weights);
}

std::optional<std::string> ConnectivityMatrix::check(std::span<const double> w) {
  if (w.size() != kNetworkEntries) return "expected 8100 entries";
  for (std::size_t i = 0; i < kRegions; ++i) {
    if (w[i * kRegions + i] != 0.0) return "non-zero diagonal at " + std::to_string(i);
    for (std::size_t j = 0; j < kRegions; ++j) {
      const double v = w[i * kRegions + j];
      if (!std::isfinite(v)) return "non-finite entry at (" + std::to_string(i) + ", " + std::to_string(j) + ")";
      if (v < 0.0 || v > 1.0)
        return "entry " + std::to_string(v) + " outside [0, 1] at (" + std::to_string(i) + ", " +
               std::to_string(j) + ")";
      if (v != w[j * kRegions + i])
        return "asymmetric at (" + std::to_string(i) + ", " + std::to_string(j) + ")";
    }
  }
  return std::nullopt;
}

double ConnectivityMatrix::mean_off_diagonal() const {
  double acc = 0.0;
  for (double v : weights_) acc += v;  // diagonal is zero
  return acc / static_cast<double>(kNetworkEntries - kRegions);
}

void DtiVolume::validate() const {
  if (voxels.size() != kVolumeVoxels)
    throw DimensionError("volume '" + subject_id + "' has " + std::to_string(voxels.size()) +
                         " voxels, expected 109x91x91");
  for (float v : voxels)
    if (!std::isfinite(v) || v < 0.0f)
      throw ValidationError("volume '" + subject_id + "' has a negative or non-finite voxel");
}

}  // namespace bd
