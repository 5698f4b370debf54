// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bd {

/// Number of AAL regions, i.e. graph nodes.
inline constexpr std::size_t kRegions = 90;
inline constexpr std::size_t kNetworkEntries = kRegions * kRegions;
/// Preprocessed volume extent (depth, height, width).
inline constexpr std::array<std::size_t, 3> kVolumeShape{109, 91, 91};
inline constexpr std::size_t kVolumeVoxels = 109 * 91 * 91;

enum class DiagnosticClass : std::uint8_t { kNC = 0, kEMCI = 1, kLMCI = 2 };
inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<DiagnosticClass, 3> kAllClasses{
    DiagnosticClass::kNC, DiagnosticClass::kEMCI, DiagnosticClass::kLMCI};

std::string_view class_name(DiagnosticClass c);
/// Accepts "NC", "EMCI", "LMCI" (case-sensitive); throws ValidationError.
DiagnosticClass parse_class(std::string_view name);
/// Throws ValidationError outside {0, 1, 2}.
DiagnosticClass class_from_index(std::size_t index);
inline std::size_t class_index(DiagnosticClass c) { return static_cast<std::size_t>(c); }

/// 90x90 structural network: symmetric, zero diagonal, entries in [0, 1].
/// Construction validates; a held instance always satisfies the invariants.
class ConnectivityMatrix {
 public:
  ConnectivityMatrix();  // all zero
  /// Throws DimensionError / ValidationError when the invariants fail.
  explicit ConnectivityMatrix(std::vector<double> weights);

  double operator()(std::size_t i, std::size_t j) const { return weights_[i * kRegions + j]; }
  std::span<const double> weights() const { return weights_; }
  /// Mean over the 8010 off-diagonal entries.
  double mean_off_diagonal() const;

  bool operator==(const ConnectivityMatrix&) const = default;

  /// Empty optional when valid, otherwise a description of the first breach.
  static std::optional<std::string> check(std::span<const double> weights);

 private:
  std::vector<double> weights_;
};

struct DtiVolume {
  std::string subject_id;
  std::vector<float> voxels;  // depth-major, kVolumeShape

  /// Throws DimensionError / ValidationError on shape or value violations.
  void validate() const;
  float at(std::size_t z, std::size_t y, std::size_t x) const {
    return voxels[(z * kVolumeShape[1] + y) * kVolumeShape[2] + x];
  }
};

struct SubjectRecord {
  std::string subject_id;
  DtiVolume volume;
  ConnectivityMatrix reference_network;
  DiagnosticClass label = DiagnosticClass::kNC;
};

struct CohortSplit {
  std::vector<SubjectRecord> train;
  std::vector<SubjectRecord> test;
  std::uint64_t seed = 0;
};

}  // namespace bd
