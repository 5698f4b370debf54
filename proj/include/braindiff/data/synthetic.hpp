// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Synthetic stand-in for a preprocessed DTI cohort.
//
// Networks come from a group-conditioned random-graph model over a fixed
// 90-region layout: a distance-decay template sets edge probabilities and
// strengths, and the impaired groups lose long-range (weak) edges and
// strength on them, so mean normalized connectivity orders NC > EMCI > LMCI.
// Volumes paint each region with an intensity that is a smooth increasing
// function of that region's row sum in the network, plus voxel noise.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "braindiff/core/rng.hpp"
#include "braindiff/data/types.hpp"

namespace bd {

struct SyntheticAtlas {
  static constexpr std::uint8_t kBackground = 255;
  // Midline white-matter slab between the hemispheres at a fixed intensity,
  // the reference level that subject intensities are read against.
  static constexpr std::uint8_t kMidline = 254;
  static constexpr float kMidlineIntensity = 1.0f;
  std::array<std::array<double, 3>, kRegions> centers{};  // (z, y, x) voxels
  std::vector<std::uint8_t> region_of_voxel;              // kVolumeVoxels entries
};

/// Fixed 90-region parcellation of an ellipsoidal brain mask, independent of
/// any cohort seed. Built once on first use.
const SyntheticAtlas& synthetic_atlas();

/// Raw symmetric integer fiber counts (diagonal 0) for one subject.
std::vector<double> sample_fiber_counts(DiagnosticClass group, Rng& rng);
/// Smooth increasing map from a region's row sum to its mean intensity.
double region_intensity(double row_sum);
DtiVolume render_volume(const ConnectivityMatrix& network, std::string subject_id, Rng& rng);

struct CohortCounts {
  std::size_t nc = 0;
  std::size_t emci = 0;
  std::size_t lmci = 0;
  std::size_t total() const { return nc + emci + lmci; }
};

/// Subject k (0-based, NC first, then EMCI, then LMCI) is drawn from its own
/// stream seeded by mix_seed(seed, k); ids are "sub-0001", "sub-0002", ...
void for_each_synthetic_subject(const CohortCounts& counts, std::uint64_t seed,
                                const std::function<void(SubjectRecord&&)>& sink);
std::vector<SubjectRecord> generate_synthetic_cohort(std::size_t n_nc, std::size_t n_emci,
                                                     std::size_t n_lmci, std::uint64_t seed);

}  // namespace bd
