// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "braindiff/core/error.hpp"
#include "braindiff/data/pipeline.hpp"

namespace bd {
namespace {

constexpr std::uint64_t kAtlasSeed = 0xA7A5'0090ULL;
constexpr std::array<double, 3> kBrainCenter{54.0, 45.0, 45.0};
constexpr std::array<double, 3> kBrainRadii{48.0, 40.0, 38.0};

// Impaired groups lose edges below kWeakEdge and strength on every
// non-homotopic edge below kAffectedEdge. The second band is mostly present,
// so the effect survives in per-edge medians as well as means.
constexpr double kWeakEdge = 0.3;
constexpr double kAffectedEdge = 0.6;

struct GroupEffect {
  double retention;    // probability multiplier for weak edges
  double attenuation;  // strength multiplier for affected edges
};

GroupEffect EffectFor(DiagnosticClass g) {
  switch (g) {
    case DiagnosticClass::kNC:
      return {1.0, 1.0};
    case DiagnosticClass::kEMCI:
      return {0.75, 0.8};
    case DiagnosticClass::kLMCI:
      return {0.55, 0.6};
  }
  return {1.0, 1.0};
}

bool InsideBrain(double z, double y, double x) {
  const double dz = (z - kBrainCenter[0]) / kBrainRadii[0];
  const double dy = (y - kBrainCenter[1]) / kBrainRadii[1];
  const double dx = (x - kBrainCenter[2]) / kBrainRadii[2];
  return dz * dz + dy * dy + dx * dx <= 1.0;
}

SyntheticAtlas BuildAtlas() {
  SyntheticAtlas atlas;
  Rng rng(kAtlasSeed);
  // Even regions sit in the left hemisphere (x < center); region 2k+1 is the
  // mirror image of region 2k.
  for (std::size_t k = 0; k < kRegions / 2; ++k) {
    std::array<double, 3> c{};
    do {
      c = {kBrainCenter[0] + (2.0 * rng.uniform() - 1.0) * kBrainRadii[0] * 0.85,
           kBrainCenter[1] + (2.0 * rng.uniform() - 1.0) * kBrainRadii[1] * 0.85,
           kBrainCenter[2] - (0.1 + 0.75 * rng.uniform()) * kBrainRadii[2]};
    } while (!InsideBrain(c[0], c[1], c[2]));
    atlas.centers[2 * k] = c;
    atlas.centers[2 * k + 1] = {c[0], c[1], 2.0 * kBrainCenter[2] - c[2]};
  }
  atlas.region_of_voxel.assign(kVolumeVoxels, SyntheticAtlas::kBackground);
  const auto [nz, ny, nx] = kVolumeShape;
  for (std::size_t z = 0; z < nz; ++z)
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t x = 0; x < nx; ++x) {
        if (!InsideBrain(double(z), double(y), double(x))) continue;
        if (std::abs(double(x) - kBrainCenter[2]) <= 1.0) {
          atlas.region_of_voxel[(z * ny + y) * nx + x] = SyntheticAtlas::kMidline;
          continue;
        }
        std::size_t best = 0;
        double best_d = INFINITY;
        for (std::size_t r = 0; r < kRegions; ++r) {
          const auto& c = atlas.centers[r];
          const double d = (z - c[0]) * (z - c[0]) + (y - c[1]) * (y - c[1]) + (x - c[2]) * (x - c[2]);
          if (d < best_d) best_d = d, best = r;
        }
        atlas.region_of_voxel[(z * ny + y) * nx + x] = static_cast<std::uint8_t>(best);
      }
  return atlas;
}

// Distance-decay template strength in (0, 1.5], with a homotopic bonus.
const std::vector<double>& TemplateStrength() {
  static const std::vector<double> strength = [] {
    const auto& atlas = synthetic_atlas();
    std::vector<double> s(kNetworkEntries, 0.0);
    for (std::size_t i = 0; i < kRegions; ++i)
      for (std::size_t j = 0; j < kRegions; ++j) {
        if (i == j) continue;
        const auto& a = atlas.centers[i];
        const auto& b = atlas.centers[j];
        const double d = std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                                   (a[2] - b[2]) * (a[2] - b[2]));
        const bool homotopic = (i / 2 == j / 2);
        s[i * kRegions + j] = std::exp(-d / 20.0) + (homotopic ? 0.5 : 0.0);
      }
    return s;
  }();
  return strength;
}

}  // namespace

const SyntheticAtlas& synthetic_atlas() {
  static const SyntheticAtlas atlas = BuildAtlas();
  return atlas;
}

std::vector<double> sample_fiber_counts(DiagnosticClass group, Rng& rng) {
  const auto& strength = TemplateStrength();
  const GroupEffect effect = EffectFor(group);
  std::vector<double> counts(kNetworkEntries, 0.0);
  for (std::size_t i = 0; i < kRegions; ++i)
    for (std::size_t j = i + 1; j < kRegions; ++j) {
      const double s = strength[i * kRegions + j];
      const bool weak = s < kWeakEdge;
      const bool affected = s < kAffectedEdge && i / 2 != j / 2;
      double p = std::min(0.95, 0.55 + 0.4 * std::min(1.0, 3.0 * s));
      if (weak) p *= effect.retention;
      const bool present = rng.uniform() < p;
      const double noise = std::exp(0.3 * rng.normal());
      if (!present) continue;
      const double mean = 2000.0 * std::pow(s, 0.8) * (affected ? effect.attenuation : 1.0);
      const double c = std::round(mean * noise);
      counts[i * kRegions + j] = counts[j * kRegions + i] = c;
    }
  return counts;
}

double region_intensity(double row_sum) { return 0.2 + 0.8 * (1.0 - std::exp(-row_sum / 8.0)); }

DtiVolume render_volume(const ConnectivityMatrix& network, std::string subject_id, Rng& rng) {
  const auto& atlas = synthetic_atlas();
  std::array<double, kRegions> level{};
  for (std::size_t i = 0; i < kRegions; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < kRegions; ++j) row += network(i, j);
    level[i] = region_intensity(row);
  }
  DtiVolume volume;
  volume.subject_id = std::move(subject_id);
  volume.voxels.resize(kVolumeVoxels);
  for (std::size_t v = 0; v < kVolumeVoxels; ++v) {
    const std::uint8_t r = atlas.region_of_voxel[v];
    const double noise = 0.03 * rng.normal();
    const double base = r == SyntheticAtlas::kBackground ? 0.0
                        : r == SyntheticAtlas::kMidline  ? SyntheticAtlas::kMidlineIntensity
                                                         : level[r];
    volume.voxels[v] = static_cast<float>(std::max(0.0, base + noise));
  }
  return volume;
}

void for_each_synthetic_subject(const CohortCounts& counts, std::uint64_t seed,
                                const std::function<void(SubjectRecord&&)>& sink) {
  std::size_t k = 0;
  const std::array<std::pair<DiagnosticClass, std::size_t>, 3> groups{
      {{DiagnosticClass::kNC, counts.nc}, {DiagnosticClass::kEMCI, counts.emci},
       {DiagnosticClass::kLMCI, counts.lmci}}};
  for (const auto& [group, n] : groups)
    for (std::size_t i = 0; i < n; ++i, ++k) {
      Rng rng(mix_seed(seed, k));
      char id[32];
      std::snprintf(id, sizeof(id), "sub-%04zu", k + 1);
      SubjectRecord rec;
      rec.subject_id = id;
      rec.label = group;
      const auto raw = sample_fiber_counts(group, rng);
      rec.reference_network = normalize_connectivity(raw, kRegions, kRegions);
      rec.volume = render_volume(rec.reference_network, rec.subject_id, rng);
      sink(std::move(rec));
    }
}

std::vector<SubjectRecord> generate_synthetic_cohort(std::size_t n_nc, std::size_t n_emci,
                                                     std::size_t n_lmci, std::uint64_t seed) {
  std::vector<SubjectRecord> out;
  out.reserve(n_nc + n_emci + n_lmci);
  for_each_synthetic_subject({n_nc, n_emci, n_lmci}, seed,
                             [&](SubjectRecord&& r) { out.push_back(std::move(r)); });
  return out;
}

}  // namespace bd
