// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// A cohort directory holds manifest.json plus the files it lists, with paths
// relative to the directory:
//   {"subjects": [{"subject_id": "sub-0001", "label": "NC",
//                  "volume": "volumes/sub-0001.f32",
//                  "network": "networks/sub-0001.csv",
//                  "source": "sub-0001"}]}
// "volume" is absent for generated networks; "source" names the subject a
// generated network was derived from, when there is one.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "braindiff/data/types.hpp"

namespace bd {

struct ManifestEntry {
  std::string subject_id;
  DiagnosticClass label = DiagnosticClass::kNC;
  std::string volume;
  std::string network;
  std::string source;

  bool operator==(const ManifestEntry&) const = default;
};

std::filesystem::path manifest_path(const std::filesystem::path& dir);

void write_manifest(const std::filesystem::path& dir, const std::vector<ManifestEntry>& entries);
/// IoError when missing, FormatError when malformed or ids repeat.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir);

/// Every entry must list both a volume and a network.
std::vector<SubjectRecord> load_subjects(const std::filesystem::path& dir);

struct LabeledNetwork {
  ManifestEntry entry;
  ConnectivityMatrix network;
};
std::vector<LabeledNetwork> load_networks(const std::filesystem::path& dir);

}  // namespace bd
