// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Interchange formats shared by every command:
//   volume  <stem>.f32   little-endian float32, depth-major 109x91x91
//           <stem>.json  {"shape": [109, 91, 91], "subject_id": "..."}
//   matrix  <name>.csv   90 lines of 90 comma-separated decimals (float32
//                        shortest round-trip form), no header

#include <filesystem>
#include <string>
#include <vector>

#include "braindiff/data/types.hpp"

namespace bd {

std::filesystem::path sidecar_path(const std::filesystem::path& volume_path);

/// Throws IoError when the files cannot be written.
void save_volume(const DtiVolume& volume, const std::filesystem::path& volume_path);
/// Throws IoError (missing/unreadable), FormatError (sidecar or size
/// mismatch) or ValidationError (negative/non-finite voxels).
DtiVolume load_volume(const std::filesystem::path& volume_path);

void save_matrix(const ConnectivityMatrix& matrix, const std::filesystem::path& path);
/// Throws FormatError for anything other than 90 rows of 90 numbers and
/// ValidationError when the numbers break the matrix invariants.
ConnectivityMatrix load_matrix(const std::filesystem::path& path);

struct CsvMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};
/// Any rectangular numeric CSV; ragged rows are a FormatError.
CsvMatrix read_numeric_csv(const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_shortest(double v);
std::string format_shortest(float v);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace bd
