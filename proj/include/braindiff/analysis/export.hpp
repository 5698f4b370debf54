// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// CSV data behind the chord and radar plots. Regions are numbered 1..90 in
// atlas order; rows keep (i, j) order.

#include <filesystem>
#include <string>
#include <vector>

#include "braindiff/analysis/metrics.hpp"
#include "braindiff/analysis/stats.hpp"

namespace bd {

struct ChordRow {
  std::size_t region_i = 0;  // 1-based
  std::size_t region_j = 0;
  double mean_difference = 0.0;
  double p_value = 0.0;
  EdgeDirection direction = EdgeDirection::kEnhanced;

  bool operator==(const ChordRow&) const = default;
};

struct RadarRow {
  std::string method;
  ClassificationMetrics metrics;

  bool operator==(const RadarRow& o) const;
};

/// Every tested edge, 1-based regions:
///   region_i,region_j,t_statistic,p_value,mean_diff,significant,direction
std::string format_edge_csv(const std::vector<EdgeTestResult>& results);
std::vector<EdgeTestResult> parse_edge_csv(const std::string& text);

/// Significant edges only.
std::vector<ChordRow> chord_rows(const std::vector<EdgeTestResult>& results);
std::string format_chord_csv(const std::vector<ChordRow>& rows);
std::vector<ChordRow> parse_chord_csv(const std::string& text);
void export_chord_data(const std::vector<EdgeTestResult>& results, const std::filesystem::path& path);

std::string format_radar_csv(const std::vector<RadarRow>& rows);
std::vector<RadarRow> parse_radar_csv(const std::string& text);
void export_radar_data(const std::vector<RadarRow>& rows, const std::filesystem::path& path);

std::string_view direction_name(EdgeDirection d);
/// Throws FormatError on anything but "declined" or "enhanced".
EdgeDirection parse_direction(std::string_view name);

}  // namespace bd
