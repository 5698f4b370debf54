// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/analysis/export.hpp"

#include <charconv>
#include <sstream>

#include "braindiff/core/error.hpp"
#include "braindiff/data/io.hpp"

namespace bd {
namespace {

constexpr std::string_view kChordHeader = "region_i,region_j,mean_diff,p_value,direction";
constexpr std::string_view kEdgeHeader = "region_i,region_j,t_statistic,p_value,mean_diff,significant,direction";
constexpr std::string_view kRadarHeader = "method,accuracy,sensitivity,specificity,f1";

std::vector<std::string> SplitFields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma - pos));
    if (comma == std::string::npos) return out;
    pos = comma + 1;
  }
}

template <typename T>
T Number(const std::string& field, std::size_t line_no) {
  T v{};
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
    throw FormatError("line " + std::to_string(line_no) + ": not a number: '" + field + "'");
  return v;
}

// Yields the non-empty data lines after checking the header.
std::vector<std::pair<std::size_t, std::vector<std::string>>> DataRows(const std::string& text,
                                                                        std::string_view header,
                                                                        std::size_t fields) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw FormatError("expected CSV header '" + std::string(header) + "'");
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = SplitFields(line);
    if (f.size() != fields)
      throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(fields) +
                        " fields, got " + std::to_string(f.size()));
    rows.emplace_back(line_no, std::move(f));
  }
  return rows;
}

}  // namespace

std::string_view direction_name(EdgeDirection d) {
  return d == EdgeDirection::kDeclined ? "declined" : "enhanced";
}

EdgeDirection parse_direction(std::string_view name) {
  if (name == "declined") return EdgeDirection::kDeclined;
  if (name == "enhanced") return EdgeDirection::kEnhanced;
  throw FormatError("unknown edge direction '" + std::string(name) + "'");
}

bool RadarRow::operator==(const RadarRow& o) const {
  return method == o.method && metrics.accuracy == o.metrics.accuracy &&
         metrics.sensitivity == o.metrics.sensitivity && metrics.specificity == o.metrics.specificity &&
         metrics.f1 == o.metrics.f1;
}

std::string format_edge_csv(const std::vector<EdgeTestResult>& results) {
  std::string s(kEdgeHeader);
  s += '\n';
  for (const auto& r : results)
    s += std::to_string(r.i + 1) + ',' + std::to_string(r.j + 1) + ',' + format_shortest(r.t_statistic) + ',' +
         format_shortest(r.p_value) + ',' + format_shortest(r.mean_difference) + ',' + (r.significant ? "1" : "0") +
         ',' + std::string(direction_name(r.direction)) + '\n';
  return s;
}

std::vector<EdgeTestResult> parse_edge_csv(const std::string& text) {
  std::vector<EdgeTestResult> out;
  for (const auto& [line_no, f] : DataRows(text, kEdgeHeader, 7)) {
    const auto i = Number<std::size_t>(f[0], line_no);
    const auto j = Number<std::size_t>(f[1], line_no);
    if (i < 1 || j > kRegions || i >= j)
      throw FormatError("line " + std::to_string(line_no) + ": region pair out of range");
    if (f[5] != "0" && f[5] != "1")
      throw FormatError("line " + std::to_string(line_no) + ": significant must be 0 or 1");
    out.push_back({i - 1, j - 1, Number<double>(f[2], line_no), Number<double>(f[3], line_no),
                   Number<double>(f[4], line_no), f[5] == "1", parse_direction(f[6])});
  }
  return out;
}

std::vector<ChordRow> chord_rows(const std::vector<EdgeTestResult>& results) {
  std::vector<ChordRow> rows;
  for (const auto& r : results)
    if (r.significant) rows.push_back({r.i + 1, r.j + 1, r.mean_difference, r.p_value, r.direction});
  return rows;
}

std::string format_chord_csv(const std::vector<ChordRow>& rows) {
  std::string s(kChordHeader);
  s += '\n';
  for (const auto& r : rows) {
    s += std::to_string(r.region_i) + ',' + std::to_string(r.region_j) + ',' + format_shortest(r.mean_difference) +
         ',' + format_shortest(r.p_value) + ',' + std::string(direction_name(r.direction)) + '\n';
  }
  return s;
}

std::vector<ChordRow> parse_chord_csv(const std::string& text) {
  std::vector<ChordRow> out;
  for (const auto& [line_no, f] : DataRows(text, kChordHeader, 5)) {
    ChordRow r{Number<std::size_t>(f[0], line_no), Number<std::size_t>(f[1], line_no),
               Number<double>(f[2], line_no), Number<double>(f[3], line_no), parse_direction(f[4])};
    if (r.region_i < 1 || r.region_j > kRegions || r.region_i >= r.region_j)
      throw FormatError("line " + std::to_string(line_no) + ": region pair out of range");
    out.push_back(r);
  }
  return out;
}

void export_chord_data(const std::vector<EdgeTestResult>& results, const std::filesystem::path& path) {
  write_text_file(path, format_chord_csv(chord_rows(results)));
}

std::string format_radar_csv(const std::vector<RadarRow>& rows) {
  std::string s(kRadarHeader);
  s += '\n';
  for (const auto& r : rows) {
    if (r.method.find_first_of(",\n") != std::string::npos)
      throw ArgumentError("radar method name may not contain ',' or newlines: '" + r.method + "'");
    s += r.method + ',' + format_shortest(r.metrics.accuracy) + ',' + format_shortest(r.metrics.sensitivity) +
         ',' + format_shortest(r.metrics.specificity) + ',' + format_shortest(r.metrics.f1) + '\n';
  }
  return s;
}

std::vector<RadarRow> parse_radar_csv(const std::string& text) {
  std::vector<RadarRow> out;
  for (const auto& [line_no, f] : DataRows(text, kRadarHeader, 5))
    out.push_back({f[0],
                   {Number<double>(f[1], line_no), Number<double>(f[2], line_no), Number<double>(f[3], line_no),
                    Number<double>(f[4], line_no)}});
  return out;
}

void export_radar_data(const std::vector<RadarRow>& rows, const std::filesystem::path& path) {
  write_text_file(path, format_radar_csv(rows));
}

}  // namespace bd
