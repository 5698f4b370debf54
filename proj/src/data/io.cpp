// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/data/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "braindiff/core/error.hpp"

namespace bd {
namespace fs = std::filesystem;

namespace {

std::uint32_t ToLittleEndian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap32(v);
  return v;
}

}  // namespace

std::string format_shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_shortest(float v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path sidecar_path(const fs::path& volume_path) {
  fs::path p = volume_path;
  p.replace_extension(".json");
  return p;
}

void save_volume(const DtiVolume& volume, const fs::path& volume_path) {
  volume.validate();
  std::vector<std::uint32_t> words(volume.voxels.size());
  for (std::size_t i = 0; i < words.size(); ++i)
    words[i] = ToLittleEndian(std::bit_cast<std::uint32_t>(volume.voxels[i]));
  {
    std::ofstream out(volume_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + volume_path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(words.data()),
              static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
    if (!out) throw IoError("write failed for '" + volume_path.string() + "'");
  }
  nlohmann::ordered_json sidecar;
  sidecar["shape"] = {kVolumeShape[0], kVolumeShape[1], kVolumeShape[2]};
  sidecar["subject_id"] = volume.subject_id;
  write_text_file(sidecar_path(volume_path), sidecar.dump(2) + "\n");
}

DtiVolume load_volume(const fs::path& volume_path) {
  nlohmann::json sidecar;
  try {
    sidecar = nlohmann::json::parse(read_text_file(sidecar_path(volume_path)));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("volume sidecar for '" + volume_path.string() + "': " + e.what());
  }
  if (!sidecar.contains("shape") || !sidecar["shape"].is_array() || !sidecar.contains("subject_id"))
    throw FormatError("volume sidecar for '" + volume_path.string() + "' lacks shape/subject_id");
  std::vector<std::size_t> shape;
  try {
    shape = sidecar["shape"].get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError("volume sidecar shape is not a list of integers");
  }
  if (shape != std::vector<std::size_t>(kVolumeShape.begin(), kVolumeShape.end()))
    throw FormatError("volume '" + volume_path.string() + "' declares a shape other than 109x91x91");

  std::ifstream in(volume_path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open '" + volume_path.string() + "'");
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != kVolumeVoxels * sizeof(float))
    throw FormatError("volume '" + volume_path.string() + "' holds " + std::to_string(bytes) +
                      " bytes; sidecar shape needs " + std::to_string(kVolumeVoxels * sizeof(float)));
  in.seekg(0);
  std::vector<std::uint32_t> words(kVolumeVoxels);
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("read failed for '" + volume_path.string() + "'");

  DtiVolume volume;
  volume.subject_id = sidecar["subject_id"].get<std::string>();
  volume.voxels.resize(kVolumeVoxels);
  for (std::size_t i = 0; i < kVolumeVoxels; ++i)
    volume.voxels[i] = std::bit_cast<float>(ToLittleEndian(words[i]));
  volume.validate();
  return volume;
}

void save_matrix(const ConnectivityMatrix& matrix, const fs::path& path) {
  std::string text;
  text.reserve(kNetworkEntries * 10);
  for (std::size_t i = 0; i < kRegions; ++i) {
    for (std::size_t j = 0; j < kRegions; ++j) {
      if (j) text += ',';
      text += format_shortest(static_cast<float>(matrix(i, j)));
    }
    text += '\n';
  }
  write_text_file(path, text);
}

CsvMatrix read_numeric_csv(const fs::path& path) {
  const std::string text = read_text_file(path);
  CsvMatrix m;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::size_t cols = 0;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      std::string_view field = line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start);
      while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
      while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
      double v = 0.0;
      auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw FormatError("'" + path.string() + "' line " + std::to_string(line_no) +
                          ": not a number: '" + std::string(field) + "'");
      m.values.push_back(v);
      ++cols;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (m.rows == 0) m.cols = cols;
    else if (cols != m.cols)
      throw FormatError("'" + path.string() + "' line " + std::to_string(line_no) + " has " +
                        std::to_string(cols) + " columns, expected " + std::to_string(m.cols));
    ++m.rows;
  }
  return m;
}

ConnectivityMatrix load_matrix(const fs::path& path) {
  CsvMatrix m = read_numeric_csv(path);
  if (m.rows != kRegions || m.cols != kRegions)
    throw FormatError("'" + path.string() + "' is " + std::to_string(m.rows) + "x" +
                      std::to_string(m.cols) + ", expected 90x90");
  // Files hold float32 values; snap the decimal text back onto that grid.
  for (double& v : m.values) v = static_cast<double>(static_cast<float>(v));
  return ConnectivityMatrix(std::move(m.values));
}

}  // namespace bd
