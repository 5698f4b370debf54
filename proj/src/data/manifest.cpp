// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/data/manifest.hpp"

#include <json.hpp>
#include <set>

#include "braindiff/core/error.hpp"
#include "braindiff/data/io.hpp"

namespace bd {
namespace fs = std::filesystem;

namespace {

std::string StringField(const nlohmann::json& e, const char* key, bool required) {
  if (!e.contains(key)) {
    if (required) throw FormatError(std::string("manifest entry lacks '") + key + "'");
    return {};
  }
  if (!e[key].is_string()) throw FormatError(std::string("manifest field '") + key + "' must be a string");
  return e[key].get<std::string>();
}

}  // namespace

fs::path manifest_path(const fs::path& dir) { return dir / "manifest.json"; }

void write_manifest(const fs::path& dir, const std::vector<ManifestEntry>& entries) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json j;
    j["subject_id"] = e.subject_id;
    j["label"] = std::string(class_name(e.label));
    if (!e.volume.empty()) j["volume"] = e.volume;
    if (!e.network.empty()) j["network"] = e.network;
    if (!e.source.empty()) j["source"] = e.source;
    list.push_back(std::move(j));
  }
  nlohmann::json root;
  root["subjects"] = std::move(list);
  write_text_file(manifest_path(dir), root.dump(2) + "\n");
}

std::vector<ManifestEntry> read_manifest(const fs::path& dir) {
  const auto text = read_text_file(manifest_path(dir));
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(manifest_path(dir).string() + ": " + e.what());
  }
  if (!root.is_object() || !root.contains("subjects") || !root["subjects"].is_array())
    throw FormatError(manifest_path(dir).string() + ": expected an object with a 'subjects' array");
  std::vector<ManifestEntry> out;
  std::set<std::string> seen;
  for (const auto& j : root["subjects"]) {
    if (!j.is_object()) throw FormatError("manifest entries must be objects");
    ManifestEntry e;
    e.subject_id = StringField(j, "subject_id", true);
    try {
      e.label = parse_class(StringField(j, "label", true));
    } catch (const ValidationError& err) {
      throw FormatError(std::string("manifest: ") + err.what());
    }
    e.volume = StringField(j, "volume", false);
    e.network = StringField(j, "network", false);
    e.source = StringField(j, "source", false);
    if (!seen.insert(e.subject_id).second) throw FormatError("manifest repeats subject '" + e.subject_id + "'");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<SubjectRecord> load_subjects(const fs::path& dir) {
  std::vector<SubjectRecord> out;
  for (const auto& e : read_manifest(dir)) {
    if (e.volume.empty() || e.network.empty())
      throw FormatError("subject '" + e.subject_id + "' needs both a volume and a network");
    SubjectRecord r;
    r.subject_id = e.subject_id;
    r.label = e.label;
    r.volume = load_volume(dir / e.volume);
    r.reference_network = load_matrix(dir / e.network);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<LabeledNetwork> load_networks(const fs::path& dir) {
  std::vector<LabeledNetwork> out;
  for (auto& e : read_manifest(dir)) {
    if (e.network.empty()) throw FormatError("subject '" + e.subject_id + "' lists no network");
    auto net = load_matrix(dir / e.network);
    out.push_back({std::move(e), std::move(net)});
  }
  return out;
}

}  // namespace bd
