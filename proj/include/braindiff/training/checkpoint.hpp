// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Checkpoint layout:
//   8 bytes   magic "BDCKPT01"
//   8 bytes   manifest length, little-endian u64
//   manifest  JSON: model config, schedule, tensor table, optimizer step,
//             epoch, step, rng state, loss history
//   data      little-endian float64: parameters in table order, then the
//             optimizer's first and second moments in the same order

#include <filesystem>

#include <json.hpp>

#include "braindiff/training/trainer.hpp"

namespace bd {

nlohmann::json model_config_to_json(const ModelConfig& config);
/// Throws FormatError on missing or mistyped fields.
ModelConfig model_config_from_json(const nlohmann::json& j);

/// Atomic write through a temporary file; one retry, then IoError.
void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
/// IoError when unreadable, FormatError when corrupt or inconsistent.
TrainState load_checkpoint(const std::filesystem::path& path);
/// Only the model; optimizer state and history are skipped.
std::unique_ptr<BrainDiffuser> load_model(const std::filesystem::path& path);

}  // namespace bd
