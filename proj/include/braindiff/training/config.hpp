// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Run configuration as flat "key = value" text. '#' starts a comment; blank
// lines are ignored; unknown keys and malformed values are rejected.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "braindiff/model/brain_diffuser.hpp"

namespace bd {

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 2;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  std::size_t schedule_T = 1000;
  std::array<double, 3> loss_weights{1.0, 1.0, 1.0};  // fe, ldm, classification
  double grad_clip = 1.0;                             // global norm; 0 disables
  std::string model = "desk";                         // desk | tiny
  bool use_logit_token = false;
  std::size_t checkpoint_every = 1;  // epochs; 0 writes only the final checkpoint

  /// Throws ArgumentError on out-of-domain values.
  void validate() const;
  /// Architecture preset with schedule_T and the logit token applied.
  ModelConfig model_config() const;
};

struct RunConfig {
  TrainConfig train;
  std::filesystem::path data_dir;
  std::filesystem::path checkpoint_dir = "checkpoints";
  std::filesystem::path output_dir = "out";
  double test_fraction = 0.1;  // 0 trains on every subject
  std::uint64_t split_seed = 0;

  void validate() const;
};

/// Relative paths are resolved against base_dir.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig read_run_config(const std::filesystem::path& path);
std::string format_run_config(const RunConfig& config);

}  // namespace bd
