// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Joint training of every parameter group under the composite loss.

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "braindiff/analysis/metrics.hpp"
#include "braindiff/model/brain_diffuser.hpp"
#include "braindiff/training/config.hpp"
#include "braindiff/training/losses.hpp"
#include "braindiff/training/optimizer.hpp"

namespace bd {

struct HistoryRow {
  std::size_t epoch = 0;  // 1-based
  std::size_t step = 0;   // 1-based, global
  LossBreakdown loss;

  bool operator==(const HistoryRow& o) const;
};

struct EpochSummary {
  std::size_t epoch = 0;
  LossBreakdown mean_loss;  // mean of the epoch's step losses
  std::optional<ClassificationMetrics> test_metrics;
};

struct TrainState {
  std::unique_ptr<BrainDiffuser> model;
  AdamState optimizer;
  std::size_t epoch = 0;  // completed epochs
  std::size_t step = 0;   // completed updates
  Rng rng;                // shuffling and diffusion draws
  std::vector<HistoryRow> history;
  std::vector<EpochSummary> epochs;
};

/// Fresh model from config.seed with zeroed optimizer moments.
TrainState init_train_state(const TrainConfig& config);

AdamConfig adam_config(const TrainConfig& config);

/// Per-subject terms on the reconstruction path. The classifier sees the
/// reconstructed network; the logit token, when enabled, sees its detached
/// logits. The diffusion term treats the latent as a constant.
LossTerms subject_loss_terms(const BrainDiffuser& model, const SubjectRecord& subject, Rng& rng);

/// One Adam update on the batch-mean total loss. Appends to the history.
LossBreakdown train_step(TrainState& state, const std::vector<const SubjectRecord*>& batch,
                         const TrainConfig& config, std::size_t epoch);

/// Losses without an update, averaged over `draws` diffusion draws per
/// subject taken from rng.
LossBreakdown evaluate_losses(const BrainDiffuser& model, const std::vector<SubjectRecord>& subjects,
                              const LossWeights& weights, Rng& rng, std::size_t draws = 1);

/// Classifier on reconstructed networks.
ConfusionMatrix evaluate_classifier(const BrainDiffuser& model, const std::vector<SubjectRecord>& subjects);

struct TrainLoopOptions {
  std::filesystem::path checkpoint_dir;  // empty disables checkpoints
  std::function<void(const EpochSummary&)> on_epoch;
};

/// Runs epochs state.epoch + 1 .. config.epochs with a seeded shuffle each
/// epoch. Checkpoints every config.checkpoint_every epochs and after the
/// last one.
void train_loop(TrainState& state, const CohortSplit& split, const TrainConfig& config,
                const TrainLoopOptions& options = {});

std::filesystem::path epoch_checkpoint_path(const std::filesystem::path& dir, std::size_t epoch);

/// CSV with header epoch,step,L_FE,L_LDM,L_C,total.
std::string format_loss_history(const std::vector<HistoryRow>& rows);
std::vector<HistoryRow> parse_loss_history(const std::string& text);

}  // namespace bd
