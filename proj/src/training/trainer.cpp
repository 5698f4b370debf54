// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/training/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "braindiff/analysis/metrics.hpp"
#include "braindiff/core/error.hpp"
#include "braindiff/core/ops.hpp"
#include "braindiff/data/io.hpp"
#include "braindiff/model/diffusion.hpp"
#include "braindiff/training/checkpoint.hpp"

namespace bd {
namespace {

constexpr std::string_view kHistoryHeader = "epoch,step,L_FE,L_LDM,L_C,total";

void Accumulate(LossBreakdown& acc, const LossBreakdown& b) {
  acc.fe += b.fe;
  acc.ldm += b.ldm;
  acc.classification += b.classification;
  acc.total += b.total;
}

LossBreakdown Divide(LossBreakdown acc, double n) {
  acc.fe /= n;
  acc.ldm /= n;
  acc.classification /= n;
  acc.total /= n;
  return acc;
}

}  // namespace

bool HistoryRow::operator==(const HistoryRow& o) const {
  return epoch == o.epoch && step == o.step && loss.fe == o.loss.fe && loss.ldm == o.loss.ldm &&
         loss.classification == o.loss.classification && loss.total == o.loss.total;
}

AdamConfig adam_config(const TrainConfig& config) {
  AdamConfig c;
  c.learning_rate = config.learning_rate;
  c.grad_clip = config.grad_clip;
  return c;
}

TrainState init_train_state(const TrainConfig& config) {
  config.validate();
  TrainState s;
  s.model = std::make_unique<BrainDiffuser>(config.model_config(), config.seed);
  s.optimizer = AdamState::zeros(s.model->parameters());
  s.rng = Rng(mix_seed(config.seed, 1));
  return s;
}

LossTerms subject_loss_terms(const BrainDiffuser& model, const SubjectRecord& subject, Rng& rng) {
  const auto r = model.reconstruct(subject.volume);
  LossTerms terms;
  terms.fe = fe_loss(r.network, subject.reference_network);
  const Tensor logits = model.config().condition.use_logit_token ? r.logits.detach() : Tensor();
  const Tensor ctx = model.context(subject.label, logits);
  // The latent is a fixed target for the diffusion term. With gradients into
  // the encoder it collapses to one subject-independent pattern.
  terms.ldm = ldm_loss(r.latent.detach(), ctx, model.schedule(), model.predictor(), rng);
  terms.classification = classification_loss(r.logits, class_index(subject.label));
  return terms;
}

LossBreakdown train_step(TrainState& state, const std::vector<const SubjectRecord*>& batch,
                         const TrainConfig& config, std::size_t epoch) {
  if (batch.empty()) throw ArgumentError("train_step: empty batch");
  ParameterSet& params = state.model->parameters();
  params.zero_grad();
  const double inv = 1.0 / double(batch.size());
  LossBreakdown acc;
  for (const SubjectRecord* subject : batch) {
    LossBreakdown b;
    const Tensor total = total_loss(subject_loss_terms(*state.model, *subject, state.rng), config.loss_weights, &b);
    ops::scale(total, inv).backward();
    Accumulate(acc, b);
  }
  audit_parameter_groups(params);
  adam_step(params, state.optimizer, adam_config(config));
  ++state.step;
  const LossBreakdown mean = Divide(acc, double(batch.size()));
  state.history.push_back({epoch, state.step, mean});
  return mean;
}

LossBreakdown evaluate_losses(const BrainDiffuser& model, const std::vector<SubjectRecord>& subjects,
                              const LossWeights& weights, Rng& rng, std::size_t draws) {
  if (subjects.empty()) throw ArgumentError("evaluate_losses: no subjects");
  if (draws == 0) throw ArgumentError("evaluate_losses: draws must be >= 1");
  NoGradGuard guard;
  LossBreakdown acc;
  for (const auto& s : subjects)
    for (std::size_t d = 0; d < draws; ++d) {
      LossBreakdown b;
      total_loss(subject_loss_terms(model, s, rng), weights, &b);
      Accumulate(acc, b);
    }
  return Divide(acc, double(subjects.size() * draws));
}

ConfusionMatrix evaluate_classifier(const BrainDiffuser& model, const std::vector<SubjectRecord>& subjects) {
  ConfusionMatrix cm;
  for (const auto& s : subjects)
    cm.add(class_index(s.label), model.classify(model.reconstruct_network(s.volume)).predicted);
  return cm;
}

std::filesystem::path epoch_checkpoint_path(const std::filesystem::path& dir, std::size_t epoch) {
  char name[32];
  std::snprintf(name, sizeof(name), "epoch-%04zu.ckpt", epoch);
  return dir / name;
}

void train_loop(TrainState& state, const CohortSplit& split, const TrainConfig& config,
                const TrainLoopOptions& options) {
  config.validate();
  if (split.train.empty()) throw ArgumentError("train_loop: empty training set");
  if (!state.model) throw StateError("train_loop: state holds no model");
  const std::size_t n = split.train.size();
  for (std::size_t epoch = state.epoch + 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), state.rng.engine());

    EpochSummary summary;
    summary.epoch = epoch;
    std::size_t steps = 0;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      std::vector<const SubjectRecord*> batch;
      for (std::size_t k = begin; k < std::min(n, begin + config.batch_size); ++k)
        batch.push_back(&split.train[order[k]]);
      Accumulate(summary.mean_loss, train_step(state, batch, config, epoch));
      ++steps;
    }
    summary.mean_loss = Divide(summary.mean_loss, double(steps));
    if (!split.test.empty()) summary.test_metrics = compute_metrics(evaluate_classifier(*state.model, split.test));
    state.epoch = epoch;
    state.epochs.push_back(summary);

    const bool periodic = config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0;
    if (!options.checkpoint_dir.empty() && (periodic || epoch == config.epochs))
      save_checkpoint(state, epoch_checkpoint_path(options.checkpoint_dir, epoch));
    if (options.on_epoch) options.on_epoch(summary);
  }
}

std::string format_loss_history(const std::vector<HistoryRow>& rows) {
  std::string s(kHistoryHeader);
  s += '\n';
  for (const auto& r : rows)
    s += std::to_string(r.epoch) + ',' + std::to_string(r.step) + ',' + format_shortest(r.loss.fe) + ',' +
         format_shortest(r.loss.ldm) + ',' + format_shortest(r.loss.classification) + ',' +
         format_shortest(r.loss.total) + '\n';
  return s;
}

std::vector<HistoryRow> parse_loss_history(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHistoryHeader)
    throw FormatError("loss history: expected header '" + std::string(kHistoryHeader) + "'");
  std::vector<HistoryRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::array<double, 4> v{};
    std::array<std::size_t, 2> idx{};
    const char* p = line.data();
    const char* end = line.data() + line.size();
    auto fail = [&] { return FormatError("loss history line " + std::to_string(line_no) + ": malformed row"); };
    for (std::size_t f = 0; f < 6; ++f) {
      const auto r = f < 2 ? std::from_chars(p, end, idx[f]) : std::from_chars(p, end, v[f - 2]);
      if (r.ec != std::errc() || r.ptr == p) throw fail();
      p = r.ptr;
      if (f < 5) {
        if (p == end || *p != ',') throw fail();
        ++p;
      }
    }
    if (p != end) throw fail();
    rows.push_back({idx[0], idx[1], {v[0], v[1], v[2], v[3]}});
  }
  return rows;
}

}  // namespace bd
