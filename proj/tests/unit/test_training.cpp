// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "braindiff/core/error.hpp"
#include "braindiff/core/ops.hpp"
#include "braindiff/data/io.hpp"
#include "braindiff/data/synthetic.hpp"
#include "braindiff/training/checkpoint.hpp"
#include "braindiff/training/config.hpp"
#include "braindiff/training/losses.hpp"
#include "braindiff/training/optimizer.hpp"
#include "braindiff/training/trainer.hpp"

using namespace bd;

namespace {

TrainConfig TinyConfig() {
  TrainConfig c;
  c.model = "tiny";
  c.schedule_T = 20;
  c.learning_rate = 1e-3;
  c.epochs = 2;
  c.seed = 41;
  return c;
}

const std::vector<SubjectRecord>& Cohort() {
  static const auto cohort = generate_synthetic_cohort(2, 1, 1, 9);
  return cohort;
}

CohortSplit Split() {
  CohortSplit s;
  s.train = Cohort();
  return s;
}

std::vector<std::vector<double>> Snapshot(const ParameterSet& params) {
  std::vector<std::vector<double>> out;
  for (const auto& [_, t] : params.items()) out.emplace_back(t.data().begin(), t.data().end());
  return out;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

ConnectivityMatrix Constant(double v) {
  std::vector<double> w(kNetworkEntries, v);
  for (std::size_t i = 0; i < kRegions; ++i) w[i * kRegions + i] = 0.0;
  return ConnectivityMatrix(w);
}

}  // namespace

TEST_CASE("fe_loss examples") {
  const auto a = Cohort()[0].reference_network, b = Cohort()[1].reference_network;
  CHECK(fe_loss(a, a) == 0.0);
  CHECK(fe_loss(ConnectivityMatrix(), Constant(0.5)) == doctest::Approx(8010.0 * 0.5 / 8100.0).epsilon(1e-15));
  CHECK(fe_loss(ConnectivityMatrix(), Constant(0.5)) == doctest::Approx(0.4944).epsilon(1e-4));
  CHECK(fe_loss(a, b) == fe_loss(b, a));
  CHECK(fe_loss(network_tensor(a), b).item() == doctest::Approx(fe_loss(a, b)).epsilon(1e-14));
  CHECK_THROWS_AS(fe_loss(Tensor::zeros({90, 89}), b), DimensionError);
}

TEST_CASE("total_loss: additivity, masking and non-finite terms") {
  const LossTerms zero{Tensor::scalar(0.0), Tensor::scalar(0.0), Tensor::scalar(0.0)};
  CHECK(total_loss(zero, {1, 1, 1}).item() == 0.0);

  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const LossTerms t{Tensor::scalar(rng.uniform()), Tensor::scalar(2 * rng.uniform()), Tensor::scalar(3 * rng.uniform())};
    LossBreakdown b;
    CHECK(total_loss(t, {1, 0, 0}, &b).item() == t.fe.item());
    const LossWeights w{rng.uniform(), rng.uniform(), rng.uniform()};
    const double total = total_loss(t, w, &b).item();
    CHECK(std::abs(total - (w[0] * b.fe + w[1] * b.ldm + w[2] * b.classification)) <= 1e-9);
    CHECK(b.total == total);
  }

  const LossTerms bad{Tensor::scalar(0.1), Tensor::scalar(std::nan("")), Tensor::scalar(0.2)};
  try {
    total_loss(bad, {1, 1, 1});
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("L_LDM") != std::string::npos);
  }
  const LossTerms inf{Tensor::scalar(0.1), Tensor::scalar(0.1), Tensor::scalar(INFINITY)};
  CHECK_THROWS_WITH_AS(total_loss(inf, {1, 1, 0}), doctest::Contains("L_C"), NumericError);
}

TEST_CASE("adam_step matches a hand-rolled update and clips by global norm") {
  ParameterSet params;
  Tensor a = params.add_constant("fenet.a", {3}, 0.5);
  Tensor b = params.add_constant("gcn.b", {2}, -1.0);
  AdamState state = AdamState::zeros(params);
  AdamConfig c;
  c.learning_rate = 0.01;
  c.grad_clip = 0.0;

  const std::vector<std::vector<double>> grads{{0.3, -0.1, 0.0, 2.0, -4.0}, {0.1, 0.2, -0.3, 1.0, 0.5}};
  std::vector<double> value{0.5, 0.5, 0.5, -1.0, -1.0}, m(5, 0.0), v(5, 0.0);
  for (std::size_t step = 1; step <= 2; ++step) {
    const auto& g = grads[step - 1];
    std::copy(g.begin(), g.begin() + 3, a.mutable_grad().begin());
    std::copy(g.begin() + 3, g.end(), b.mutable_grad().begin());
    adam_step(params, state, c);
    for (std::size_t i = 0; i < 5; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g[i];
      v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(0.9, step)), vh = v[i] / (1 - std::pow(0.999, step));
      value[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    }
    for (std::size_t i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(value[i]).epsilon(1e-14));
    for (std::size_t i = 0; i < 2; ++i) CHECK(b[i] == doctest::Approx(value[3 + i]).epsilon(1e-14));
  }
  CHECK(state.step == 2);

  // First step with a zero moment history moves each coordinate by ~lr.
  std::fill(a.mutable_grad().begin(), a.mutable_grad().end(), 3.0);
  std::fill(b.mutable_grad().begin(), b.mutable_grad().end(), 4.0);
  const double norm = clip_gradients(params, 1.0);
  CHECK(norm == doctest::Approx(std::sqrt(3 * 9.0 + 2 * 16.0)));
  double sq = 0.0;
  for (const auto& [_, t] : params.items())
    for (double g : t.grad()) sq += g * g;
  CHECK(std::sqrt(sq) == doctest::Approx(1.0).epsilon(1e-14));

  b.mutable_grad()[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(adam_step(params, state, c), doctest::Contains("gcn.b"), NumericError);
}

TEST_CASE("parameter group audit") {
  ParameterSet ok;
  for (auto g : kParameterGroups) ok.add(std::string(g) + "w", {2}).mutable_grad();
  CHECK_NOTHROW(audit_parameter_groups(ok));
  CHECK(parameter_group("denoiser.mid.conv1.weight") == "denoiser");
  CHECK(parameter_group("other.w").empty());

  ParameterSet stray = ok;
  stray.add("other.w", {1}).mutable_grad();
  CHECK_THROWS_WITH_AS(audit_parameter_groups(stray), doctest::Contains("other.w"), StateError);

  ParameterSet missing;
  for (auto g : kParameterGroups) missing.add(std::string(g) + "w", {2}).mutable_grad();
  missing.add("gcn.extra", {2});
  CHECK_THROWS_WITH_AS(audit_parameter_groups(missing), doctest::Contains("gcn.extra"), StateError);

  ParameterSet empty_group;
  empty_group.add("fenet.w", {1}).mutable_grad();
  CHECK_THROWS_AS(audit_parameter_groups(empty_group), StateError);
}

TEST_CASE("train_step: zero loss weights leave parameters unchanged") {
  TrainConfig c = TinyConfig();
  c.loss_weights = {0, 0, 0};
  auto state = init_train_state(c);
  const auto before = Snapshot(state.model->parameters());
  const auto b = train_step(state, {&Cohort()[0], &Cohort()[2]}, c, 1);
  CHECK(Snapshot(state.model->parameters()) == before);
  CHECK(b.total == 0.0);
  CHECK(b.fe > 0.0);
  CHECK(state.step == 1);
  REQUIRE(state.history.size() == 1);
  CHECK(state.history[0].step == 1);
}

TEST_CASE("train_step: every parameter group is updated jointly") {
  TrainConfig c = TinyConfig();
  auto state = init_train_state(c);
  const auto before = Snapshot(state.model->parameters());
  train_step(state, {&Cohort()[1]}, c, 1);
  const auto& items = state.model->parameters().items();
  std::map<std::string, bool> changed;
  for (std::size_t k = 0; k < items.size(); ++k) {
    REQUIRE(items[k].second.grad().size() == items[k].second.numel());
    const bool moved = before[k] != std::vector<double>(items[k].second.data().begin(), items[k].second.data().end());
    changed[parameter_group(items[k].first)] |= moved;
  }
  for (auto g : kParameterGroups) {
    CAPTURE(g);
    CHECK(changed[std::string(g.substr(0, g.size() - 1))]);
  }
}

TEST_CASE("train_step: a small step decreases the loss on the same batch") {
  TrainConfig c = TinyConfig();
  c.learning_rate = 1e-5;
  auto state = init_train_state(c);
  const Rng draws = state.rng;
  Rng r1 = draws;
  const double before = evaluate_losses(*state.model, {Cohort()[0]}, c.loss_weights, r1).total;
  train_step(state, {&Cohort()[0]}, c, 1);
  CHECK(state.history.back().loss.total == doctest::Approx(before).epsilon(1e-12));
  Rng r2 = draws;
  const double after = evaluate_losses(*state.model, {Cohort()[0]}, c.loss_weights, r2).total;
  CAPTURE(before);
  CAPTURE(after);
  CHECK(after < before);
}

TEST_CASE("train_loop: epochs = 0, determinism and errors") {
  TrainConfig c = TinyConfig();
  c.epochs = 0;
  auto idle = init_train_state(c);
  const auto fresh = Snapshot(idle.model->parameters());
  train_loop(idle, Split(), c);
  CHECK(idle.step == 0);
  CHECK(idle.epoch == 0);
  CHECK(idle.history.empty());
  CHECK(Snapshot(idle.model->parameters()) == fresh);

  c.epochs = 2;
  auto run = [&] {
    auto s = init_train_state(c);
    train_loop(s, Split(), c);
    return s;
  };
  const auto a = run(), b = run();
  REQUIRE(a.history.size() == 4);  // 4 subjects, batch 2, 2 epochs
  CHECK(a.history == b.history);
  CHECK(Snapshot(a.model->parameters()) == Snapshot(b.model->parameters()));
  CHECK(a.history[0].epoch == 1);
  CHECK(a.history[3].epoch == 2);
  CHECK(a.epochs.size() == 2);

  CHECK_THROWS_AS(train_loop(idle, CohortSplit{}, c), ArgumentError);
}

TEST_CASE("train_loop: per-epoch test evaluation and checkpoints") {
  TempDir dir("braindiff_test_loop");
  TrainConfig c = TinyConfig();
  c.epochs = 3;
  c.checkpoint_every = 2;
  CohortSplit split = Split();
  split.test = {Cohort()[3]};
  auto s = init_train_state(c);
  std::vector<std::size_t> seen;
  train_loop(s, split, c, {dir.path, [&](const EpochSummary& e) { seen.push_back(e.epoch); }});
  CHECK(seen == std::vector<std::size_t>{1, 2, 3});
  for (const auto& e : s.epochs) {
    REQUIRE(e.test_metrics.has_value());
    CHECK(e.test_metrics->accuracy >= 0.0);
  }
  CHECK(std::filesystem::exists(epoch_checkpoint_path(dir.path, 2)));
  CHECK(std::filesystem::exists(epoch_checkpoint_path(dir.path, 3)));
  CHECK(!std::filesystem::exists(epoch_checkpoint_path(dir.path, 1)));
}

TEST_CASE("checkpoint: round trip and bitwise resume") {
  TempDir dir("braindiff_test_ckpt");
  TrainConfig c = TinyConfig();
  c.epochs = 4;
  // Split test set exercises the stored metrics too.
  CohortSplit split = Split();
  split.test = {Cohort()[0]};
  auto straight = init_train_state(c);
  train_loop(straight, split, c);

  TrainConfig half = c;
  half.epochs = 2;
  auto first = init_train_state(half);
  train_loop(first, split, half);
  save_checkpoint(first, dir.path / "mid.ckpt");
  auto resumed = load_checkpoint(dir.path / "mid.ckpt");

  CHECK(resumed.model->config() == first.model->config());
  CHECK(Snapshot(resumed.model->parameters()) == Snapshot(first.model->parameters()));
  CHECK(resumed.optimizer == first.optimizer);
  CHECK(resumed.rng == first.rng);
  CHECK(resumed.history == first.history);
  CHECK(resumed.epoch == 2);
  CHECK(resumed.step == first.step);
  REQUIRE(resumed.epochs.size() == 2);
  CHECK(resumed.epochs[1].test_metrics->accuracy == first.epochs[1].test_metrics->accuracy);

  train_loop(resumed, split, c);
  CHECK(resumed.history == straight.history);
  CHECK(Snapshot(resumed.model->parameters()) == Snapshot(straight.model->parameters()));
  CHECK(resumed.optimizer == straight.optimizer);

  // Saving the same state twice yields identical bytes.
  save_checkpoint(straight, dir.path / "a.ckpt");
  save_checkpoint(straight, dir.path / "b.ckpt");
  CHECK(read_text_file(dir.path / "a.ckpt") == read_text_file(dir.path / "b.ckpt"));
  const auto model = load_model(dir.path / "a.ckpt");
  CHECK(Snapshot(model->parameters()) == Snapshot(straight.model->parameters()));
  CHECK(!std::filesystem::exists(dir.path / "a.ckpt.tmp"));
}

TEST_CASE("checkpoint: corrupt and unreadable files") {
  TempDir dir("braindiff_test_ckpt_bad");
  const TrainConfig c = TinyConfig();
  const auto s = init_train_state(c);
  const auto good = dir.path / "good.ckpt";
  save_checkpoint(s, good);
  const std::string bytes = read_text_file(good);

  CHECK_THROWS_AS(load_checkpoint(dir.path / "absent.ckpt"), IoError);
  write_text_file(dir.path / "magic.ckpt", "NOTACKPT" + bytes.substr(8));
  CHECK_THROWS_AS(load_checkpoint(dir.path / "magic.ckpt"), FormatError);
  write_text_file(dir.path / "short.ckpt", bytes.substr(0, bytes.size() - 16));
  CHECK_THROWS_AS(load_checkpoint(dir.path / "short.ckpt"), FormatError);
  CHECK_THROWS_AS(load_model(dir.path / "short.ckpt"), FormatError);
  std::string garbled = bytes;
  garbled[20] = '#';
  write_text_file(dir.path / "json.ckpt", garbled);
  CHECK_THROWS_AS(load_checkpoint(dir.path / "json.ckpt"), FormatError);
  CHECK_THROWS_AS(save_checkpoint(s, dir.path / "no" / "such" / "dir.ckpt"), IoError);

  const auto mc = ModelConfig::tiny();
  CHECK(model_config_from_json(model_config_to_json(mc)) == mc);
  auto j = model_config_to_json(mc);
  j["fenet"].erase("stem_channels");
  CHECK_THROWS_AS(model_config_from_json(j), FormatError);
}

TEST_CASE("trained model: conditioning changes the noise prediction") {
  TrainConfig c = TinyConfig();
  c.epochs = 2;
  auto s = init_train_state(c);
  const auto cond_before = Snapshot(s.model->parameters());
  train_loop(s, Split(), c);
  NoGradGuard guard;
  Rng rng(3);
  const Shape shape = s.model->config().latent_shape();
  const Tensor z = Tensor::from(shape, rng.normals(shape_numel(shape)));
  const Tensor nc = s.model->denoiser().forward(z, 10, s.model->context(DiagnosticClass::kNC));
  const Tensor lmci = s.model->denoiser().forward(z, 10, s.model->context(DiagnosticClass::kLMCI));
  double diff = 0.0;
  for (std::size_t i = 0; i < nc.numel(); ++i) diff = std::max(diff, std::abs(nc[i] - lmci[i]));
  CHECK(diff > 0.0);
}

TEST_CASE("loss history CSV round trip") {
  std::vector<HistoryRow> rows{{1, 1, {0.5, 1.25, 1.0986122886681098, 2.8486122886681098}},
                               {1, 2, {0.1, 0.2, 0.3, 0.6000000000000001}}};
  const std::string csv = format_loss_history(rows);
  CHECK(csv.rfind("epoch,step,L_FE,L_LDM,L_C,total\n1,1,", 0) == 0);
  CHECK(parse_loss_history(csv) == rows);
  CHECK(parse_loss_history(format_loss_history({})).empty());
  CHECK_THROWS_AS(parse_loss_history("epoch,step\n"), FormatError);
  CHECK_THROWS_AS(parse_loss_history("epoch,step,L_FE,L_LDM,L_C,total\n1,2,3\n"), FormatError);
  CHECK_THROWS_AS(parse_loss_history("epoch,step,L_FE,L_LDM,L_C,total\n1,2,3,4,5,6,7\n"), FormatError);
}

TEST_CASE("run config: defaults, parsing and rejection") {
  const RunConfig d = parse_run_config("");
  CHECK(d.train.learning_rate == 1e-4);
  CHECK(d.train.batch_size == 2);
  CHECK(d.train.loss_weights == LossWeights{1, 1, 1});
  CHECK(d.train.grad_clip == 1.0);
  CHECK(d.train.model == "desk");

  const std::string text =
      "# overfit run\n"
      "learning_rate = 0.001\n"
      "batch_size=4\n"
      "epochs = 300   # plenty\n"
      "model = tiny\n"
      "schedule_T = 50\n"
      "loss_weight_ldm = 0.5\n"
      "use_logit_token = true\n"
      "data_dir = cohort\n"
      "output_dir = /abs/out\n"
      "\n";
  const RunConfig r = parse_run_config(text, "/runs/exp");
  CHECK(r.train.learning_rate == 1e-3);
  CHECK(r.train.batch_size == 4);
  CHECK(r.train.epochs == 300);
  CHECK(r.train.model == "tiny");
  CHECK(r.train.loss_weights == LossWeights{1, 0.5, 1});
  CHECK(r.train.use_logit_token);
  CHECK(r.data_dir == std::filesystem::path("/runs/exp/cohort"));
  CHECK(r.output_dir == std::filesystem::path("/abs/out"));
  CHECK(r.checkpoint_dir == std::filesystem::path("/runs/exp/checkpoints"));
  const ModelConfig mc = r.train.model_config();
  CHECK(mc.schedule_steps == 50);
  CHECK(mc.condition.use_logit_token);

  const RunConfig again = parse_run_config(format_run_config(r));
  CHECK(format_run_config(again) == format_run_config(r));

  CHECK_THROWS_WITH_AS(parse_run_config("learning_rat = 1\n"), doctest::Contains("learning_rat"), ArgumentError);
  CHECK_THROWS_AS(parse_run_config("learning_rate = fast\n"), ArgumentError);
  CHECK_THROWS_AS(parse_run_config("learning_rate = 0\n"), ArgumentError);
  CHECK_THROWS_AS(parse_run_config("batch_size = 0\n"), ArgumentError);
  CHECK_THROWS_AS(parse_run_config("loss_weight_c = -1\n"), ArgumentError);
  CHECK_THROWS_AS(parse_run_config("model = huge\n"), ArgumentError);
  CHECK_THROWS_AS(parse_run_config("epochs = 3\nepochs = 4\n"), ArgumentError);
  CHECK_THROWS_AS(parse_run_config("just words\n"), ArgumentError);
  CHECK_THROWS_AS(parse_run_config("test_fraction = 1\n"), ArgumentError);
  CHECK_THROWS_AS(parse_run_config("test_fraction = -0.1\n"), ArgumentError);
  CHECK(parse_run_config("test_fraction = 0\n").test_fraction == 0.0);
  CHECK_THROWS_AS(parse_run_config("use_logit_token = maybe\n"), ArgumentError);
}
