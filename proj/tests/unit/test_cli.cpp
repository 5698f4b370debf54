// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "braindiff/analysis/export.hpp"
#include "braindiff/cli/cli.hpp"
#include "braindiff/core/error.hpp"
#include "braindiff/data/io.hpp"
#include "braindiff/data/manifest.hpp"
#include "braindiff/training/trainer.hpp"

using namespace bd;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result Run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path Root() {
  static const fs::path root = [] {
    auto p = fs::temp_directory_path() / "braindiff_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

std::string P(const fs::path& p) { return p.string(); }

nlohmann::json Summary(const fs::path& dir) { return nlohmann::json::parse(read_text_file(dir / "summary.json")); }

// Every file under dir, relative path -> contents.
std::map<std::string, std::string> Snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_text_file(e.path());
  return files;
}

// 8 subjects trained to memorization once for the whole binary.
const fs::path& TrainedCheckpoint() {
  static const fs::path ckpt = [] {
    const auto dir = Root() / "overfit";
    REQUIRE(Run({"synth-data", "--out", P(dir / "cohort"), "--nc", "3", "--emci", "3", "--lmci", "2", "--seed", "11"})
                .code == 0);
    write_text_file(dir / "run.cfg",
                    "model = tiny\nschedule_T = 50\nlearning_rate = 2e-3\nepochs = 60\nseed = 5\n"
                    "test_fraction = 0\ncheckpoint_every = 0\ndata_dir = cohort\n");
    const auto r = Run({"train", "--config", P(dir / "run.cfg"), "--quiet"});
    REQUIRE(r.code == 0);
    return dir / "checkpoints" / "epoch-0060.ckpt";
  }();
  return ckpt;
}

}  // namespace

TEST_CASE("--help exits 0 for every subcommand and lists every flag") {
  const std::map<std::string, std::vector<std::string>> flags{
      {"synth-data", {"--out", "--nc", "--emci", "--lmci", "--seed"}},
      {"train", {"--config", "--out", "--resume", "--quiet"}},
      {"generate", {"--checkpoint", "--label", "--n", "--seed", "--out", "--data", "--strength"}},
      {"evaluate", {"--checkpoint", "--data", "--out", "--method"}},
      {"analyze", {"--generated", "--reference", "--groups", "--out", "--alpha"}},
      {"export", {"--results", "--format", "--out"}},
  };
  const auto top = Run({"--help"});
  CHECK(top.code == 0);
  for (const auto& [cmd, list] : flags) {
    CAPTURE(cmd);
    CHECK(top.out.find(cmd) != std::string::npos);
    const auto r = Run({cmd, "--help"});
    CHECK(r.code == 0);
    for (const auto& f : list) {
      CAPTURE(f);
      CHECK(r.out.find(f) != std::string::npos);
    }
  }
}

TEST_CASE("argument errors exit 2") {
  CHECK(Run({}).code == exit_code::kArgument);
  CHECK(Run({"frobnicate"}).code == exit_code::kArgument);
  CHECK(Run({"synth-data"}).code == exit_code::kArgument);
  CHECK(Run({"synth-data", "--out", P(Root() / "x"), "--nc", "many"}).code == exit_code::kArgument);
  CHECK(Run({"export", "--results", P(Root()), "--format", "pie"}).code == exit_code::kArgument);

  write_text_file(Root() / "bad.cfg", "learning_rat = 1\n");
  const auto r = Run({"train", "--config", P(Root() / "bad.cfg")});
  CHECK(r.code == exit_code::kArgument);
  CHECK(r.err.find("learning_rat") != std::string::npos);

  setenv("BRAINDIFF_DEVICE", "cuda", 1);
  CHECK(Run({"synth-data", "--out", P(Root() / "dev"), "--nc", "0", "--emci", "0", "--lmci", "0"}).code ==
        exit_code::kArgument);
  setenv("BRAINDIFF_DEVICE", "cpu", 1);
  CHECK(Run({"synth-data", "--out", P(Root() / "dev"), "--nc", "0", "--emci", "0", "--lmci", "0"}).code == 0);
  unsetenv("BRAINDIFF_DEVICE");
}

TEST_CASE("exit_code_for maps the error hierarchy") {
  CHECK(exit_code_for(ArgumentError("a")) == 2);
  CHECK(exit_code_for(IoError("a")) == 3);
  CHECK(exit_code_for(FormatError("a")) == 4);
  CHECK(exit_code_for(ValidationError("a")) == 4);
  CHECK(exit_code_for(DimensionError("a")) == 4);
  CHECK(exit_code_for(NumericError("a")) == 1);
  CHECK(exit_code_for(std::runtime_error("a")) == 1);
}

TEST_CASE("synth-data: empty cohort, default counts and determinism") {
  const auto empty = Root() / "empty";
  CHECK(Run({"synth-data", "--out", P(empty), "--nc", "0", "--emci", "0", "--lmci", "0"}).code == 0);
  CHECK(read_manifest(empty).empty());
  CHECK(Summary(empty)["subjects"] == 0);

  const auto full = Root() / "defaults";
  REQUIRE(Run({"synth-data", "--out", P(full)}).code == 0);
  const auto entries = read_manifest(full);
  CHECK(entries.size() == 192);
  std::array<std::size_t, 3> per_class{};
  for (const auto& e : entries) ++per_class[class_index(e.label)];
  CHECK(per_class == std::array<std::size_t, 3>{87, 74, 31});
  fs::remove_all(full);

  const auto a = Root() / "det_a", b = Root() / "det_b";
  for (const auto& d : {a, b})
    REQUIRE(Run({"synth-data", "--out", P(d), "--nc", "2", "--emci", "1", "--lmci", "1", "--seed", "9"}).code == 0);
  const auto sa = Snapshot(a);
  CHECK(sa.size() == 2 * 4 + 4 + 2);  // volume + sidecar + network per subject, manifest, summary
  CHECK(sa == Snapshot(b));
  REQUIRE(Run({"synth-data", "--out", P(a), "--nc", "2", "--emci", "1", "--lmci", "1", "--seed", "9"}).code == 0);
  CHECK(Snapshot(a) == sa);
}

TEST_CASE("I/O and validation failures exit 3 and 4") {
  CHECK(Run({"train", "--config", P(Root() / "missing.cfg")}).code == exit_code::kIo);
  write_text_file(Root() / "nodata.cfg", "data_dir = absent\n");
  CHECK(Run({"train", "--config", P(Root() / "nodata.cfg")}).code == exit_code::kIo);
  CHECK(Run({"generate", "--checkpoint", P(Root() / "none.ckpt"), "--label", "NC", "--n", "1"}).code ==
        exit_code::kIo);

  const auto& ckpt = TrainedCheckpoint();
  const auto bytes = read_text_file(ckpt);
  write_text_file(Root() / "cut.ckpt", bytes.substr(0, bytes.size() / 2));
  CHECK(Run({"evaluate", "--checkpoint", P(Root() / "cut.ckpt"), "--data", P(ckpt.parent_path().parent_path() / "cohort")})
            .code == exit_code::kValidation);

  const auto cohort = Root() / "corrupt";
  REQUIRE(Run({"synth-data", "--out", P(cohort), "--nc", "2", "--emci", "0", "--lmci", "0"}).code == 0);
  write_text_file(cohort / "networks" / "sub-0001.csv", "0.5,0.5\n");
  const auto r = Run({"analyze", "--generated", P(cohort), "--reference", P(cohort), "--out", P(Root() / "an_bad")});
  CHECK(r.code == exit_code::kValidation);
  CHECK(r.err.find("sub-0001") != std::string::npos);
}

TEST_CASE("evaluate: memorized training set scores 100%") {
  const auto& ckpt = TrainedCheckpoint();
  const auto out = Root() / "eval";
  const auto r = Run({"evaluate", "--checkpoint", P(ckpt), "--data", P(ckpt.parent_path().parent_path() / "cohort"),
                      "--out", P(out)});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("accuracy     100.00%") != std::string::npos);
  const auto m = nlohmann::json::parse(read_text_file(out / "metrics.json"));
  CHECK(m["accuracy"] == 100.0);
  CHECK(m["subjects"] == 8);
  const auto csv = read_text_file(out / "predictions.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
}

TEST_CASE("generate: count contract, validity and determinism") {
  const auto& ckpt = TrainedCheckpoint();
  const auto out = Root() / "gen";
  REQUIRE(Run({"generate", "--checkpoint", P(ckpt), "--label", "EMCI", "--n", "3", "--seed", "4", "--out", P(out)})
              .code == 0);
  std::size_t csvs = 0;
  for (const auto& e : fs::directory_iterator(out / "networks")) {
    ++csvs;
    CHECK_NOTHROW(load_matrix(e.path()));
  }
  CHECK(csvs == 3);
  const auto entries = read_manifest(out);
  REQUIRE(entries.size() == 3);
  for (const auto& e : entries) CHECK(e.label == DiagnosticClass::kEMCI);
  const auto first = Snapshot(out);
  REQUIRE(Run({"generate", "--checkpoint", P(ckpt), "--label", "EMCI", "--n", "3", "--seed", "4", "--out", P(out)})
              .code == 0);
  CHECK(Snapshot(out) == first);

  CHECK(Run({"generate", "--checkpoint", P(ckpt), "--label", "EMCI"}).code == exit_code::kArgument);
  CHECK(Run({"generate", "--checkpoint", P(ckpt), "--label", "AD", "--n", "1"}).code == exit_code::kArgument);

  const auto cohort = ckpt.parent_path().parent_path() / "cohort";
  const auto from = Root() / "gen_from";
  REQUIRE(Run({"generate", "--checkpoint", P(ckpt), "--data", P(cohort), "--label", "NC", "--out", P(from)}).code == 0);
  const auto derived = read_manifest(from);
  REQUIRE(derived.size() == 3);
  CHECK(derived[0].source == "sub-0001");
  CHECK(Run({"generate", "--checkpoint", P(ckpt), "--data", P(cohort), "--strength", "2", "--out", P(from)}).code ==
        exit_code::kArgument);
}

TEST_CASE("analyze and export") {
  const auto& ckpt = TrainedCheckpoint();
  const auto cohort = ckpt.parent_path().parent_path() / "cohort";

  const auto same = Root() / "an_same";
  REQUIRE(Run({"analyze", "--generated", P(cohort), "--reference", P(cohort), "--out", P(same)}).code == 0);
  const auto s = Summary(same);
  CHECK(s["comparisons"][0]["test"] == "paired");
  CHECK(s["comparisons"][0]["significant"] == 0);
  CHECK(parse_edge_csv(read_text_file(same / "edges_generated_vs_reference.csv")).size() == kEdgeCount);

  const auto gen = Root() / "an_gen";
  REQUIRE(Run({"generate", "--checkpoint", P(ckpt), "--data", P(cohort), "--out", P(gen)}).code == 0);
  const auto groups = Root() / "an_groups";
  REQUIRE(Run({"analyze", "--generated", P(gen), "--reference", P(cohort), "--groups", "--out", P(groups)}).code == 0);
  const auto g = Summary(groups);
  REQUIRE(g["comparisons"].size() == 4);
  CHECK(g["comparisons"][0]["test"] == "paired");
  CHECK(g["comparisons"][1]["name"] == "NC_vs_EMCI");
  CHECK(g["comparisons"][2]["test"] == "two-sample");
  CHECK(g["group_means"]["reference"]["NC"]["n"] == 3);

  const auto prior = Root() / "an_prior";
  REQUIRE(Run({"generate", "--checkpoint", P(ckpt), "--label", "NC", "--n", "3", "--out", P(prior)}).code == 0);
  REQUIRE(Run({"analyze", "--generated", P(prior), "--reference", P(cohort), "--out", P(prior / "an")}).code == 0);
  CHECK(Summary(prior / "an")["comparisons"][0]["test"] == "two-sample");

  REQUIRE(Run({"export", "--results", P(groups), "--format", "chord"}).code == 0);
  const auto chord = parse_chord_csv(read_text_file(groups / "export" / "chord_NC_vs_LMCI.csv"));
  const auto edges = parse_edge_csv(read_text_file(groups / "edges_NC_vs_LMCI.csv"));
  CHECK(chord == chord_rows(edges));
  CHECK(Run({"export", "--results", P(Root() / "empty"), "--format", "chord"}).code == exit_code::kIo);

  REQUIRE(Run({"evaluate", "--checkpoint", P(ckpt), "--data", P(cohort), "--out", P(Root() / "radar" / "a")}).code == 0);
  REQUIRE(Run({"evaluate", "--checkpoint", P(ckpt), "--data", P(cohort), "--out", P(Root() / "radar" / "b"), "--method",
               "second"})
              .code == 0);
  REQUIRE(Run({"export", "--results", P(Root() / "radar"), "--format", "radar", "--out", P(Root() / "radar_out")}).code ==
          0);
  const auto rows = parse_radar_csv(read_text_file(Root() / "radar_out" / "radar.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method == "braindiff");
  CHECK(rows[1].method == "second");
  CHECK(rows[0].metrics.accuracy == 100.0);
}

TEST_CASE("train: resume continues to the configured epoch count") {
  const auto& ckpt = TrainedCheckpoint();
  const auto dir = ckpt.parent_path().parent_path();
  write_text_file(dir / "more.cfg",
                  "model = tiny\nschedule_T = 50\nlearning_rate = 2e-3\nepochs = 62\nseed = 5\n"
                  "test_fraction = 0\ncheckpoint_every = 0\ndata_dir = cohort\noutput_dir = more\n");
  REQUIRE(Run({"train", "--config", P(dir / "more.cfg"), "--resume", P(ckpt), "--quiet"}).code == 0);
  CHECK(fs::is_regular_file(dir / "checkpoints" / "epoch-0062.ckpt"));
  CHECK(Summary(dir / "more")["epochs_completed"] == 62);
  CHECK(parse_loss_history(read_text_file(dir / "more" / "loss_history.csv")).size() == 62 * 4);

  write_text_file(dir / "other.cfg", "model = desk\nepochs = 62\ntest_fraction = 0\ndata_dir = cohort\n");
  CHECK(Run({"train", "--config", P(dir / "other.cfg"), "--resume", P(ckpt)}).code == exit_code::kArgument);
}
