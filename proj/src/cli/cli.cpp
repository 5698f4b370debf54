// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/cli/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <optional>

#include "braindiff/analysis/export.hpp"
#include "braindiff/analysis/metrics.hpp"
#include "braindiff/analysis/stats.hpp"
#include "braindiff/core/error.hpp"
#include "braindiff/data/io.hpp"
#include "braindiff/data/manifest.hpp"
#include "braindiff/data/pipeline.hpp"
#include "braindiff/data/synthetic.hpp"
#include "braindiff/training/checkpoint.hpp"
#include "braindiff/training/trainer.hpp"

namespace bd {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kDeviceVariable = "BRAINDIFF_DEVICE";

std::string Device() {
  const char* v = std::getenv(kDeviceVariable);
  const std::string device = v && *v ? v : "cpu";
  if (device != "cpu")
    throw ArgumentError(std::string(kDeviceVariable) + "='" + device + "': only 'cpu' is available");
  return device;
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory '" + dir.string() + "'");
}

void RequireDir(const fs::path& dir, const char* what) {
  if (!fs::is_directory(dir)) throw IoError(std::string(what) + " '" + dir.string() + "' is not a directory");
}

void WriteSummary(const fs::path& dir, json summary, const std::string& device) {
  summary["device"] = device;
  write_text_file(dir / "summary.json", summary.dump(2) + "\n");
}

std::string IndexedId(const char* prefix, std::size_t k) {
  char id[32];
  std::snprintf(id, sizeof(id), "%s-%04zu", prefix, k);
  return id;
}

std::string Fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

json MetricsJson(const ClassificationMetrics& m) {
  return {{"accuracy", m.accuracy}, {"sensitivity", m.sensitivity}, {"specificity", m.specificity}, {"f1", m.f1}};
}

json LossJson(const LossBreakdown& b) {
  return {{"L_FE", b.fe}, {"L_LDM", b.ldm}, {"L_C", b.classification}, {"total", b.total}};
}

std::vector<std::string> Ids(const std::vector<SubjectRecord>& records) {
  std::vector<std::string> ids;
  for (const auto& r : records) ids.push_back(r.subject_id);
  return ids;
}

// ---------------------------------------------------------------- synth-data

struct SynthOptions {
  fs::path out;
  CohortCounts counts{87, 74, 31};
  std::uint64_t seed = 0;
};

int SynthData(const SynthOptions& o, std::ostream& out) {
  const auto device = Device();
  EnsureDir(o.out / "volumes");
  EnsureDir(o.out / "networks");
  std::vector<ManifestEntry> entries;
  for_each_synthetic_subject(o.counts, o.seed, [&](SubjectRecord&& r) {
    ManifestEntry e{r.subject_id, r.label, "volumes/" + r.subject_id + ".f32", "networks/" + r.subject_id + ".csv", ""};
    save_volume(r.volume, o.out / e.volume);
    save_matrix(r.reference_network, o.out / e.network);
    entries.push_back(std::move(e));
  });
  write_manifest(o.out, entries);
  WriteSummary(o.out,
               {{"command", "synth-data"},
                {"seed", o.seed},
                {"counts", {{"NC", o.counts.nc}, {"EMCI", o.counts.emci}, {"LMCI", o.counts.lmci}}},
                {"subjects", entries.size()}},
               device);
  out << "wrote " << entries.size() << " subjects to " << o.out.string() << "\n";
  return exit_code::kOk;
}

// --------------------------------------------------------------------- train

struct TrainOptions {
  fs::path config;
  fs::path out;
  fs::path resume;
  bool quiet = false;
};

int Train(const TrainOptions& o, std::ostream& out) {
  const auto device = Device();
  RunConfig rc = read_run_config(o.config);
  if (!o.out.empty()) rc.output_dir = o.out;
  rc.validate();
  if (rc.data_dir.empty()) throw ArgumentError(o.config.string() + ": data_dir is required");
  RequireDir(rc.data_dir, "data_dir");
  if (!o.resume.empty() && !fs::is_regular_file(o.resume))
    throw IoError("checkpoint '" + o.resume.string() + "' not found");
  EnsureDir(rc.checkpoint_dir);
  EnsureDir(rc.output_dir);

  CohortSplit split;
  if (rc.test_fraction > 0.0) {
    split = split_cohort(load_subjects(rc.data_dir), rc.test_fraction, rc.split_seed);
  } else {
    split.train = load_subjects(rc.data_dir);
    split.seed = rc.split_seed;
  }
  if (split.train.empty()) throw ValidationError(rc.data_dir.string() + ": cohort has no subjects");

  TrainState state;
  if (!o.resume.empty()) {
    state = load_checkpoint(o.resume);
    if (!(state.model->config() == rc.train.model_config()))
      throw ArgumentError("checkpoint '" + o.resume.string() + "' was trained with a different model configuration");
  } else {
    state = init_train_state(rc.train);
  }

  TrainLoopOptions loop;
  loop.checkpoint_dir = rc.checkpoint_dir;
  if (!o.quiet)
    loop.on_epoch = [&](const EpochSummary& s) {
      out << "epoch " << s.epoch << "/" << rc.train.epochs << "  L_FE " << Fixed(s.mean_loss.fe, 5) << "  L_LDM "
          << Fixed(s.mean_loss.ldm, 5) << "  L_C " << Fixed(s.mean_loss.classification, 5) << "  total "
          << Fixed(s.mean_loss.total, 5);
      if (s.test_metrics) out << "  test accuracy " << Fixed(s.test_metrics->accuracy) << "%";
      out << "\n";
    };
  train_loop(state, split, rc.train, loop);

  write_text_file(rc.output_dir / "loss_history.csv", format_loss_history(state.history));
  json epochs = json::array();
  for (const auto& e : state.epochs) {
    json j{{"epoch", e.epoch}, {"mean_loss", LossJson(e.mean_loss)}};
    if (e.test_metrics) j["test_metrics"] = MetricsJson(*e.test_metrics);
    epochs.push_back(std::move(j));
  }
  json summary{{"command", "train"},
               {"model", rc.train.model},
               {"epochs_completed", state.epoch},
               {"steps", state.step},
               {"train_subjects", Ids(split.train)},
               {"test_subjects", Ids(split.test)},
               {"epochs", std::move(epochs)}};
  const fs::path last = epoch_checkpoint_path(rc.checkpoint_dir, state.epoch);
  if (fs::is_regular_file(last)) summary["checkpoint"] = last.string();
  WriteSummary(rc.output_dir, std::move(summary), device);
  out << "trained " << state.epoch << " epochs; outputs in " << rc.output_dir.string() << "\n";
  return exit_code::kOk;
}

// ------------------------------------------------------------------ generate

struct GenerateOptions {
  fs::path checkpoint;
  std::string label;
  std::optional<std::size_t> n;
  std::uint64_t seed = 0;
  fs::path out = "out/generate";
  fs::path data;
  double strength = 0.5;
};

int Generate(const GenerateOptions& o, std::ostream& out) {
  const auto device = Device();
  std::optional<DiagnosticClass> label;
  if (!o.label.empty()) {
    try {
      label = parse_class(o.label);
    } catch (const ValidationError& e) {
      throw ArgumentError(e.what());
    }
  }
  if (o.data.empty() && (!label || !o.n)) throw ArgumentError("generate: --label and --n are required without --data");
  if (!(o.strength >= 0.0 && o.strength <= 1.0)) throw ArgumentError("generate: --strength must be in [0, 1]");
  if (!o.data.empty()) RequireDir(o.data, "--data");
  const auto model = load_model(o.checkpoint);
  EnsureDir(o.out / "networks");

  std::vector<ManifestEntry> entries;
  auto emit = [&](ManifestEntry e, const ConnectivityMatrix& net) {
    e.network = "networks/" + e.subject_id + ".csv";
    save_matrix(net, o.out / e.network);
    entries.push_back(std::move(e));
  };
  if (o.data.empty()) {
    for (std::size_t k = 0; k < *o.n; ++k) {
      Rng rng(mix_seed(o.seed, k));
      emit({IndexedId("gen", k + 1), *label, "", "", ""}, model->generate(*label, rng));
    }
  } else {
    // One network per matching subject, derived from its own latent.
    std::size_t k = 0;
    for (const auto& e : read_manifest(o.data)) {
      if (label && e.label != *label) continue;
      if (o.n && k == *o.n) break;
      if (e.volume.empty()) throw FormatError("subject '" + e.subject_id + "' lists no volume");
      const DtiVolume volume = load_volume(o.data / e.volume);
      Rng rng(mix_seed(o.seed, k++));
      emit({"gen-" + e.subject_id, e.label, "", "", e.subject_id},
           model->generate_from(volume, e.label, o.strength, rng));
    }
  }
  write_manifest(o.out, entries);
  json summary{{"command", "generate"},
               {"mode", o.data.empty() ? "noise" : "subject"},
               {"seed", o.seed},
               {"networks", entries.size()}};
  if (label) summary["label"] = std::string(class_name(*label));
  if (!o.data.empty()) summary["strength"] = o.strength;
  WriteSummary(o.out, std::move(summary), device);
  out << "wrote " << entries.size() << " networks to " << o.out.string() << "\n";
  return exit_code::kOk;
}

// ------------------------------------------------------------------ evaluate

struct EvaluateOptions {
  fs::path checkpoint;
  fs::path data;
  fs::path out = "out/evaluate";
  std::string method = "braindiff";
};

int Evaluate(const EvaluateOptions& o, std::ostream& out) {
  const auto device = Device();
  RequireDir(o.data, "--data");
  if (o.method.empty() || o.method.find_first_of(",\n") != std::string::npos)
    throw ArgumentError("evaluate: --method must be non-empty without ',' or newlines");
  const auto model = load_model(o.checkpoint);
  const auto entries = read_manifest(o.data);
  EnsureDir(o.out);

  ConfusionMatrix cm;
  std::string csv = "subject_id,label,predicted,logit_NC,logit_EMCI,logit_LMCI\n";
  for (const auto& e : entries) {
    if (e.volume.empty()) throw FormatError("subject '" + e.subject_id + "' lists no volume");
    const auto p = model->classify(model->reconstruct_network(load_volume(o.data / e.volume)));
    cm.add(class_index(e.label), p.predicted);
    csv += e.subject_id + ',' + std::string(class_name(e.label)) + ',' +
           std::string(class_name(class_from_index(p.predicted)));
    for (double l : p.logits) csv += ',' + format_shortest(l);
    csv += '\n';
  }
  const auto m = compute_metrics(cm);
  write_text_file(o.out / "predictions.csv", csv);
  json metrics = MetricsJson(m);
  metrics["method"] = o.method;
  metrics["subjects"] = cm.total();
  metrics["confusion"] = cm.counts;
  write_text_file(o.out / "metrics.json", metrics.dump(2) + "\n");
  WriteSummary(o.out, {{"command", "evaluate"}, {"subjects", cm.total()}, {"metrics", MetricsJson(m)}}, device);

  out << "accuracy     " << Fixed(m.accuracy) << "%\n"
      << "sensitivity  " << Fixed(m.sensitivity) << "%\n"
      << "specificity  " << Fixed(m.specificity) << "%\n"
      << "f1           " << Fixed(m.f1) << "%\n";
  return exit_code::kOk;
}

// ------------------------------------------------------------------- analyze

struct AnalyzeOptions {
  fs::path generated;
  fs::path reference;
  bool groups = false;
  fs::path out = "out/analyze";
  double alpha = kSignificanceLevel;
};

json GroupMeans(const std::vector<LabeledNetwork>& nets) {
  json j = json::object();
  for (auto c : kAllClasses) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& x : nets)
      if (x.entry.label == c) sum += mean_connectivity(x.network), ++n;
    if (n > 0) j[std::string(class_name(c))] = {{"n", n}, {"mean_connectivity", sum / double(n)}};
  }
  return j;
}

int Analyze(const AnalyzeOptions& o, std::ostream& out) {
  const auto device = Device();
  if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw ArgumentError("analyze: --alpha must be in (0, 1)");
  RequireDir(o.generated, "--generated");
  RequireDir(o.reference, "--reference");
  const auto gen = load_networks(o.generated);
  const auto ref = load_networks(o.reference);
  EnsureDir(o.out);

  // Generated networks pair with the reference subject they came from (or
  // share an id with); otherwise the two sets are compared as groups.
  std::map<std::string, std::size_t> ref_index;
  for (std::size_t k = 0; k < ref.size(); ++k) ref_index[ref[k].entry.subject_id] = k;
  std::vector<ConnectivityMatrix> g1, g2;
  bool paired = !gen.empty();
  std::map<std::string, int> used;
  for (const auto& x : gen) {
    const auto& key = x.entry.source.empty() ? x.entry.subject_id : x.entry.source;
    const auto it = ref_index.find(key);
    if (it == ref_index.end() || used[key]++) {
      paired = false;
      break;
    }
    g1.push_back(x.network);
    g2.push_back(ref[it->second].network);
  }
  if (!paired) {
    g1.clear();
    g2.clear();
    for (const auto& x : gen) g1.push_back(x.network);
    for (const auto& x : ref) g2.push_back(x.network);
  }

  json comparisons = json::array();
  auto compare = [&](const std::string& name, const std::vector<ConnectivityMatrix>& a,
                     const std::vector<ConnectivityMatrix>& b, bool is_paired) {
    const auto res = edgewise_comparison(a, b, is_paired, o.alpha);
    write_text_file(o.out / ("edges_" + name + ".csv"), format_edge_csv(res));
    const auto s = summarize(res);
    comparisons.push_back({{"name", name},
                           {"test", is_paired ? "paired" : "two-sample"},
                           {"n1", a.size()},
                           {"n2", b.size()},
                           {"significant", s.significant},
                           {"declined", s.declined},
                           {"enhanced", s.enhanced}});
    out << name << ": " << s.significant << " of " << res.size() << " edges significant (" << s.declined
        << " declined, " << s.enhanced << " enhanced)\n";
  };
  compare("generated_vs_reference", g1, g2, paired);

  if (o.groups) {
    std::array<std::vector<ConnectivityMatrix>, kNumClasses> by_class;
    for (const auto& x : gen) by_class[class_index(x.entry.label)].push_back(x.network);
    for (std::size_t a = 0; a < kNumClasses; ++a)
      for (std::size_t b = a + 1; b < kNumClasses; ++b) {
        const std::string name = std::string(class_name(class_from_index(a))) + "_vs_" +
                                 std::string(class_name(class_from_index(b)));
        if (by_class[a].size() < 2 || by_class[b].size() < 2) {
          comparisons.push_back({{"name", name}, {"skipped", "fewer than 2 networks in a group"}});
          continue;
        }
        compare(name, by_class[a], by_class[b], false);
      }
  }
  WriteSummary(o.out,
               {{"command", "analyze"},
                {"alpha", o.alpha},
                {"comparisons", std::move(comparisons)},
                {"group_means", {{"generated", GroupMeans(gen)}, {"reference", GroupMeans(ref)}}}},
               device);
  return exit_code::kOk;
}

// -------------------------------------------------------------------- export

struct ExportOptions {
  fs::path results;
  std::string format;
  fs::path out;
};

int Export(const ExportOptions& o, std::ostream& out) {
  const auto device = Device();
  RequireDir(o.results, "--results");
  const fs::path dest = o.out.empty() ? o.results / "export" : o.out;
  std::vector<fs::path> inputs;
  json files = json::array();
  if (o.format == "chord") {
    for (const auto& e : fs::directory_iterator(o.results)) {
      const auto name = e.path().filename().string();
      if (e.is_regular_file() && name.starts_with("edges_") && name.ends_with(".csv")) inputs.push_back(e.path());
    }
    if (inputs.empty()) throw IoError("no edges_*.csv files in '" + o.results.string() + "'");
    std::sort(inputs.begin(), inputs.end());
    EnsureDir(dest);
    for (const auto& p : inputs) {
      const auto name = "chord_" + p.filename().string().substr(6);
      export_chord_data(parse_edge_csv(read_text_file(p)), dest / name);
      files.push_back(name);
    }
  } else {
    for (const auto& e : fs::recursive_directory_iterator(o.results))
      if (e.is_regular_file() && e.path().filename() == "metrics.json") inputs.push_back(e.path());
    if (inputs.empty()) throw IoError("no metrics.json files under '" + o.results.string() + "'");
    std::sort(inputs.begin(), inputs.end());
    std::vector<RadarRow> rows;
    for (const auto& p : inputs) {
      json j;
      try {
        j = json::parse(read_text_file(p));
        RadarRow r;
        r.method = j.contains("method") ? j.at("method").get<std::string>()
                                        : fs::relative(p.parent_path(), o.results).string();
        r.metrics = {j.at("accuracy").get<double>(), j.at("sensitivity").get<double>(),
                     j.at("specificity").get<double>(), j.at("f1").get<double>()};
        rows.push_back(std::move(r));
      } catch (const json::exception& e) {
        throw FormatError(p.string() + ": " + e.what());
      }
    }
    EnsureDir(dest);
    export_radar_data(rows, dest / "radar.csv");
    files.push_back("radar.csv");
  }
  WriteSummary(dest, {{"command", "export"}, {"format", o.format}, {"inputs", inputs.size()}, {"files", files}},
               device);
  out << "wrote " << files.size() << " " << o.format << " file(s) to " << dest.string() << "\n";
  return exit_code::kOk;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ArgumentError*>(&e)) return exit_code::kArgument;
  if (dynamic_cast<const IoError*>(&e)) return exit_code::kIo;
  if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e))
    return exit_code::kValidation;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return exit_code::kIo;
  return exit_code::kFailure;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Structural brain network generation and classification from DTI volumes.", "braindiff");
  app.require_subcommand(1);
  app.footer(std::string("Environment: ") + kDeviceVariable + " selects the compute device (only 'cpu').");

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth-data", "Write a synthetic cohort: volumes, networks and a manifest.");
  synth_cmd->add_option("--out", synth.out, "Cohort directory")->required();
  synth_cmd->add_option("--nc", synth.counts.nc, "Number of NC subjects")->capture_default_str();
  synth_cmd->add_option("--emci", synth.counts.emci, "Number of EMCI subjects")->capture_default_str();
  synth_cmd->add_option("--lmci", synth.counts.lmci, "Number of LMCI subjects")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Cohort seed")->capture_default_str();

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train on a cohort described by a run config file.");
  train_cmd->add_option("--config", train.config, "Run config (key = value lines)")->required();
  train_cmd->add_option("--out", train.out, "Output directory; overrides output_dir from the config");
  train_cmd->add_option("--resume", train.resume, "Continue from this checkpoint up to the configured epochs");
  train_cmd->add_flag("--quiet", train.quiet, "Do not print per-epoch losses");

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "Generate networks from a trained checkpoint.");
  gen_cmd->add_option("--checkpoint", gen.checkpoint, "Checkpoint file")->required();
  gen_cmd->add_option("--label", gen.label, "Class to condition on: NC, EMCI or LMCI (filters --data)");
  gen_cmd->add_option("--n", gen.n, "Number of networks (with --data: at most this many subjects)");
  gen_cmd->add_option("--seed", gen.seed, "Sampling seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->capture_default_str();
  gen_cmd->add_option("--data", gen.data, "Cohort directory; generate one network per subject from its latent");
  gen_cmd->add_option("--strength", gen.strength, "With --data: fraction of the chain to noise and reverse, in [0, 1]")
      ->capture_default_str();

  EvaluateOptions eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Classify a cohort's reconstructed networks and report metrics.");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--data", eval.data, "Cohort directory")->required();
  eval_cmd->add_option("--out", eval.out, "Output directory")->capture_default_str();
  eval_cmd->add_option("--method", eval.method, "Method name recorded in metrics.json")->capture_default_str();

  AnalyzeOptions an;
  auto* an_cmd = app.add_subcommand("analyze", "Edgewise t-tests between generated and reference networks.");
  an_cmd->add_option("--generated", an.generated, "Directory of generated networks (with manifest)")->required();
  an_cmd->add_option("--reference", an.reference, "Reference cohort directory")->required();
  an_cmd->add_flag("--groups", an.groups, "Also contrast the diagnostic groups within the generated networks");
  an_cmd->add_option("--out", an.out, "Output directory")->capture_default_str();
  an_cmd->add_option("--alpha", an.alpha, "Significance level")->capture_default_str();

  ExportOptions ex;
  auto* ex_cmd = app.add_subcommand("export", "Write chord or radar plot data from analysis or evaluation results.");
  ex_cmd->add_option("--results", ex.results, "analyze output (chord) or a tree of evaluate outputs (radar)")
      ->required();
  ex_cmd->add_option("--format", ex.format, "chord or radar")->required()->check(CLI::IsMember({"chord", "radar"}));
  ex_cmd->add_option("--out", ex.out, "Output directory (default: <results>/export)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::kOk : exit_code::kArgument;
  }

  try {
    if (*synth_cmd) return SynthData(synth, out);
    if (*train_cmd) return Train(train, out);
    if (*gen_cmd) return Generate(gen, out);
    if (*eval_cmd) return Evaluate(eval, out);
    if (*an_cmd) return Analyze(an, out);
    if (*ex_cmd) return Export(ex, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return exit_code::kFailure;
}

}  // namespace bd
