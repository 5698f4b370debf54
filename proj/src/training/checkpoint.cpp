// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/training/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "braindiff/core/error.hpp"

namespace bd {
namespace {

constexpr char kMagic[8] = {'B', 'D', 'C', 'K', 'P', 'T', '0', '1'};
constexpr int kFormatVersion = 1;

std::uint64_t ToLittle(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

void AppendDoubles(std::string& out, std::span<const double> values) {
  const std::size_t at = out.size();
  out.resize(at + values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint64_t bits = ToLittle(std::bit_cast<std::uint64_t>(values[i]));
    std::memcpy(out.data() + at + i * 8, &bits, 8);
  }
}

void ReadDoubles(const std::string& blob, std::size_t offset, std::span<double> out) {
  if (offset + out.size() * 8 > blob.size()) throw FormatError("checkpoint: tensor data truncated");
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, blob.data() + offset + i * 8, 8);
    out[i] = std::bit_cast<double>(ToLittle(bits));
  }
}

nlohmann::json LossJson(const LossBreakdown& b) { return {b.fe, b.ldm, b.classification, b.total}; }

LossBreakdown LossFromJson(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw FormatError("checkpoint: malformed loss record");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

std::string Serialize(const TrainState& state) {
  const ParameterSet& params = state.model->parameters();
  nlohmann::json m;
  m["format"] = "braindiff-checkpoint";
  m["version"] = kFormatVersion;
  m["model_config"] = model_config_to_json(state.model->config());
  m["schedule"] = {{"steps", state.model->schedule().steps()}, {"betas", state.model->schedule().betas()}};
  nlohmann::json table = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& [name, t] : params.items()) {
    table.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
    offset += t.numel();
  }
  m["tensors"] = table;
  m["scalars"] = offset;
  m["optimizer"] = {{"step", state.optimizer.step}};
  m["epoch"] = state.epoch;
  m["step"] = state.step;
  m["rng"] = state.rng.serialize();
  nlohmann::json history = nlohmann::json::array();
  for (const auto& r : state.history) history.push_back({{"epoch", r.epoch}, {"step", r.step}, {"loss", LossJson(r.loss)}});
  m["history"] = history;
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : state.epochs) {
    nlohmann::json je{{"epoch", e.epoch}, {"loss", LossJson(e.mean_loss)}};
    if (e.test_metrics) {
      const auto& t = *e.test_metrics;
      je["test_metrics"] = {t.accuracy, t.sensitivity, t.specificity, t.f1};
    }
    epochs.push_back(je);
  }
  m["epochs"] = epochs;

  const std::string manifest = m.dump();
  std::string out(kMagic, 8);
  const std::uint64_t len = ToLittle(manifest.size());
  out.append(reinterpret_cast<const char*>(&len), 8);
  out += manifest;
  for (const auto& [_, t] : params.items()) AppendDoubles(out, t.data());
  for (const auto& v : state.optimizer.first) AppendDoubles(out, v);
  for (const auto& v : state.optimizer.second) AppendDoubles(out, v);
  return out;
}

void WriteOnce(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + tmp.string() + "' for writing");
    f.write(bytes.data(), std::streamsize(bytes.size()));
    f.flush();
    if (!f) throw IoError("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move checkpoint into place at '" + path.string() + "'");
  }
}

struct Parsed {
  nlohmann::json manifest;
  std::string data;
};

Parsed ReadFile(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw FormatError("'" + path.string() + "' is not a checkpoint (bad magic)");
  std::uint64_t len;
  std::memcpy(&len, bytes.data() + 8, 8);
  len = ToLittle(len);
  if (len > bytes.size() - 16) throw FormatError("checkpoint '" + path.string() + "': manifest truncated");
  Parsed p;
  try {
    p.manifest = nlohmann::json::parse(bytes.substr(16, len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint '" + path.string() + "': manifest is not JSON: " + e.what());
  }
  p.data = bytes.substr(16 + len);
  return p;
}

// Builds the model and fills its parameters; returns the scalar count.
std::unique_ptr<BrainDiffuser> RestoreModel(const Parsed& p, std::size_t& scalars) {
  const auto& m = p.manifest;
  if (m.value("format", "") != "braindiff-checkpoint" || m.value("version", 0) != kFormatVersion)
    throw FormatError("checkpoint: unsupported format or version");
  auto model = std::make_unique<BrainDiffuser>(model_config_from_json(m.at("model_config")), 0);
  const auto& schedule = m.at("schedule");
  if (schedule.at("steps").get<std::size_t>() != model->schedule().steps() ||
      schedule.at("betas").get<std::vector<double>>() != model->schedule().betas())
    throw FormatError("checkpoint: stored noise schedule does not match its model config");
  const auto& table = m.at("tensors");
  const auto& items = model->parameters().items();
  if (!table.is_array() || table.size() != items.size())
    throw FormatError("checkpoint: tensor table has " + std::to_string(table.size()) + " entries, model expects " +
                      std::to_string(items.size()));
  scalars = m.at("scalars").get<std::size_t>();
  if (p.data.size() != 3 * scalars * 8) throw FormatError("checkpoint: data section has the wrong size");
  for (std::size_t k = 0; k < items.size(); ++k) {
    const auto& [name, t] = items[k];
    const auto& e = table[k];
    if (e.at("name").get<std::string>() != name || e.at("shape").get<Shape>() != t.shape())
      throw FormatError("checkpoint: tensor " + std::to_string(k) + " is '" + e.at("name").get<std::string>() +
                        "', model expects '" + name + "' " + shape_string(t.shape()));
    const std::size_t offset = e.at("offset").get<std::size_t>();
    if (offset + t.numel() > scalars) throw FormatError("checkpoint: tensor '" + name + "' out of bounds");
    Tensor h = t;
    ReadDoubles(p.data, offset * 8, h.mutable_data());
  }
  return model;
}

template <typename F>
auto Guarded(const std::filesystem::path& path, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint '" + path.string() + "': " + e.what());
  } catch (const ArgumentError& e) {
    throw FormatError("checkpoint '" + path.string() + "': " + e.what());
  }
}

}  // namespace

nlohmann::json model_config_to_json(const ModelConfig& c) {
  return {
      {"fenet",
       {{"stem_channels", c.fenet.stem_channels},
        {"stem_stride", c.fenet.stem_stride},
        {"channels_per_block", c.fenet.channels_per_block},
        {"block_stride", c.fenet.block_stride},
        {"pool_bins", c.fenet.pool_bins}}},
      {"autoencoder",
       {{"latent_channels", c.autoencoder.latent_channels},
        {"hidden_channels", c.autoencoder.hidden_channels},
        {"downsample_levels", c.autoencoder.downsample_levels}}},
      {"unet",
       {{"base_channels", c.unet.base_channels},
        {"time_dim", c.unet.time_dim},
        {"attention_dim", c.unet.attention_dim}}},
      {"condition",
       {{"tokens", c.condition.tokens}, {"dim", c.condition.dim}, {"use_logit_token", c.condition.use_logit_token}}},
      {"gcn", {{"hidden", c.gcn.hidden}}},
      {"schedule_steps", c.schedule_steps},
  };
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    const auto& f = j.at("fenet");
    c.fenet.stem_channels = f.at("stem_channels").get<std::size_t>();
    c.fenet.stem_stride = f.at("stem_stride").get<std::size_t>();
    c.fenet.channels_per_block = f.at("channels_per_block").get<std::vector<std::size_t>>();
    c.fenet.block_stride = f.at("block_stride").get<std::size_t>();
    c.fenet.pool_bins = f.at("pool_bins").get<std::array<std::size_t, 3>>();
    const auto& a = j.at("autoencoder");
    c.autoencoder.latent_channels = a.at("latent_channels").get<std::size_t>();
    c.autoencoder.hidden_channels = a.at("hidden_channels").get<std::size_t>();
    c.autoencoder.downsample_levels = a.at("downsample_levels").get<std::size_t>();
    const auto& u = j.at("unet");
    c.unet.base_channels = u.at("base_channels").get<std::size_t>();
    c.unet.time_dim = u.at("time_dim").get<std::size_t>();
    c.unet.attention_dim = u.at("attention_dim").get<std::size_t>();
    const auto& k = j.at("condition");
    c.condition.tokens = k.at("tokens").get<std::size_t>();
    c.condition.dim = k.at("dim").get<std::size_t>();
    c.condition.use_logit_token = k.at("use_logit_token").get<bool>();
    c.gcn.hidden = j.at("gcn").at("hidden").get<std::size_t>();
    c.schedule_steps = j.at("schedule_steps").get<std::size_t>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model config: ") + e.what());
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("model config: ") + e.what());
  }
}

void save_checkpoint(const TrainState& state, const std::filesystem::path& path) {
  if (!state.model) throw StateError("save_checkpoint: state holds no model");
  const std::string bytes = Serialize(state);
  try {
    WriteOnce(path, bytes);
  } catch (const IoError&) {
    try {
      WriteOnce(path, bytes);
    } catch (const IoError& e) {
      throw IoError(std::string("checkpoint write failed after retry: ") + e.what());
    }
  }
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  const Parsed p = ReadFile(path);
  return Guarded(path, [&] {
    TrainState s;
    std::size_t scalars = 0;
    s.model = RestoreModel(p, scalars);
    const auto& m = p.manifest;
    s.optimizer = AdamState::zeros(s.model->parameters());
    s.optimizer.step = m.at("optimizer").at("step").get<std::uint64_t>();
    std::size_t offset = scalars * 8;
    for (auto& v : s.optimizer.first) ReadDoubles(p.data, offset, v), offset += v.size() * 8;
    for (auto& v : s.optimizer.second) ReadDoubles(p.data, offset, v), offset += v.size() * 8;
    s.epoch = m.at("epoch").get<std::size_t>();
    s.step = m.at("step").get<std::size_t>();
    try {
      s.rng = Rng::deserialize(m.at("rng").get<std::string>());
    } catch (const Error& e) {
      throw FormatError(std::string("checkpoint: bad rng state: ") + e.what());
    }
    for (const auto& r : m.at("history"))
      s.history.push_back({r.at("epoch").get<std::size_t>(), r.at("step").get<std::size_t>(), LossFromJson(r.at("loss"))});
    for (const auto& e : m.at("epochs")) {
      EpochSummary summary{e.at("epoch").get<std::size_t>(), LossFromJson(e.at("loss")), std::nullopt};
      if (e.contains("test_metrics")) {
        const auto v = e.at("test_metrics").get<std::array<double, 4>>();
        summary.test_metrics = ClassificationMetrics{v[0], v[1], v[2], v[3]};
      }
      s.epochs.push_back(summary);
    }
    return s;
  });
}

std::unique_ptr<BrainDiffuser> load_model(const std::filesystem::path& path) {
  const Parsed p = ReadFile(path);
  return Guarded(path, [&] {
    std::size_t scalars = 0;
    return RestoreModel(p, scalars);
  });
}

}  // namespace bd
