// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/training/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "braindiff/core/error.hpp"
#include "braindiff/data/io.hpp"

namespace bd {
namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& v) {
  T out{};
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ArgumentError("config key '" + key + "': '" + v + "' is not a valid number");
  return out;
}

bool ParseBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ArgumentError("config key '" + key + "': expected true or false, got '" + v + "'");
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ArgumentError("learning_rate must be > 0");
  if (batch_size == 0) throw ArgumentError("batch_size must be >= 1");
  if (schedule_T == 0) throw ArgumentError("schedule_T must be >= 1");
  for (double w : loss_weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("loss weights must be finite and >= 0");
  if (!(grad_clip >= 0.0)) throw ArgumentError("grad_clip must be >= 0");
  if (model != "desk" && model != "tiny") throw ArgumentError("model must be 'desk' or 'tiny', got '" + model + "'");
}

ModelConfig TrainConfig::model_config() const {
  ModelConfig c = model == "tiny" ? ModelConfig::tiny() : ModelConfig::desk();
  c.schedule_steps = schedule_T;
  c.condition.use_logit_token = use_logit_token;
  return c;
}

void RunConfig::validate() const {
  train.validate();
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw ArgumentError("test_fraction must be in [0, 1)");
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig c;
  auto path = [&](std::filesystem::path& dst) {
    return [&dst, &base_dir](const std::string&, const std::string& v) {
      std::filesystem::path p(v);
      dst = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    };
  };
  using Setter = std::function<void(const std::string&, const std::string&)>;
  TrainConfig& t = c.train;
  const std::map<std::string, Setter> setters{
      {"learning_rate", [&](auto& k, auto& v) { t.learning_rate = ParseNumber<double>(k, v); }},
      {"batch_size", [&](auto& k, auto& v) { t.batch_size = ParseNumber<std::size_t>(k, v); }},
      {"epochs", [&](auto& k, auto& v) { t.epochs = ParseNumber<std::size_t>(k, v); }},
      {"seed", [&](auto& k, auto& v) { t.seed = ParseNumber<std::uint64_t>(k, v); }},
      {"schedule_T", [&](auto& k, auto& v) { t.schedule_T = ParseNumber<std::size_t>(k, v); }},
      {"loss_weight_fe", [&](auto& k, auto& v) { t.loss_weights[0] = ParseNumber<double>(k, v); }},
      {"loss_weight_ldm", [&](auto& k, auto& v) { t.loss_weights[1] = ParseNumber<double>(k, v); }},
      {"loss_weight_c", [&](auto& k, auto& v) { t.loss_weights[2] = ParseNumber<double>(k, v); }},
      {"grad_clip", [&](auto& k, auto& v) { t.grad_clip = ParseNumber<double>(k, v); }},
      {"model", [&](auto&, auto& v) { t.model = v; }},
      {"use_logit_token", [&](auto& k, auto& v) { t.use_logit_token = ParseBool(k, v); }},
      {"checkpoint_every", [&](auto& k, auto& v) { t.checkpoint_every = ParseNumber<std::size_t>(k, v); }},
      {"data_dir", path(c.data_dir)},
      {"checkpoint_dir", path(c.checkpoint_dir)},
      {"output_dir", path(c.output_dir)},
      {"test_fraction", [&](auto& k, auto& v) { c.test_fraction = ParseNumber<double>(k, v); }},
      {"split_seed", [&](auto& k, auto& v) { c.split_seed = ParseNumber<std::uint64_t>(k, v); }},
  };
  if (!base_dir.empty()) {
    c.checkpoint_dir = base_dir / c.checkpoint_dir;
    c.output_dir = base_dir / c.output_dir;
  }
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ArgumentError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = Trim(std::string_view(line).substr(0, eq));
    const std::string value = Trim(std::string_view(line).substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end())
      throw ArgumentError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second)
      throw ArgumentError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    it->second(key, value);
  }
  c.validate();
  return c;
}

RunConfig read_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_text_file(path), path.parent_path());
}

std::string format_run_config(const RunConfig& c) {
  const TrainConfig& t = c.train;
  auto num = [](double v) { return format_shortest(v); };
  std::string s;
  s += "learning_rate = " + num(t.learning_rate) + "\n";
  s += "batch_size = " + std::to_string(t.batch_size) + "\n";
  s += "epochs = " + std::to_string(t.epochs) + "\n";
  s += "seed = " + std::to_string(t.seed) + "\n";
  s += "schedule_T = " + std::to_string(t.schedule_T) + "\n";
  s += "loss_weight_fe = " + num(t.loss_weights[0]) + "\n";
  s += "loss_weight_ldm = " + num(t.loss_weights[1]) + "\n";
  s += "loss_weight_c = " + num(t.loss_weights[2]) + "\n";
  s += "grad_clip = " + num(t.grad_clip) + "\n";
  s += "model = " + t.model + "\n";
  s += std::string("use_logit_token = ") + (t.use_logit_token ? "true" : "false") + "\n";
  s += "checkpoint_every = " + std::to_string(t.checkpoint_every) + "\n";
  if (!c.data_dir.empty()) s += "data_dir = " + c.data_dir.string() + "\n";
  s += "checkpoint_dir = " + c.checkpoint_dir.string() + "\n";
  s += "output_dir = " + c.output_dir.string() + "\n";
  s += "test_fraction = " + num(c.test_fraction) + "\n";
  s += "split_seed = " + std::to_string(c.split_seed) + "\n";
  return s;
}

}  // namespace bd
