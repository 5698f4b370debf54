// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace bd {

/// splitmix64 finalizer over (a, b): derives independent stream seeds such
/// as one per subject from a cohort seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Seeded random source passed explicitly to every stochastic call. Its full
/// state (engine and the normal distribution's cached draw) serializes to a
/// string so checkpoints resume the exact stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  /// Uniform integer in [lo, hi].
  std::uint64_t integer(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(engine_);
  }
  std::vector<double> normals(std::size_t n);
  /// Independent child stream; advances this one by one draw.
  Rng fork() { return Rng(engine_()); }

  std::mt19937_64& engine() { return engine_; }

  std::string serialize() const;
  static Rng deserialize(const std::string& state);

  bool operator==(const Rng& other) const;

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace bd
