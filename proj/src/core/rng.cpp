// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/core/rng.hpp"

#include <sstream>

#include "braindiff/core/error.hpp"

namespace bd {

namespace {
std::uint64_t SplitMix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) { return SplitMix(SplitMix(a) ^ b); }

std::vector<double> Rng::normals(std::size_t n) {
  std::vector<double> out(n);
  for (auto& v : out) v = normal();
  return out;
}

std::string Rng::serialize() const {
  std::ostringstream os;
  os.precision(17);
  os << engine_ << ' ' << normal_ << ' ' << uniform_;
  return os.str();
}

Rng Rng::deserialize(const std::string& state) {
  Rng rng;
  std::istringstream is(state);
  is >> rng.engine_ >> rng.normal_ >> rng.uniform_;
  if (!is) throw FormatError("corrupt RNG state string");
  return rng;
}

bool Rng::operator==(const Rng& other) const {
  return engine_ == other.engine_ && normal_ == other.normal_ && uniform_ == other.uniform_;
}

}  // namespace bd
