// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace bd {

/// Per-step variances of the forward noising chain, 1-based in t.
class NoiseSchedule {
 public:
  NoiseSchedule() = default;  // unconfigured: steps() == 0
  /// Validates 0 < beta_1 <= ... <= beta_T < 1.
  static NoiseSchedule from_betas(std::vector<double> betas);
  static NoiseSchedule linear(std::size_t steps, double beta_start, double beta_end);
  /// Linear 1e-4 .. 0.02 over 1000 steps, with both ends multiplied by
  /// 1000 / steps for shorter chains so the final alpha_bar stays near zero.
  /// Betas are capped at 0.999.
  static NoiseSchedule standard(std::size_t steps);

  std::size_t steps() const { return beta_.size(); }
  bool configured() const { return !beta_.empty(); }
  /// Throw IndexError unless 1 <= t <= steps().
  double beta(std::size_t t) const { return beta_[Index(t)]; }
  double alpha(std::size_t t) const { return 1.0 - beta_[Index(t)]; }
  double alpha_bar(std::size_t t) const { return alpha_bar_[Index(t)]; }
  const std::vector<double>& betas() const { return beta_; }

  bool operator==(const NoiseSchedule&) const = default;

 private:
  std::size_t Index(std::size_t t) const;
  std::vector<double> beta_;
  std::vector<double> alpha_bar_;
};

}  // namespace bd
