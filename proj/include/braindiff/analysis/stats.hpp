// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Per-edge t-tests between paired or independent sets of networks.

#include <cstddef>
#include <span>
#include <vector>

#include "braindiff/data/types.hpp"

namespace bd {

inline constexpr double kSignificanceLevel = 0.05;
inline constexpr std::size_t kEdgeCount = kRegions * (kRegions - 1) / 2;

struct TTestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;  // two-sided
  double degrees_of_freedom = 0.0;
  double mean_difference = 0.0;
};

/// d = x - y, t = mean(d) / (sd(d) / sqrt(n)) with the n-1 estimator, df = n-1.
/// When sd(d) = 0: p = 1 if mean(d) = 0, else p = 0 and t = +-inf.
/// Throws ArgumentError for n < 2 or unequal lengths.
TTestResult paired_t_test(std::span<const double> x, std::span<const double> y);

/// Pooled-variance two-sample test, df = nx + ny - 2, with the same
/// degenerate rule on a zero pooled variance. Each sample needs n >= 2.
TTestResult two_sample_t_test(std::span<const double> x, std::span<const double> y);

/// Two-sided Student-t tail probability P(|T| >= |t|).
double two_sided_p_value(double t, double degrees_of_freedom);

enum class EdgeDirection { kDeclined, kEnhanced };

struct EdgeTestResult {
  std::size_t i = 0;  // 0-based region indices, i < j
  std::size_t j = 0;
  double t_statistic = 0.0;
  double p_value = 1.0;
  double mean_difference = 0.0;  // mean(group1) - mean(group2)
  bool significant = false;
  EdgeDirection direction = EdgeDirection::kEnhanced;
};

/// Declined when group 1 has the larger mean on the edge.
EdgeDirection direction_of(double mean_difference);

/// One result per upper-triangle edge in (i, j) lexicographic order.
/// Paired mode requires equal, subject-aligned groups.
std::vector<EdgeTestResult> edgewise_comparison(const std::vector<ConnectivityMatrix>& group1,
                                                const std::vector<ConnectivityMatrix>& group2,
                                                bool paired, double threshold = kSignificanceLevel);

struct EdgeSummary {
  std::size_t significant = 0;
  std::size_t declined = 0;
  std::size_t enhanced = 0;
};
EdgeSummary summarize(const std::vector<EdgeTestResult>& results);

/// Mean over the 4005 upper-triangle edges.
double mean_connectivity(const ConnectivityMatrix& network);

}  // namespace bd
