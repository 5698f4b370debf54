// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/analysis/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "braindiff/core/error.hpp"

namespace bd {
namespace {

double Mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double SumSquaredDeviation(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s;
}

TTestResult Finish(double diff, double standard_error, double df) {
  TTestResult r;
  r.mean_difference = diff;
  r.degrees_of_freedom = df;
  if (standard_error == 0.0) {
    r.t_statistic = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    r.p_value = diff == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t_statistic = diff / standard_error;
  r.p_value = two_sided_p_value(r.t_statistic, df);
  return r;
}

}  // namespace

double two_sided_p_value(double t, double degrees_of_freedom) {
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t dist(degrees_of_freedom);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

TTestResult paired_t_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw ArgumentError("paired t-test: samples differ in length (" + std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()) + ")");
  const std::size_t n = x.size();
  if (n < 2) throw ArgumentError("paired t-test needs at least 2 pairs, got " + std::to_string(n));
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - y[i];
  const double m = Mean(d);
  const double sd = std::sqrt(SumSquaredDeviation(d, m) / double(n - 1));
  return Finish(m, sd / std::sqrt(double(n)), double(n - 1));
}

TTestResult two_sample_t_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2)
    throw ArgumentError("two-sample t-test needs at least 2 values per sample, got " +
                        std::to_string(x.size()) + " and " + std::to_string(y.size()));
  const double nx = double(x.size()), ny = double(y.size());
  const double mx = Mean(x), my = Mean(y);
  const double pooled = (SumSquaredDeviation(x, mx) + SumSquaredDeviation(y, my)) / (nx + ny - 2.0);
  return Finish(mx - my, std::sqrt(pooled * (1.0 / nx + 1.0 / ny)), nx + ny - 2.0);
}

EdgeDirection direction_of(double mean_difference) {
  return mean_difference > 0.0 ? EdgeDirection::kDeclined : EdgeDirection::kEnhanced;
}

std::vector<EdgeTestResult> edgewise_comparison(const std::vector<ConnectivityMatrix>& group1,
                                                const std::vector<ConnectivityMatrix>& group2,
                                                bool paired, double threshold) {
  if (group1.size() < 2 || group2.size() < 2)
    throw ArgumentError("edgewise comparison needs at least 2 networks per group, got " +
                        std::to_string(group1.size()) + " and " + std::to_string(group2.size()));
  if (paired && group1.size() != group2.size())
    throw ArgumentError("paired edgewise comparison needs equal group sizes, got " +
                        std::to_string(group1.size()) + " and " + std::to_string(group2.size()));
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ArgumentError("significance threshold must be in (0, 1]");
  std::vector<EdgeTestResult> out;
  out.reserve(kEdgeCount);
  std::vector<double> a(group1.size()), b(group2.size());
  for (std::size_t i = 0; i < kRegions; ++i)
    for (std::size_t j = i + 1; j < kRegions; ++j) {
      for (std::size_t k = 0; k < a.size(); ++k) a[k] = group1[k](i, j);
      for (std::size_t k = 0; k < b.size(); ++k) b[k] = group2[k](i, j);
      // Report the plain difference of group means in both modes.
      const TTestResult t = paired ? paired_t_test(a, b) : two_sample_t_test(a, b);
      EdgeTestResult r;
      r.i = i;
      r.j = j;
      r.t_statistic = t.t_statistic;
      r.p_value = t.p_value;
      r.mean_difference = Mean(a) - Mean(b);
      r.significant = t.p_value < threshold;
      r.direction = direction_of(r.mean_difference);
      out.push_back(r);
    }
  return out;
}

EdgeSummary summarize(const std::vector<EdgeTestResult>& results) {
  EdgeSummary s;
  for (const auto& r : results) {
    if (!r.significant) continue;
    ++s.significant;
    ++(r.direction == EdgeDirection::kDeclined ? s.declined : s.enhanced);
  }
  return s;
}

double mean_connectivity(const ConnectivityMatrix& network) {
  double s = 0.0;
  for (std::size_t i = 0; i < kRegions; ++i)
    for (std::size_t j = i + 1; j < kRegions; ++j) s += network(i, j);
  return s / double(kEdgeCount);
}

}  // namespace bd
