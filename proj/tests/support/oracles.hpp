// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Forward-only reference computations shared by several test binaries.

#include <cmath>
#include <span>
#include <vector>

#include "braindiff/core/ops.hpp"
#include "support/gradcheck.hpp"

namespace bd::testing {

// Weighted sum with fixed random weights: a scalar probe that exercises
// every output element with a distinct upstream gradient.
inline Tensor Probe(const Tensor& y, std::uint64_t seed = 99) {
  Rng rng(seed);
  return ops::sum(ops::mul(y, random_tensor(y.shape(), rng, false)));
}

// Direct 7-loop grouped convolution, no im2col.
inline std::vector<double> BruteConv(const Tensor& x, const Tensor& w, const Tensor& b, const ops::ConvSpec& s) {
  const std::size_t cin = x.dim(0), d = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t cout = w.dim(0), cig = w.dim(1), kd = w.dim(2), kh = w.dim(3), kw = w.dim(4);
  const std::size_t cog = cout / s.groups;
  const std::size_t od = (d + 2 * s.pad[0] - kd) / s.stride[0] + 1;
  const std::size_t oh = (h + 2 * s.pad[1] - kh) / s.stride[1] + 1;
  const std::size_t ow = (wd + 2 * s.pad[2] - kw) / s.stride[2] + 1;
  std::vector<double> out(cout * od * oh * ow, 0.0);
  (void)cin;
  for (std::size_t co = 0; co < cout; ++co) {
    const std::size_t grp = co / cog;
    for (std::size_t z = 0; z < od; ++z)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t xx = 0; xx < ow; ++xx) {
          double acc = b.defined() ? b[co] : 0.0;
          for (std::size_t ci = 0; ci < cig; ++ci)
            for (std::size_t a = 0; a < kd; ++a)
              for (std::size_t bb = 0; bb < kh; ++bb)
                for (std::size_t c = 0; c < kw; ++c) {
                  const long iz = long(z * s.stride[0] + a) - long(s.pad[0]);
                  const long iy = long(y * s.stride[1] + bb) - long(s.pad[1]);
                  const long ix = long(xx * s.stride[2] + c) - long(s.pad[2]);
                  if (iz < 0 || iy < 0 || ix < 0 || iz >= long(d) || iy >= long(h) || ix >= long(wd)) continue;
                  acc += w[(((co * cig + ci) * kd + a) * kh + bb) * kw + c] *
                         x[(((grp * cig + ci) * d + iz) * h + iy) * wd + ix];
                }
          out[((co * od + z) * oh + y) * ow + xx] = acc;
        }
  }
  return out;
}

// Per-channel (x - mean) / sqrt(var + eps) * gamma + beta with biased variance.
inline std::vector<double> BruteInstanceNorm(std::vector<double> x, std::size_t channels,
                                             std::span<const double> gamma,
                                             std::span<const double> beta, double eps = 1e-5) {
  const std::size_t per = x.size() / channels;
  for (std::size_t c = 0; c < channels; ++c) {
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < per; ++i) mean += x[c * per + i];
    mean /= double(per);
    for (std::size_t i = 0; i < per; ++i) var += (x[c * per + i] - mean) * (x[c * per + i] - mean);
    var /= double(per);
    for (std::size_t i = 0; i < per; ++i)
      x[c * per + i] = (x[c * per + i] - mean) / std::sqrt(var + eps) * gamma[c] + beta[c];
  }
  return x;
}

inline std::vector<double> BruteRelu(std::vector<double> x) {
  for (auto& v : x) v = v > 0.0 ? v : 0.0;
  return x;
}

// Two-sided Student-t tail by Simpson integration of the density. With
// x = sqrt(df) tan(theta) the density becomes proportional to
// cos(theta)^(df-1) on [0, pi/2), so both integrals are over finite ranges.
inline double BruteTwoSidedP(double t, double df) {
  if (std::isinf(t)) return 0.0;
  const double pi = std::acos(-1.0);
  auto simpson = [df](double a, double b) {
    const int n = 20000;
    const double h = (b - a) / n;
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      s += w * std::pow(std::cos(a + k * h), df - 1.0);
    }
    return s * h / 3.0;
  };
  const double theta = std::atan(std::abs(t) / std::sqrt(df));
  return simpson(theta, pi / 2.0) / simpson(0.0, pi / 2.0);
}

struct BruteT {
  double t;
  double p;
};

inline BruteT BrutePairedT(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) mean += x[k] - y[k];
  mean /= double(n);
  double ss = 0.0;
  for (std::size_t k = 0; k < n; ++k) ss += (x[k] - y[k] - mean) * (x[k] - y[k] - mean);
  const double t = mean / std::sqrt(ss / double(n - 1) / double(n));
  return {t, BruteTwoSidedP(t, double(n - 1))};
}

inline BruteT BrutePooledT(const std::vector<double>& x, const std::vector<double>& y) {
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e;
    return s / double(v.size());
  };
  const double mx = mean(x), my = mean(y);
  double ss = 0.0;
  for (double e : x) ss += (e - mx) * (e - mx);
  for (double e : y) ss += (e - my) * (e - my);
  const double df = double(x.size() + y.size() - 2);
  const double t = (mx - my) / std::sqrt(ss / df * (1.0 / double(x.size()) + 1.0 / double(y.size())));
  return {t, BruteTwoSidedP(t, df)};
}

}  // namespace bd::testing
