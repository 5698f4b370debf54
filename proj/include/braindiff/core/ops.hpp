// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>

#include "braindiff/core/tensor.hpp"

namespace bd::ops {

// Elementwise; shapes must match exactly.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

/// x has shape (C, ...); v holds C values; v[c] is added across channel c.
Tensor add_channel(const Tensor& x, const Tensor& v);

Tensor relu(const Tensor& x);
Tensor silu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);
/// Concatenation along axis 0 (rows of a matrix, channels of a grid).
Tensor concat0(const Tensor& a, const Tensor& b);
/// Row i of a 2-D tensor as a (1, cols) tensor.
Tensor row(const Tensor& x, std::size_t i);
Tensor transpose(const Tensor& x);

Tensor matmul(const Tensor& a, const Tensor& b);
/// a * b^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);
/// x: (N, in), weight: (out, in), bias: (out) or undefined.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

struct ConvSpec {
  std::array<std::size_t, 3> stride{1, 1, 1};
  std::array<std::size_t, 3> pad{0, 0, 0};
  std::size_t groups = 1;
};

/// Grouped 3-D convolution. x: (Cin, D, H, W); weight: (Cout, Cin/groups,
/// kd, kh, kw); bias: (Cout) or undefined. 2-D convolutions use D = kd = 1.
Tensor conv3d(const Tensor& x, const Tensor& weight, const Tensor& bias, const ConvSpec& spec);

/// Per-channel normalization over all trailing axes of x (C, ...). gamma and
/// beta are (C) or both undefined for a plain standardization.
Tensor instance_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

/// x: (C, D, H, W) averaged into out bins per axis; bin i spans
/// [floor(i*n/out), ceil((i+1)*n/out)).
Tensor adaptive_avg_pool3d(const Tensor& x, std::array<std::size_t, 3> out);
/// x: (C, D, H, W) resampled by nearest neighbour, src = floor(o * in / out).
Tensor resize_nearest3d(const Tensor& x, std::array<std::size_t, 3> out);

/// Row-wise softmax of a 2-D tensor.
Tensor softmax_rows(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// Mean of squared differences.
Tensor mse(const Tensor& a, const Tensor& b);
/// Mean of absolute differences.
Tensor l1(const Tensor& a, const Tensor& b);

/// Square matrix -> (X + X^T)/2 with the diagonal set to zero.
Tensor symmetrize_zero_diag(const Tensor& x);
/// Square matrix A -> D^{-1/2} (A + I) D^{-1/2}, D the row sums of A + I.
Tensor gcn_normalize(const Tensor& a);
/// -log(max(p[label], floor)) for a probability vector p.
Tensor nll_floor(const Tensor& probs, std::size_t label, double floor);

}  // namespace bd::ops
