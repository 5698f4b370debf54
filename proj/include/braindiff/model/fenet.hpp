// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Feature extraction network: DTI volume -> one 80-dim feature row per
// region. A stem convolution and strided depthwise-separable blocks shrink
// the volume; the last block emits one channel per region, and each
// channel's pooled spatial map goes through a linear head shared across
// channels.

#include <array>
#include <string>
#include <vector>

#include "braindiff/core/nn.hpp"
#include "braindiff/data/types.hpp"

namespace bd {

inline constexpr std::size_t kFeatureDim = 80;

struct FenetConfig {
  std::size_t stem_channels = 8;
  std::size_t stem_stride = 1;
  std::vector<std::size_t> channels_per_block{16, 32, 90};
  std::size_t block_stride = 2;
  std::array<std::size_t, 3> pool_bins{8, 9, 10};

  std::size_t num_ds_blocks() const { return channels_per_block.size(); }
  std::size_t final_channels() const {
    return channels_per_block.empty() ? 0 : channels_per_block.back();
  }
  /// Throws ArgumentError unless final_channels() == 90 and there is a block.
  void validate() const;

  static FenetConfig desk() { return {}; }
  /// Small enough for finite-difference checks over a full-size volume.
  static FenetConfig tiny();
};

/// Depthwise (per-channel spatial) convolution then pointwise channel mixing,
/// each followed by instance normalization and ReLU.
struct DepthwiseSeparableBlock {
  nn::Conv depthwise;
  nn::InstanceNorm depthwise_norm;
  nn::Conv pointwise;
  nn::InstanceNorm pointwise_norm;

  std::size_t in_channels() const { return depthwise.weight.dim(0); }
  std::size_t out_channels() const { return pointwise.weight.dim(0); }
  std::size_t parameter_count() const;
  /// x: (C, D, H, W). Throws DimensionError when C != in_channels().
  Tensor operator()(const Tensor& x) const;
};

DepthwiseSeparableBlock make_ds_block(ParameterSet& params, const std::string& name,
                                      std::size_t in, std::size_t out, std::size_t stride,
                                      Rng& rng);

/// (1, 109, 91, 91) tensor of the volume's voxels. Validates the volume.
Tensor volume_tensor(const DtiVolume& volume);

class Fenet {
 public:
  /// Registers parameters under "<prefix>." in params.
  Fenet(const FenetConfig& config, ParameterSet& params, Rng& rng,
        const std::string& prefix = "fenet");

  const FenetConfig& config() const { return config_; }
  const std::vector<DepthwiseSeparableBlock>& blocks() const { return blocks_; }

  /// x: (1, 109, 91, 91). Returns the (90, 80) feature matrix.
  Tensor forward(const Tensor& x) const;
  Tensor forward(const DtiVolume& volume) const { return forward(volume_tensor(volume)); }
  /// Runs each volume independently; row-for-row equal to single forwards.
  std::vector<Tensor> forward_batch(const std::vector<DtiVolume>& volumes) const;

 private:
  FenetConfig config_;
  nn::Conv stem_;
  nn::InstanceNorm stem_norm_;
  std::vector<DepthwiseSeparableBlock> blocks_;
  nn::Linear head_;
};

}  // namespace bd
