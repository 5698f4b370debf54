// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/model/fenet.hpp"

#include "braindiff/core/error.hpp"

namespace bd {

void FenetConfig::validate() const {
  if (channels_per_block.empty()) throw ArgumentError("fenet needs at least one block");
  if (final_channels() != kRegions)
    throw ArgumentError("fenet final block must emit 90 channels, got " +
                        std::to_string(final_channels()));
  if (stem_channels == 0 || stem_stride == 0 || block_stride == 0)
    throw ArgumentError("fenet channel counts and strides must be positive");
  for (auto b : pool_bins)
    if (b == 0) throw ArgumentError("fenet pool bins must be positive");
}

FenetConfig FenetConfig::tiny() {
  FenetConfig c;
  c.stem_channels = 4;
  c.stem_stride = 3;
  c.channels_per_block = {8, 90};
  c.pool_bins = {2, 2, 2};
  return c;
}

std::size_t DepthwiseSeparableBlock::parameter_count() const {
  auto norm = [](const nn::InstanceNorm& n) { return n.gamma.numel() + n.beta.numel(); };
  return depthwise.parameter_count() + pointwise.parameter_count() + norm(depthwise_norm) +
         norm(pointwise_norm);
}

Tensor DepthwiseSeparableBlock::operator()(const Tensor& x) const {
  if (x.rank() != 4 || x.dim(0) != in_channels())
    throw DimensionError("depthwise-separable block expects (" + std::to_string(in_channels()) +
                         ", D, H, W), got " + shape_string(x.shape()));
  Tensor h = ops::relu(depthwise_norm(depthwise(x)));
  return ops::relu(pointwise_norm(pointwise(h)));
}

DepthwiseSeparableBlock make_ds_block(ParameterSet& params, const std::string& name,
                                      std::size_t in, std::size_t out, std::size_t stride,
                                      Rng& rng) {
  DepthwiseSeparableBlock b;
  b.depthwise = nn::make_conv3d(params, name + ".depthwise", in, in, 3, stride, in, rng, false);
  b.depthwise_norm = nn::make_instance_norm(params, name + ".depthwise_norm", in);
  b.pointwise = nn::make_conv3d(params, name + ".pointwise", in, out, 1, 1, 1, rng, false);
  b.pointwise_norm = nn::make_instance_norm(params, name + ".pointwise_norm", out);
  return b;
}

Tensor volume_tensor(const DtiVolume& volume) {
  volume.validate();
  std::vector<double> v(volume.voxels.begin(), volume.voxels.end());
  return Tensor::from({1, kVolumeShape[0], kVolumeShape[1], kVolumeShape[2]}, std::move(v));
}

Fenet::Fenet(const FenetConfig& config, ParameterSet& params, Rng& rng, const std::string& prefix)
    : config_(config) {
  config_.validate();
  stem_ = nn::make_conv3d(params, prefix + ".stem", 1, config_.stem_channels, 3,
                          config_.stem_stride, 1, rng, false);
  stem_norm_ = nn::make_instance_norm(params, prefix + ".stem_norm", config_.stem_channels);
  std::size_t in = config_.stem_channels;
  for (std::size_t i = 0; i < config_.num_ds_blocks(); ++i) {
    const std::size_t out = config_.channels_per_block[i];
    blocks_.push_back(make_ds_block(params, prefix + ".block" + std::to_string(i), in, out,
                                    config_.block_stride, rng));
    in = out;
  }
  const auto& b = config_.pool_bins;
  head_ = nn::make_linear(params, prefix + ".head", b[0] * b[1] * b[2], kFeatureDim, rng);
}

Tensor Fenet::forward(const Tensor& x) const {
  if (x.shape() != Shape{1, kVolumeShape[0], kVolumeShape[1], kVolumeShape[2]})
    throw DimensionError("fenet expects a (1, 109, 91, 91) volume, got " + shape_string(x.shape()));
  Tensor h = ops::relu(stem_norm_(stem_(x)));
  for (const auto& block : blocks_) h = block(h);
  for (std::size_t a = 0; a < 3; ++a)
    if (h.dim(a + 1) < config_.pool_bins[a])
      throw DimensionError("fenet feature grid " + shape_string(h.shape()) +
                           " is smaller than the pooling bins");
  h = ops::adaptive_avg_pool3d(h, config_.pool_bins);
  const auto& b = config_.pool_bins;
  h = ops::reshape(h, {kRegions, b[0] * b[1] * b[2]});
  return head_(h);
}

std::vector<Tensor> Fenet::forward_batch(const std::vector<DtiVolume>& volumes) const {
  std::vector<Tensor> out;
  out.reserve(volumes.size());
  for (const auto& v : volumes) out.push_back(forward(v));
  return out;
}

}  // namespace bd
