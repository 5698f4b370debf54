// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "braindiff/core/error.hpp"
#include "braindiff/data/synthetic.hpp"
#include "braindiff/model/fenet.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace bd;
using namespace bd::testing;

namespace {

const DtiVolume& SampleVolume() {
  static const DtiVolume v = generate_synthetic_cohort(0, 1, 0, 17)[0].volume;
  return v;
}

DtiVolume ZeroVolume() {
  DtiVolume v;
  v.subject_id = "zero";
  v.voxels.assign(kVolumeVoxels, 0.0f);
  return v;
}

}  // namespace

TEST_CASE("fenet: desk config maps a volume to a 90x80 feature matrix") {
  ParameterSet params;
  Rng rng(1);
  Fenet fenet(FenetConfig::desk(), params, rng);
  NoGradGuard guard;
  const Tensor p = fenet.forward(SampleVolume());
  CHECK(p.shape() == Shape{90, 80});
  for (double v : p.data()) REQUIRE(std::isfinite(v));
  const Tensor again = fenet.forward(SampleVolume());
  CHECK(std::equal(p.data().begin(), p.data().end(), again.data().begin()));
}

TEST_CASE("fenet: zero volume with zero head bias gives zero features") {
  ParameterSet params;
  Rng rng(2);
  Fenet fenet(FenetConfig::tiny(), params, rng);
  for (const auto& [name, t] : params.items())
    if (name.ends_with(".bias")) CHECK(std::all_of(t.data().begin(), t.data().end(), [](double v) { return v == 0.0; }));
  NoGradGuard guard;
  const Tensor p = fenet.forward(ZeroVolume());
  for (double v : p.data()) CHECK(v == 0.0);
}

TEST_CASE("fenet: shape and configuration errors") {
  ParameterSet params;
  Rng rng(3);
  Fenet fenet(FenetConfig::tiny(), params, rng);
  CHECK_THROWS_AS(fenet.forward(Tensor::zeros({1, 108, 91, 91})), DimensionError);
  DtiVolume bad;
  bad.voxels.assign(100, 0.0f);
  CHECK_THROWS_AS(fenet.forward(bad), DimensionError);

  FenetConfig c = FenetConfig::tiny();
  c.channels_per_block = {8, 64};
  ParameterSet p2;
  CHECK_THROWS_AS(Fenet(c, p2, rng), ArgumentError);
  c.channels_per_block.clear();
  CHECK_THROWS_AS(c.validate(), ArgumentError);
  c = FenetConfig::desk();
  CHECK(c.num_ds_blocks() == 3);
  CHECK(c.final_channels() == 90);
}

TEST_CASE("depthwise-separable block: identity pointwise and delta depthwise kernels") {
  ParameterSet params;
  Rng rng(4);
  auto block = make_ds_block(params, "b", 3, 3, 1, rng);
  Tensor x = random_tensor({3, 4, 4, 4}, rng, false);

  auto pw = block.pointwise.weight.mutable_data();
  std::fill(pw.begin(), pw.end(), 0.0);
  for (std::size_t c = 0; c < 3; ++c) pw[c * 3 + c] = 1.0;
  const Tensor y = block.pointwise(x);
  CHECK(std::equal(x.data().begin(), x.data().end(), y.data().begin()));

  auto dw = block.depthwise.weight.mutable_data();
  std::fill(dw.begin(), dw.end(), 0.0);
  for (std::size_t c = 0; c < 3; ++c) dw[c * 27 + 13] = 1.0;  // centre tap
  const Tensor z = block.depthwise(x);
  CHECK(std::equal(x.data().begin(), x.data().end(), z.data().begin()));

  CHECK_THROWS_AS(block(random_tensor({2, 4, 4, 4}, rng, false)), DimensionError);
}

TEST_CASE("depthwise-separable block matches a direct convolution computation") {
  for (std::size_t stride : {1, 2}) {
    ParameterSet params;
    Rng rng(5 + stride);
    auto block = make_ds_block(params, "b", 3, 5, stride, rng);
    for (const auto& [_, t] : params.items()) {
      auto d = t.node()->value.data();
      for (std::size_t i = 0; i < t.numel(); ++i) d[i] += 0.1 * rng.normal();
    }
    Tensor x = random_tensor({3, 4, 4, 4}, rng, false);
    const Tensor got = block(x);

    auto h = BruteConv(x, block.depthwise.weight, block.depthwise.bias, block.depthwise.spec);
    h = BruteRelu(BruteInstanceNorm(h, 3, block.depthwise_norm.gamma.data(), block.depthwise_norm.beta.data()));
    const std::size_t s = (4 + 2 - 3) / stride + 1;
    Tensor ht = Tensor::from({3, s, s, s}, h);
    auto o = BruteConv(ht, block.pointwise.weight, block.pointwise.bias, block.pointwise.spec);
    o = BruteRelu(BruteInstanceNorm(o, 5, block.pointwise_norm.gamma.data(), block.pointwise_norm.beta.data()));

    REQUIRE(got.shape() == Shape{5, s, s, s});
    for (std::size_t i = 0; i < o.size(); ++i) CHECK(got[i] == doctest::Approx(o[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("depthwise-separable block has fewer parameters than a dense convolution") {
  Rng rng(6);
  for (auto [in, out] : {std::pair<std::size_t, std::size_t>{4, 8}, {8, 16}, {16, 32}, {32, 90}}) {
    ParameterSet params;
    auto block = make_ds_block(params, "b", in, out, 2, rng);
    ParameterSet dense;
    auto conv = nn::make_conv3d(dense, "d", in, out, 3, 2, 1, rng);
    CAPTURE(in);
    CHECK(block.parameter_count() < conv.parameter_count());
    CHECK(block.parameter_count() == params.scalar_count());
  }
}

TEST_CASE("fenet: gradients match central differences on the tiny config") {
  ParameterSet params;
  Rng rng(7);
  Fenet fenet(FenetConfig::tiny(), params, rng);
  // Non-trivial norm affine parameters so their gradients are exercised.
  for (const auto& [name, t] : params.items())
    if (name.find("norm") != std::string::npos) {
      auto d = t.node()->value.data();
      for (std::size_t i = 0; i < t.numel(); ++i) d[i] += 0.2 * rng.normal();
    }
  Tensor x = volume_tensor(SampleVolume());
  auto loss = [&] { return Probe(fenet.forward(x)); };
  for (const auto& [name, t] : params.items()) {
    CAPTURE(name);
    const auto idx = random_indices(t.numel(), 3, rng);
    CHECK(sampled_gradient_error(loss, t, idx) < 1e-4);
  }
  x.set_requires_grad(true);
  CHECK(sampled_gradient_error(loss, x, random_indices(x.numel(), 4, rng)) < 1e-4);
}

TEST_CASE("fenet: batch processing matches single-volume processing") {
  ParameterSet params;
  Rng rng(8);
  Fenet fenet(FenetConfig::tiny(), params, rng);
  const auto cohort = generate_synthetic_cohort(1, 1, 1, 4);
  std::vector<DtiVolume> vols;
  for (const auto& r : cohort) vols.push_back(r.volume);
  NoGradGuard guard;
  const auto batch = fenet.forward_batch(vols);
  REQUIRE(batch.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    const Tensor alone = fenet.forward(vols[k]);
    for (std::size_t i = 0; i < alone.numel(); ++i) CHECK(std::abs(alone[i] - batch[k][i]) <= 1e-6);
  }
}
