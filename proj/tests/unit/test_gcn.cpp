// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "braindiff/core/error.hpp"
#include "braindiff/data/pipeline.hpp"
#include "braindiff/model/autoencoder.hpp"
#include "braindiff/model/gcn.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace bd;
using namespace bd::testing;

namespace {

ConnectivityMatrix RandomNetwork(Rng& rng, double density = 0.3) {
  std::vector<double> raw(kNetworkEntries, 0.0);
  for (std::size_t i = 0; i < kRegions; ++i)
    for (std::size_t j = i + 1; j < kRegions; ++j)
      if (rng.uniform() < density) raw[i * kRegions + j] = raw[j * kRegions + i] = rng.uniform();
  return normalize_connectivity(raw, kRegions, kRegions);
}

ClassPrediction WithProbabilities(std::array<double, 3> p) {
  ClassPrediction c;
  c.probabilities = p;
  return c;
}

// relu(sum_j [(A+I)_ij / sqrt(d_i d_j)] * sum_k A_jk W_k.), by explicit
// neighbour loops.
std::vector<double> MessagePassing(const ConnectivityMatrix& a, const Tensor& w, std::size_t hidden) {
  const std::size_t n = kRegions;
  std::vector<double> deg(n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) deg[i] += a(i, j);
  std::vector<double> h(n * hidden, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double edge = a(i, j) + (i == j ? 1.0 : 0.0);
      if (edge == 0.0) continue;
      const double coef = edge / std::sqrt(deg[i] * deg[j]);
      for (std::size_t f = 0; f < hidden; ++f) {
        double xw = 0.0;
        for (std::size_t k = 0; k < n; ++k) xw += a(j, k) * w[k * hidden + f];
        h[i * hidden + f] += coef * xw;
      }
    }
  for (auto& v : h) v = std::max(v, 0.0);
  return h;
}

}  // namespace

TEST_CASE("normalize_adjacency: empty graph and two-node toy") {
  const auto eye = normalize_adjacency(ConnectivityMatrix());
  for (std::size_t i = 0; i < kRegions; ++i)
    for (std::size_t j = 0; j < kRegions; ++j) CHECK(eye[i * kRegions + j] == (i == j ? 1.0 : 0.0));

  const Tensor toy = normalize_adjacency(Tensor::from({2, 2}, {0.0, 1.0, 1.0, 0.0}));
  for (double v : toy.data()) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("normalize_adjacency: exact symmetry and spectral radius at most one") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = RandomNetwork(rng, 0.1 + 0.04 * trial);
    const auto n = normalize_adjacency(a);
    for (std::size_t i = 0; i < kRegions; ++i)
      for (std::size_t j = 0; j < kRegions; ++j) REQUIRE(n[i * kRegions + j] == n[j * kRegions + i]);
    // Power iteration on N^2 (positive semi-definite) gives rho(N)^2.
    std::vector<double> v(kRegions), u(kRegions);
    for (auto& x : v) x = rng.normal();
    double rho = 0.0;
    for (int it = 0; it < 500; ++it) {
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < kRegions; ++i) {
          u[i] = 0.0;
          for (std::size_t j = 0; j < kRegions; ++j) u[i] += n[i * kRegions + j] * v[j];
        }
        std::swap(u, v);
      }
      const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
      rho = std::sqrt(norm);
      for (auto& x : v) x /= norm;
    }
    CHECK(rho <= 1.0 + 1e-9);
  }
}

TEST_CASE("classify: probabilities, zero-weight case and tie-break") {
  ParameterSet params;
  Rng rng(2);
  GcnClassifier gcn({}, params, rng);
  const auto p = gcn.classify(RandomNetwork(rng));
  CHECK(std::accumulate(p.probabilities.begin(), p.probabilities.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.predicted < 3);

  for (const auto& [_, t] : params.items()) std::fill(t.node()->value.begin(), t.node()->value.end(), 0.0);
  const auto z = gcn.classify(ConnectivityMatrix());
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(z.logits[k] == 0.0);
    CHECK(z.probabilities[k] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  CHECK(z.predicted == 0);
  CHECK(ClassPrediction::from_logits(std::array<double, 3>{1.0, 3.0, 3.0}).predicted == 1);
  CHECK_THROWS_AS(gcn.hidden(Tensor::zeros({89, 90})), DimensionError);
}

TEST_CASE("classify: hidden layer matches explicit message passing") {
  ParameterSet params;
  Rng rng(3);
  GcnClassifier gcn({}, params, rng);
  // Three connected nodes inside otherwise isolated ones, then a dense graph.
  std::vector<double> toy(kNetworkEntries, 0.0);
  auto set = [&](std::size_t i, std::size_t j, double v) { toy[i * kRegions + j] = toy[j * kRegions + i] = v; };
  set(0, 1, 1.0);
  set(1, 2, 0.5);
  set(0, 2, 0.25);
  for (const auto& net : {ConnectivityMatrix(toy), RandomNetwork(rng, 0.5)}) {
    NoGradGuard guard;
    const Tensor h = gcn.hidden(network_tensor(net));
    const auto want = MessagePassing(net, gcn.node_weight(), 32);
    for (std::size_t i = 0; i < want.size(); ++i) REQUIRE(h[i] == doctest::Approx(want[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("gcn layer is permutation-equivariant") {
  ParameterSet params;
  Rng rng(4);
  GcnClassifier gcn({}, params, rng);
  const auto a = RandomNetwork(rng, 0.4);
  std::vector<std::size_t> perm(kRegions);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng.engine());

  NoGradGuard guard;
  const Tensor h = gcn.hidden(network_tensor(a));
  std::vector<double> pa(kNetworkEntries);
  for (std::size_t i = 0; i < kRegions; ++i)
    for (std::size_t j = 0; j < kRegions; ++j) pa[i * kRegions + j] = a(perm[i], perm[j]);
  // Node features are adjacency rows, so their coordinates are node
  // indices too and the feature transform is relabelled with the nodes.
  const std::vector<double> w(gcn.node_weight().data().begin(), gcn.node_weight().data().end());
  auto wd = gcn.node_weight().node()->value.data();
  for (std::size_t k = 0; k < kRegions; ++k)
    for (std::size_t f = 0; f < 32; ++f) wd[k * 32 + f] = w[perm[k] * 32 + f];
  const Tensor hp = gcn.hidden(Tensor::from({kRegions, kRegions}, pa));
  for (std::size_t i = 0; i < kRegions; ++i)
    for (std::size_t f = 0; f < 32; ++f)
      REQUIRE(hp[i * 32 + f] == doctest::Approx(h[perm[i] * 32 + f]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("cross_entropy_loss examples, bounds and errors") {
  CHECK(cross_entropy_loss({WithProbabilities({1.0, 0.0, 0.0})}, {0}) == 0.0);
  CHECK(cross_entropy_loss({WithProbabilities({0.25, 0.5, 0.25})}, {1}) == doctest::Approx(std::log(2.0)));
  const double two = cross_entropy_loss({WithProbabilities({0.9, 0.05, 0.05}), WithProbabilities({0.4, 0.4, 0.2})}, {0, 2});
  CHECK(two == doctest::Approx(0.857399).epsilon(1e-6));
  CHECK(two == doctest::Approx(-(std::log(0.9) + std::log(0.2)) / 2.0).epsilon(1e-15));
  CHECK(cross_entropy_loss({WithProbabilities({0.0, 1.0, 0.0})}, {0}) == doctest::Approx(-std::log(1e-12)));

  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    const auto p = ClassPrediction::from_logits(std::array<double, 3>{rng.normal() * 5, rng.normal() * 5, rng.normal() * 5});
    CHECK(cross_entropy_loss({p}, {std::size_t(rng.integer(0, 2))}) >= 0.0);
  }
  CHECK_THROWS_AS(cross_entropy_loss({}, {}), ArgumentError);
  CHECK_THROWS_AS(cross_entropy_loss({WithProbabilities({1, 0, 0})}, {0, 1}), ArgumentError);
  CHECK_THROWS_AS(cross_entropy_loss({WithProbabilities({1, 0, 0})}, {3}), ValidationError);
  CHECK_THROWS_AS(classification_loss(Tensor::zeros({1, 3}), 3), ValidationError);
}

TEST_CASE("classification loss gradients match finite differences") {
  ParameterSet params;
  Rng rng(6);
  GcnClassifier gcn({}, params, rng);
  for (const auto& [name, t] : params.items())
    if (name.ends_with(".bias"))
      for (auto& v : t.node()->value) v += 0.1 * rng.normal();
  const Tensor a = network_tensor(RandomNetwork(rng, 0.5));
  auto loss = [&] { return classification_loss(gcn.logits(a), 2); };
  CHECK(sampled_gradient_error(loss, gcn.node_weight(), random_indices(gcn.node_weight().numel(), 30, rng), 1e-6, 1e-7) < 1e-4);
  CHECK(sampled_gradient_error(loss, gcn.readout().weight, random_indices(gcn.readout().weight.numel(), 30, rng), 1e-6, 1e-7) < 1e-4);
  CHECK(max_gradient_error(loss, gcn.readout().bias, 1e-6, 1e-7) < 1e-4);
  Tensor input = Tensor::from(a.shape(), {a.data().begin(), a.data().end()}, true);
  auto through_input = [&] { return classification_loss(gcn.logits(input), 1); };
  CHECK(sampled_gradient_error(through_input, input, random_indices(input.numel(), 30, rng), 1e-6, 1e-7) < 1e-4);
}
