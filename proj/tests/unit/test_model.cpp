// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "braindiff/core/error.hpp"
#include "braindiff/data/synthetic.hpp"
#include "braindiff/model/brain_diffuser.hpp"

using namespace bd;

namespace {

const SubjectRecord& Subject() {
  static const auto cohort = generate_synthetic_cohort(0, 0, 1, 12);
  return cohort[0];
}

}  // namespace

TEST_CASE("model: every parameter sits in one of the six groups") {
  const BrainDiffuser m(ModelConfig::tiny(), 1);
  std::array<std::size_t, kParameterGroups.size()> count{};
  for (const auto& [name, _] : m.parameters().items()) {
    std::size_t hits = 0;
    for (std::size_t k = 0; k < kParameterGroups.size(); ++k)
      if (name.starts_with(kParameterGroups[k])) ++count[k], ++hits;
    CAPTURE(name);
    CHECK(hits == 1);
  }
  for (auto c : count) CHECK(c > 0);
  CHECK(!m.parameters().contains("condition.logit_projection.weight"));

  ModelConfig with_token = ModelConfig::tiny();
  with_token.condition.use_logit_token = true;
  CHECK(BrainDiffuser(with_token, 1).parameters().contains("condition.logit_projection.weight"));
}

TEST_CASE("model: reconstruction shapes and seeded initialization") {
  const BrainDiffuser a(ModelConfig::tiny(), 7), b(ModelConfig::tiny(), 7), c(ModelConfig::tiny(), 8);
  NoGradGuard guard;
  const auto r = a.reconstruct(Subject().volume);
  CHECK(r.features.shape() == Shape{90, 80});
  CHECK(r.latent.shape() == a.config().latent_shape());
  CHECK(r.network.shape() == Shape{90, 90});
  CHECK(r.logits.shape() == Shape{1, 3});
  CHECK(a.reconstruct_network(Subject().volume) == b.reconstruct_network(Subject().volume));
  CHECK(a.reconstruct_network(Subject().volume) != c.reconstruct_network(Subject().volume));
  CHECK(ModelConfig::desk().latent_shape() == Shape{4, 45, 40});
  CHECK(a.schedule().steps() == 50);
}

TEST_CASE("model: generation modes") {
  const BrainDiffuser m(ModelConfig::tiny(), 2);
  Rng r1(5), r2(5);
  const auto g1 = m.generate(DiagnosticClass::kEMCI, r1);
  CHECK(g1 == m.generate(DiagnosticClass::kEMCI, r2));
  CHECK_FALSE(ConnectivityMatrix::check(g1.weights()).has_value());

  Rng r3(6);
  const auto g2 = m.generate_from(Subject().volume, DiagnosticClass::kNC, 0.5, r3);
  CHECK_FALSE(ConnectivityMatrix::check(g2.weights()).has_value());
  CHECK_THROWS_AS(m.generate_from(Subject().volume, DiagnosticClass::kNC, 0.0, r3), ArgumentError);
  CHECK_THROWS_AS(m.generate_from(Subject().volume, DiagnosticClass::kNC, 1.5, r3), ArgumentError);

  ModelConfig bad = ModelConfig::tiny();
  bad.schedule_steps = 0;
  CHECK_THROWS_AS(BrainDiffuser(bad, 0), ArgumentError);
}
