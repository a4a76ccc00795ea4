#include <gtest/gtest.h>

#include <cmath>

#include "autostream/generators.hpp"

using namespace autostream;

TEST(Generators, SeaLabelUsesThreshold) {
  const std::vector<double> below{3.0, 4.0, 9.0};
  const std::vector<double> above{5.0, 4.0, 0.0};
  EXPECT_EQ(sea_label(below, SeaConcept{8.0}), 1);
  EXPECT_EQ(sea_label(above, SeaConcept{8.0}), 0);
}

TEST(Generators, HyperplaneLabel) {
  HyperplaneConcept c{{1.0, -1.0}, 0.0};
  EXPECT_EQ(hyperplane_label(std::vector<double>{0.8, 0.2}, c), 1);
  EXPECT_EQ(hyperplane_label(std::vector<double>{0.2, 0.8}, c), 0);
}

TEST(Generators, GradualWeightMidpointAndMonotone) {
  DriftComponent comp{100000, 100000, SeaConcept{8.0}, SeaConcept{9.0}};
  EXPECT_DOUBLE_EQ(concept_mix_weight(100000, comp), 0.5);
  EXPECT_EQ(concept_mix_weight(0, comp), 0.0);
  EXPECT_EQ(concept_mix_weight(200000, comp), 1.0);
  double prev = 0.0;
  for (std::size_t t = 40000; t < 160000; t += 997) {
    const double w = concept_mix_weight(t, comp);
    EXPECT_GE(w, prev);
    prev = w;
  }
}

TEST(Generators, AbruptWeightIsStep) {
  DriftComponent comp{500, 1, SeaConcept{8.0}, SeaConcept{9.0}};
  EXPECT_EQ(concept_mix_weight(499, comp), 0.0);
  EXPECT_EQ(concept_mix_weight(500, comp), 1.0);
}

TEST(Generators, SameSeedSameStream) {
  const auto spec = make_drift_spec(Family::sea, DriftKind::abrupt, 5000, 2500, 1, 2);
  const auto a = generate_stream(Family::sea, 5000, spec, NoiseSpec{0.1}, 42);
  const auto b = generate_stream(Family::sea, 5000, spec, NoiseSpec{0.1}, 42);
  const auto c = generate_stream(Family::sea, 5000, spec, NoiseSpec{0.1}, 43);
  ASSERT_EQ(a.instances.size(), 5000u);
  bool differs = false;
  for (std::size_t i = 0; i < a.instances.size(); ++i) {
    ASSERT_EQ(a.instances[i].features, b.instances[i].features);
    ASSERT_EQ(a.instances[i].label, b.instances[i].label);
    differs = differs || a.instances[i].features != c.instances[i].features;
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.drift_positions, std::vector<std::size_t>{2500});
}

TEST(Generators, NoiseFlipsExpectedShare) {
  const auto spec = make_drift_spec(Family::sea, DriftKind::none, 50000, 0, 1, 1);
  const auto s = generate_stream(Family::sea, 50000, spec, NoiseSpec{0.2}, 5);
  std::size_t flipped = 0;
  for (const auto& inst : s.instances) flipped += inst.label != concept_label(inst.features, spec.base);
  // Binomial(50000, 0.2): sd is about 0.0018.
  EXPECT_NEAR(static_cast<double>(flipped) / 50000.0, 0.2, 0.01);
}

TEST(Generators, ConceptBeforeAndAfterAbruptDrift) {
  const auto spec = make_drift_spec(Family::sea, DriftKind::abrupt, 4000, 2000, 1, 4);
  const auto s = generate_stream(Family::sea, 4000, spec, NoiseSpec{}, 9);
  const auto [from, to] = magnitude_pair(Family::sea, 4);
  for (std::size_t i = 0; i < 4000; ++i)
    ASSERT_EQ(s.instances[i].label, concept_label(s.instances[i].features, i < 2000 ? from : to)) << i;
}

TEST(Generators, MagnitudeLadderIncreases) {
  for (Family f : {Family::sea, Family::hyperplane}) {
    double prev = 0.0;
    for (int level = 1; level <= 4; ++level) {
      const auto [a, b] = magnitude_pair(f, level);
      const double d = concept_distance(a, b, 100000, 17);
      EXPECT_GT(d, prev) << to_string(f) << " level " << level;
      prev = d;
    }
  }
}

TEST(Generators, HyperplaneDistanceMatchesAngle) {
  // For a hyperplane through the cube centre, a rotation by theta disagrees on
  // a fraction close to theta / pi of symmetric inputs.
  const auto a = hyperplane_rotation(0.0, 2);
  const auto b = hyperplane_rotation(0.5, 2);
  const double d = concept_distance(a, b, 200000, 3);
  EXPECT_GT(d, 0.0);
  EXPECT_LT(d, 0.5);
}

TEST(Generators, InvalidSpecRejected) {
  auto spec = make_drift_spec(Family::sea, DriftKind::gradual, 1000, 500, 100, 1);
  spec.components[0].center = 990;
  EXPECT_THROW(spec.validate(1000, Family::sea), std::invalid_argument);
}

TEST(Generators, DriftBatches) {
  const std::vector<std::size_t> pos{50000, 75500};
  EXPECT_EQ(drift_batches(pos, 1000), (std::vector<std::size_t>{50, 75}));
}
