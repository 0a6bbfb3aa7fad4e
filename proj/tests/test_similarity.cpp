#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dsslab/similarity.hpp"

using namespace dsslab;

TEST(Similarity, RoundTripIsIdentity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5), lt(-4, 4);
  for (int i = 0; i < 1000; ++i) {
    const PhysicalSample p{{u(rng), u(rng), u(rng)}, std::exp(lt(rng))};
    const PhysicalSample q = map_to_physical(map_to_profile(p));
    EXPECT_NEAR(q.t, p.t, 1e-14 * p.t);
    for (int d = 0; d < 3; ++d) EXPECT_NEAR(q.x[d], p.x[d], 1e-14 * (1 + std::abs(p.x[d])));
  }
}

TEST(Similarity, KnownPoint) {
  // t = 1/2 is s = 0, y = x.
  const ProfileSample s = map_to_profile({{1, 2, 3}, 0.5});
  EXPECT_DOUBLE_EQ(s.s, 0.0);
  EXPECT_DOUBLE_EQ(s.y[2], 3.0);
  // t = 2 gives sqrt(2t) = 2.
  const ProfileSample r = map_to_profile({{2, 4, 6}, 2.0});
  EXPECT_NEAR(r.s, std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(r.y[1], 2.0);
}

TEST(Similarity, PeriodIsLogLambda) {
  EXPECT_NEAR(SimilarityMap(2.0).period(), 0.6931471805599453, 1e-16);
  EXPECT_THROW(SimilarityMap(-1.0), DomainError);
}

TEST(Similarity, NonPositiveTimeRejected) {
  EXPECT_THROW(map_to_profile({{0, 0, 0}, 0.0}), DomainError);
  EXPECT_THROW(scale_field_value({1, 0, 0}, Direction::ToProfile, -1.0), DomainError);
  EXPECT_THROW(scale_pressure_value(1.0, Direction::ToPhysical, 0.0), DomainError);
}

TEST(Similarity, FieldScalingInverts) {
  const Vec3 v{0.3, -1.2, 2.0};
  for (double t : {0.01, 0.5, 3.0}) {
    const Vec3 w = scale_field_value(scale_field_value(v, Direction::ToProfile, t), Direction::ToPhysical, t);
    for (int d = 0; d < 3; ++d) EXPECT_NEAR(w[d], v[d], 1e-15);
    EXPECT_NEAR(scale_pressure_value(scale_pressure_value(0.7, Direction::ToProfile, t), Direction::ToPhysical, t),
                0.7, 1e-15);
  }
  EXPECT_DOUBLE_EQ(scale_field_value({1, 0, 0}, Direction::ToProfile, 2.0)[0], 2.0);
  EXPECT_DOUBLE_EQ(scale_pressure_value(1.0, Direction::ToProfile, 2.0), 4.0);
}

TEST(Similarity, HomogeneousFieldHasZeroDefect) {
  // Any (-1)-homogeneous field is lambda-DSS for every lambda.
  const PhysicalSampler f = [](const Vec3& x, double t) {
    const double r2 = dot(x, x) + 2 * t;
    return Vec3{-x[1] / r2, x[0] / r2, std::sqrt(t) / r2};
  };
  for (double lam : {1.5, 2.0, 3.0}) EXPECT_LT(dss_defect(f, lam, default_probe_set(lam)), 1e-15);
}

TEST(Similarity, DefectDetectsWrongScaling) {
  const PhysicalSampler f = [](const Vec3& x, double) { return Vec3{1.0 + 0 * x[0], 0, 0}; };
  // lambda * 1 - 1 = 1 for lambda = 2.
  EXPECT_NEAR(dss_defect(f, 2.0, default_probe_set(2.0)), 1.0, 1e-15);
}

TEST(Similarity, ProbeSetLayout) {
  const auto p = default_probe_set(2.0, 6, 64);
  ASSERT_EQ(p.size(), 384u);
  for (const auto& s : p) {
    EXPECT_GE(norm(s.x), 0.5 - 1e-12);
    EXPECT_LE(norm(s.x), 2.0 + 1e-12);
    EXPECT_GE(s.t, 1.0);
    EXPECT_LT(s.t, 4.0);
  }
}
