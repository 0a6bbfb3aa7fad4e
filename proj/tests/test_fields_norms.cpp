#include <gtest/gtest.h>

#include <cmath>

#include "dsslab/fields_norms.hpp"
#include "dsslab/quadrature.hpp"
#include "dsslab/swirl.hpp"

using namespace dsslab;

namespace {

// e^{t Delta} |x|^{-2} at radius r by one-dimensional radial quadrature.
double heat_inverse_square(double r, double t) {
  const double c = 4 * M_PI / std::pow(4 * M_PI * t, 1.5);
  auto f = [&](double rho) {
    if (r == 0) return std::exp(-rho * rho / (4 * t));
    const double a = r * rho / (2 * t);
    // sinh(a)/a e^{-(r^2 + rho^2)/4t}, written to avoid overflow.
    const double e = -(r - rho) * (r - rho) / (4 * t);
    return 0.5 * (std::exp(e) - std::exp(e - 2 * a)) / a;
  };
  return c * integrate(f, 0, r + 40 * std::sqrt(t), 64);
}

VectorField inverse_radial(const Grid& g) {
  Evaluator inv = [](const Vec3& x) {
    const double r = norm(x);
    return r == 0 ? Vec3{0, 0, 0} : Vec3{1.0 / r, 0, 0};
  };
  VectorField f = field_from(g, inv);
  f.tail = inv;
  f.origin_eval = inv;
  return f;
}

}  // namespace

TEST(SwirlHeat, CentreValueIsOneOverSixT) {
  const SwirlData d = SwirlData::canonical(1.0);
  for (double t : {0.25, 0.5, 2.0}) EXPECT_NEAR(swirl_heat_radial(d, d.terms[0], 0.0, t).v, 1.0 / (6 * t), 1e-12);
}

TEST(SwirlHeat, MatchesRadialHeatKernelQuadrature) {
  // Q(r, t) = r^{-3} int_0^r rho^2 e^{t Delta}|x|^{-2}(rho) d rho for the swirl (n x x)/|x|^2.
  const SwirlData d = SwirlData::canonical(1.0);
  for (double r : {0.5, 1.0, 2.0}) {
    const double q = integrate([](double rho) { return rho * rho * heat_inverse_square(rho, 0.5); }, 0, r, 8) /
                     (r * r * r);
    EXPECT_NEAR(swirl_heat_radial(d, d.terms[0], r, 0.5).v, q, 1e-9) << "r = " << r;
  }
}

TEST(SwirlHeat, ParabolicScaling) {
  const SwirlData d = SwirlData::canonical(1.0);
  for (double r : {0.3, 1.0, 4.0}) {
    const double a = swirl_heat_radial(d, d.terms[0], r, 0.5).v;
    const double b = swirl_heat_radial(d, d.terms[0], 2 * r, 2.0).v;
    EXPECT_NEAR(b, a / 4, 1e-12 * a);
  }
}

TEST(SwirlHeat, FarFieldApproachesData) {
  const SwirlData d = SwirlData::canonical(1.0);
  const double r = 40.0;
  EXPECT_NEAR(swirl_heat_radial(d, d.terms[0], r, 0.5).v * r * r, 1.0, 1e-3);
}

TEST(SwirlData, CanonicalValue) {
  const Vec3 v = SwirlData::canonical(2.0).value({1, 0, 0});
  EXPECT_NEAR(v[0], 0.0, 1e-15);
  EXPECT_NEAR(v[1], 2.0, 1e-15);
  EXPECT_TRUE(SwirlData::canonical(0.0).is_zero());
  EXPECT_TRUE(SwirlData::canonical(1.0).homogeneous());
  EXPECT_FALSE(make_swirl_dss(3, 0.05, 2.0).homogeneous());
}

TEST(SwirlData, DssDataIsLambdaInvariant) {
  const SwirlData d = make_swirl_dss(5, 0.1, 2.0);
  for (const Vec3& x : {Vec3{0.3, 0.7, -0.2}, Vec3{1.1, -0.4, 0.9}}) {
    const Vec3 a = d.value(x), b = d.value(2.0 * x);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(2.0 * b[c], a[c], 1e-14);
  }
}

TEST(Norms, InverseRadialReferenceValues) {
  const VectorField f = inverse_radial(Grid(6.0, 48));
  // weak-L^3 = (4 pi / 3)^{1/3}, weighted L^2 = sqrt(2 pi).
  EXPECT_NEAR(weak_l3_norm(f).value, std::cbrt(4 * M_PI / 3), 0.01 * 1.6119);
  EXPECT_NEAR(weighted_l2_norm(f), std::sqrt(2 * M_PI), 0.01 * 2.5066);
}

TEST(Norms, BallInequalityOnSwirl) {
  const Grid g(6.0, 48);
  const auto hd = make_homogeneous_data(0, 1.0, g);
  const double M = 2.0;
  const double lhs = std::pow(l2_ball_norm(hd.field, M), 2);
  const double rhs = std::pow(1 + M, 3) * std::pow(weighted_l2_norm(hd.field), 2);
  EXPECT_LE(lhs, rhs);
}

TEST(Norms, CompactFieldWithoutTailWarns) {
  const Grid g(6.0, 32);
  const VectorField b = field_from(g, [](const Vec3& x) { return norm(x) < 1 ? Vec3{1, 0, 0} : Vec3{0, 0, 0}; });
  const auto w = weak_l3_norm(b);
  EXPECT_FALSE(w.warning);
  // |{|f| > s}| = 4 pi / 3 for s < 1.
  EXPECT_NEAR(w.value, std::cbrt(4 * M_PI / 3), 0.05);
}

TEST(Norms, LerayProjectionRemovesDivergence) {
  const Grid g(6.0, 32);
  Spectral sp(g);
  VectorField f = field_from(g, [](const Vec3& x) {
    const double e = std::exp(-dot(x, x));
    return Vec3{x[0] * e, 0.5 * e, 0};
  });
  EXPECT_GT(spectral_divergence_max(f, sp), 0.1);
  EXPECT_LT(spectral_divergence_max(leray_project(f, sp), sp), 1e-10);
}

TEST(Embeddings, AuditPassesWithSharpConstants) {
  const EmbeddingAudit a = embedding_audit(Grid(6.0, 48));
  EXPECT_EQ(a.rows.size(), 10u);
  EXPECT_NEAR(a.k_morrey, std::sqrt(3 * std::cbrt(4 * M_PI / 3)), 1e-12);
  EXPECT_NEAR(a.k_weighted, 1 / std::sqrt(2.0), 1e-15);
  EXPECT_TRUE(a.ordering_ok);
  EXPECT_TRUE(a.ball_ok);
  EXPECT_TRUE(a.reference_ok);
  EXPECT_LE(a.c_morrey, a.k_morrey * (1 + a.tol));
  EXPECT_LE(a.c_weighted, a.k_weighted * (1 + a.tol));
  for (const auto& r : a.rows) {
    EXPECT_TRUE(std::isfinite(r.weak_l3)) << r.name;
    EXPECT_LE(r.ball_l2 * r.ball_l2, std::pow(1 + r.ball_radius, 3) * r.weighted_l2 * r.weighted_l2 * (1 + 1e-12))
        << r.name;
  }
}
