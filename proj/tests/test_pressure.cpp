#include <gtest/gtest.h>

#include <cmath>

#include "dsslab/pressure.hpp"
#include "fixture.hpp"

using namespace dsslab;
using dsslab::testing::SmallProblem;

namespace {

StressFields velocity_only(const Grid& g, const std::function<Vec3(const Vec3&)>& u) {
  StressFields f;
  f.U = sample(g, u);
  f.Um = f.U;
  f.W = VecArray(g.size());
  return f;
}

}  // namespace

TEST(Riesz, MultiplierAndIdempotence) {
  EXPECT_EQ(riesz_pair_multiplier(0, 0, 0, 0, 0), 0.0);
  EXPECT_NEAR(riesz_pair_multiplier(0, 0, 1, 0, 0), 1.0, 1e-15);
  EXPECT_NEAR(riesz_pair_multiplier(0, 1, 1, 1, 0), 0.5, 1e-15);
  EXPECT_LE(riesz_idempotence_defect(Grid(6.0, 32)), 1e-10);
}

TEST(Riesz, ShearFlowHasZeroPressure) {
  const Grid g(6.0, 32);
  const auto f = velocity_only(g, [](const Vec3& y) {
    return Vec3{std::sin(M_PI * y[1] / 3) + 0.3 * std::cos(M_PI * y[1] / 2), 0, 0};
  });
  const PressureField p = riesz_pressure(g, f, 1);
  EXPECT_LE(max_abs(p.values), 1e-10);
}

TEST(Riesz, SingleModePressure) {
  // u = (cos(m y1), 0, 0): -Delta p = d1 d1 cos^2(m y1), so p = -cos(2 m y1) / 2.
  const Grid g(6.0, 32);
  const double m = M_PI / 3;
  const auto f = velocity_only(g, [m](const Vec3& y) { return Vec3{std::cos(m * y[0]), 0, 0}; });
  const PressureField p = riesz_pressure(g, f, 1);
  double e = 0;
  for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs(p.values[i] + 0.5 * std::cos(2 * m * g.point(i)[0])));
  EXPECT_LT(e, 1e-12);
  EXPECT_LT(p.poisson_residual, 1e-12);
}

TEST(Riesz, MeanZeroGauge) {
  const Grid g(6.0, 32);
  const auto f = velocity_only(g, [](const Vec3& y) {
    const double e = std::exp(-dot(y, y));
    return Vec3{-y[1] * e, y[0] * e, 0.0};
  });
  const PressureField p = riesz_pressure(g, f, 2);
  double mean = 0;
  for (double v : p.values) mean += v;
  EXPECT_NEAR(mean / g.size(), 0.0, 1e-14);
  EXPECT_LT(p.poisson_residual, 1e-8);
}

TEST(Riesz, VelocityEqualsMagneticGivesZero) {
  const auto& p = SmallProblem::get();
  const int k = p.basis.k();
  Eigen::VectorXd x(2 * k);
  for (int i = 0; i < k; ++i) x[i] = x[k + i] = 0.1 * (i + 1);
  const StressFields f = stress_fields(p.basis, *p.W, {p.W.get()}, x, 0.0);
  EXPECT_LE(max_abs(riesz_pressure(p.grid, f, 2).values), 1e-10);
}

TEST(Pressure, BoundAuditOnOrbit) {
  const auto& p = SmallProblem::get();
  FixedPointOptions fo;
  const OrbitResult o = poincare_fixed_point(p.tab, p.budget, fo);
  const PressureBoundAudit a = pressure_bound_audit(p.basis, *p.W, {p.D.get()}, o, 2);
  EXPECT_TRUE(std::isfinite(a.ratio));
  EXPECT_GT(a.ratio, 0.0);
  EXPECT_LE(a.max_poisson_residual, 1e-8);
  EXPECT_TRUE(a.W_ok);
  EXPECT_TRUE(a.aux_ok);
  EXPECT_EQ(a.slices, 2);
  const InterpolationAudit ia = interpolation_audit(p.basis, o);
  EXPECT_TRUE(ia.ok);
  EXPECT_LE(ia.measured_sob, ia.c_sob);
}

TEST(Pressure, LqNormOfConstant) {
  const Grid g(1.0, 16);
  const ScalarArray one(g.size(), 1.0);
  // |[-1, 1)^3| = 8.
  EXPECT_NEAR(box_lq(g, one, 2.0), std::sqrt(8.0), 1e-14);
  EXPECT_NEAR(box_lq(g, one, 5.0 / 3.0), std::pow(8.0, 0.6), 1e-13);
}
