#include <gtest/gtest.h>

#include <cmath>

#include "dsslab/background.hpp"
#include "dsslab/swirl.hpp"
#include "fixture.hpp"

using namespace dsslab;
using dsslab::testing::SmallProblem;

TEST(Smoothstep, EndpointsAndSymmetry) {
  EXPECT_EQ(smoothstep(0.5).v, 0.0);
  EXPECT_EQ(smoothstep(1.0).v, 0.0);
  EXPECT_EQ(smoothstep(2.0).v, 1.0);
  EXPECT_NEAR(smoothstep(1.5).v, 0.5, 1e-15);
  for (double t : {1.1, 1.3, 1.45}) EXPECT_NEAR(smoothstep(t).v + smoothstep(3 - t).v, 1.0, 1e-15);
}

TEST(Smoothstep, DerivativesMatchDifferences) {
  const double h = 1e-5;
  for (double t : {1.2, 1.5, 1.8}) {
    EXPECT_NEAR(smoothstep(t).d, (smoothstep(t + h).v - smoothstep(t - h).v) / (2 * h), 1e-8);
    EXPECT_NEAR(smoothstep(t).dd, (smoothstep(t + h).d - smoothstep(t - h).d) / (2 * h), 1e-6);
  }
}

TEST(Cutoff, VanishesInsideAndIsOneOutside) {
  EXPECT_EQ(cutoff({0.5, 0, 0}, 1.0).xi, 0.0);
  EXPECT_EQ(cutoff({0, 3.0, 0}, 1.0).xi, 1.0);
  const CutoffValue c = cutoff({1.5, 0, 0}, 1.0);
  EXPECT_NEAR(c.xi, 0.5, 1e-15);
  EXPECT_GT(c.grad[0], 0.0);
}

TEST(CutoffBackground, SmallnessAndResolution) {
  const auto& p = SmallProblem::get();
  EXPECT_DOUBLE_EQ(p.W->R0(), 2.0);
  EXPECT_LE(p.W->sup_lq(), 0.25);
  EXPECT_LE(p.W->sup_div(), 1e-8);
  EXPECT_TRUE(p.W->stationary());
  EXPECT_FALSE(p.W->is_zero());
}

TEST(CutoffBackground, PointEvaluationMatchesGrid) {
  const auto& p = SmallProblem::get();
  const VecArray& Wg = p.W->slice(0).W;
  double err = 0, scale = 0;
  for (std::size_t i = 0; i < p.grid.size(); i += 97) {
    const Vec3 v = p.W->eval(p.grid.point(i), 0.0);
    err = std::max(err, norm(v - Wg.at(i)));
    scale = std::max(scale, norm(Wg.at(i)));
  }
  EXPECT_LT(err, 1e-12 * (1 + scale));
}

TEST(CutoffBackground, GradientMatchesDifferences) {
  const auto& p = SmallProblem::get();
  const Vec3 y{2.3, -1.1, 0.7};
  const Mat3 G = p.W->eval_grad(y, 0.0);
  const double h = 1e-4;
  for (int j = 0; j < 3; ++j) {
    Vec3 a = y, b = y;
    a[j] += h;
    b[j] -= h;
    const Vec3 d = (1.0 / (2 * h)) * (p.W->eval(a, 0.0) - p.W->eval(b, 0.0));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(G[i][j], d[i], 1e-5);
  }
  // Trace of the gradient is the divergence.
  EXPECT_NEAR(trace(G), 0.0, 1e-4);
}

TEST(CutoffBackground, ZeroBackgroundIsZero) {
  const auto& p = SmallProblem::get();
  EXPECT_TRUE(p.Z->is_zero());
  EXPECT_EQ(p.Z->source(), nullptr);
  EXPECT_EQ(p.Z->sup_lq(), 0.0);
  EXPECT_EQ(max_abs(p.Z->slice(0).W), 0.0);
  EXPECT_EQ(norm(p.Z->eval({1, 2, 3}, 0.1)), 0.0);
}

TEST(CutoffBackground, CoarseGridHasNoAdmissibleRadius) {
  const Grid g(6.0, 32);
  HeatBackground hb(std::make_shared<SwirlBackground>(SwirlData::canonical(0.05)), g, std::log(2.0), 1);
  EXPECT_ANY_THROW(CutoffBackground::build(hb, CutoffOptions{}));
}

TEST(CutoffBackground, LargeDataFailsSmallness) {
  const Grid g(6.0, 48);
  HeatBackground hb(std::make_shared<SwirlBackground>(SwirlData::canonical(5.0)), g, std::log(2.0), 1);
  EXPECT_THROW(CutoffBackground::build(hb, CutoffOptions{}), CutoffError);
}

TEST(HeatBackground, TailDecreasesTowardHomogeneousRate) {
  // The L^{10/3} tail of a (-1)-homogeneous profile decays no faster than R^{-1/10}.
  const Grid g(6.0, 48);
  HeatBackground hb(std::make_shared<SwirlBackground>(SwirlData::canonical(1.0)), g, 1.0, 1);
  const auto th = hb.tail_function({1.0, 2.5, 5.0}, 10.0 / 3.0);
  EXPECT_GT(th[0], th[1]);
  EXPECT_GT(th[1], th[2]);
  EXPECT_GT(th[2] / th[1], std::pow(2.0, -0.1));
}

TEST(HeatBackground, DssProfileIsPeriodic) {
  const Grid g(6.0, 48);
  HeatBackground hb(std::make_shared<SwirlBackground>(make_swirl_dss(3, 0.05, 2.0)), g, std::log(2.0), 4);
  EXPECT_FALSE(hb.stationary());
  EXPECT_LT(hb.periodicity_defect(), 1e-10);
}
