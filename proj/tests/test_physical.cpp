#include <gtest/gtest.h>

#include <random>

#include "dsslab/physical.hpp"
#include "dsslab/stationary.hpp"
#include "fixture.hpp"

using namespace dsslab;
using dsslab::testing::SmallProblem;

namespace {

struct Candidates {
  Eigen::VectorXd x;
  SolutionCandidate c, zero;
  Candidates() {
    const auto& p = SmallProblem::get();
    const SimilarityMap map(2.0);
    x = solve_stationary(p.tab, p.budget.C2).x;
    c = reconstruct_stationary(x, System::MHD, p.basis, *p.W, {p.D.get()}, map, true);
    zero = reconstruct_stationary(Eigen::VectorXd::Zero(x.size()), System::MHD, p.basis, *p.Z, {p.Z.get()}, map,
                                  true);
  }
  static const Candidates& get() {
    static const Candidates c;
    return c;
  }
};

}  // namespace

TEST(Bump, ProfileAndSupport) {
  EXPECT_EQ(bump1d(0.0).v, 1.0);
  EXPECT_EQ(bump1d(0.5).v, 1.0);
  EXPECT_EQ(bump1d(1.0).v, 0.0);
  EXPECT_EQ(bump1d(-1.2).v, 0.0);
  const double h = 1e-5;
  EXPECT_NEAR(bump1d(0.7).d, (bump1d(0.7 + h).v - bump1d(0.7 - h).v) / (2 * h), 1e-7);
}

TEST(Bump, TestFunctionDerivatives) {
  const TestFunction phi = bump_function({{0.1, 0.2, -0.1}, 1.5, 1.0, 0.6});
  const Vec3 z{0.9, -0.3, 0.5};
  const double tau = 1.3, h = 1e-4;
  TestValue v, a, b;
  ASSERT_TRUE(phi(z, tau, v));
  phi(z, tau + h, a);
  phi(z, tau - h, b);
  EXPECT_NEAR(v.dt, (a.v - b.v) / (2 * h), 1e-6);
  double lap = 0;
  for (int j = 0; j < 3; ++j) {
    Vec3 zp = z, zm = z;
    zp[j] += h;
    zm[j] -= h;
    phi(zp, tau, a);
    phi(zm, tau, b);
    EXPECT_NEAR(v.grad[j], (a.v - b.v) / (2 * h), 1e-6);
    lap += (a.v - 2 * v.v + b.v) / (h * h);
  }
  EXPECT_NEAR(v.lap, lap, 1e-4);
  TestValue far;
  EXPECT_FALSE(phi({5, 5, 5}, tau, far));
}

TEST(Reconstruction, PhysicalValuesAreScaledProfiles) {
  const auto& cand = Candidates::get();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3, 3), lt(-3, 2);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 x{u(rng), u(rng), u(rng)};
    const double t = std::exp(lt(rng));
    const ProfileSample ps = map_to_profile({x, t});
    const Vec3 v = cand.c.eval(x, t).v;
    const Vec3 w = scale_field_value(cand.c.profile(ps.y, ps.s).v, Direction::ToPhysical, t);
    for (int d = 0; d < 3; ++d) EXPECT_NEAR(v[d], w[d], 1e-14 * (1 + std::abs(w[d])));
  }
  EXPECT_THROW(cand.c.eval({0, 0, 1}, 0.0), DomainError);
}

TEST(Reconstruction, SelfSimilarCandidateIsScaleInvariant) {
  const auto& cand = Candidates::get();
  const auto probes = default_probe_set(2.0, 3, 16);
  EXPECT_LT(dss_defect([&](const Vec3& x, double t) { return cand.c.velocity(x, t); }, 2.0, probes), 1e-12);
  EXPECT_LT(dss_defect([&](const Vec3& x, double t) { return cand.c.velocity(x, t); }, 1.37, probes), 1e-12);
}

TEST(Reconstruction, ZeroCandidateIsZero) {
  const auto& cand = Candidates::get();
  for (const Vec3& x : {Vec3{0.3, 0.1, 0.2}, Vec3{2, -1, 0.5}}) {
    const PhysicalValue v = cand.zero.eval(x, 0.7, true);
    EXPECT_EQ(norm(v.v), 0.0);
    EXPECT_EQ(norm(v.aux[0]), 0.0);
    EXPECT_EQ(cand.zero.pressure_at(x, 0.7), 0.0);
  }
  const HeatDistanceReport h = distance_to_heat_flow(cand.zero, 0.5, 2, 2, 16);
  for (double g : h.g) EXPECT_EQ(g, 0.0);
}

TEST(HeatDistance, DyadicScalingIsExact) {
  const auto& cand = Candidates::get();
  const HeatDistanceReport h = distance_to_heat_flow(cand.c, 0.5, 3, 2, 24);
  ASSERT_EQ(h.g.size(), 6u);
  EXPECT_LT(h.max_ratio_error, 1e-12);
  EXPECT_LT(h.envelope_spread, 1e-12);
  EXPECT_TRUE(h.scaling_ok);
  EXPECT_GT(h.C0, 0.0);
  // The profile-grid form of the same distance.
  EXPECT_NEAR(heat_gap_profile(cand.c, 0.5), h.g[0], 0.05 * h.g[0]);
}

TEST(Lei, PullbackIdentity) {
  // Profile residual of psi = e^s phi(y e^s, e^{2s}/2) equals half the physical residual of phi.
  const auto& cand = Candidates::get();
  std::vector<TestFunction> phys, prof;
  for (const auto& b : default_physical_bumps(2.0, 11, 2)) {
    phys.push_back(bump_function(b));
    prof.push_back(profile_pullback(phys.back()));
  }
  const LeiReport r = local_energy_inequality(cand.c, prof, phys, 12);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(r.profile[i].residual, 0.5 * r.physical[i].residual, 1e-10 * r.physical[i].scale);
  }
}

TEST(Lei, ZeroCandidateHasZeroResidual) {
  const auto& cand = Candidates::get();
  const LeiReport r = local_energy_inequality(cand.zero, default_profile_bumps(std::log(2.0), 5, 2),
                                              default_physical_bumps(2.0, 6, 2), 8);
  for (const auto& t : r.profile) EXPECT_EQ(t.residual, 0.0);
  for (const auto& t : r.physical) EXPECT_EQ(t.residual, 0.0);
}

TEST(Lei, SupportOutsidePeriodRejected) {
  const auto& cand = Candidates::get();
  BumpTest b;
  b.time_centre = 0.0;
  b.time_half = 0.3;
  EXPECT_ANY_THROW(local_energy_inequality(cand.c, std::vector<BumpTest>{b}, std::vector<BumpTest>{}, 8));
}

TEST(LocalEnergy, FiniteAndDecaying) {
  const auto& cand = Candidates::get();
  const LocalEnergyReport r = local_energy_report(cand.c, {0.5}, 0.2);
  EXPECT_TRUE(r.finite);
  EXPECT_TRUE(r.decay_ok);
  EXPECT_TRUE(r.split_ok);
  ASSERT_EQ(r.rows.size(), 4u);
}

TEST(InitialData, ConvergesToData) {
  const auto& cand = Candidates::get();
  const HeatDistanceReport h = distance_to_heat_flow(cand.c, 0.5, 1, 2, 24);
  const InitialDataReport r = initial_data_convergence(cand.c, 0.5, 2.0, {0.1, 0.01, 0.001}, h.C0);
  EXPECT_TRUE(r.flow_decreasing);
  EXPECT_TRUE(r.heat_decreasing);
  EXPECT_TRUE(r.bound_ok);
  EXPECT_ANY_THROW(initial_data_convergence(cand.c, 0.5, 2.0, {0.01, 0.1}, h.C0));
}
