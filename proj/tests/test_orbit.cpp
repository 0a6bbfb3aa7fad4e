#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "dsslab/orbit.hpp"
#include "dsslab/stationary.hpp"
#include "fixture.hpp"

using namespace dsslab;
using dsslab::testing::SmallProblem;

TEST(Budget, RhoFormula) {
  const EnergyBudget b = EnergyBudget::make(0.01, System::MHD, std::log(2.0));
  const double T = std::log(2.0);
  EXPECT_NEAR(b.rho, 0.01 * T / (1 - std::exp(-T / 16)), 1e-15);
  EXPECT_DOUBLE_EQ(EnergyBudget::make(0.01, System::VNSED, T).decay_rate, 1.0 / 64);
}

TEST(Orbit, LinearFlowMatchesMatrixExponential) {
  const auto& p = SmallProblem::get();
  const CoeffTables lin = p.tab.linear_only();
  Eigen::MatrixXd M;
  Eigen::VectorXd b;
  linear_system(lin, 0.0, M, b);
  const Eigen::VectorXd xs = -M.partialPivLu().solve(b);
  const Eigen::VectorXd x0 = Eigen::VectorXd::LinSpaced(lin.dim(), -1, 1);
  const Eigen::MatrixXd E = (M * p.period).exp();
  const Eigen::VectorXd exact = E * (x0 - xs) + xs;
  EXPECT_LT((period_map(x0, lin, 256) - exact).norm(), 1e-9);
}

TEST(Orbit, LinearFixedPointIsEquilibrium) {
  const auto& p = SmallProblem::get();
  const CoeffTables lin = p.tab.linear_only();
  Eigen::MatrixXd M;
  Eigen::VectorXd b;
  linear_system(lin, 0.0, M, b);
  const Eigen::VectorXd xs = -M.partialPivLu().solve(b);
  FixedPointOptions fo;
  const OrbitResult o = poincare_fixed_point(lin, p.budget, fo);
  ASSERT_TRUE(o.converged);
  EXPECT_LT((o.start - xs).norm(), 1e-8);
}

TEST(Orbit, FixedPointAndAudits) {
  const auto& p = SmallProblem::get();
  FixedPointOptions fo;
  const OrbitResult o = poincare_fixed_point(p.tab, p.budget, fo);
  ASSERT_TRUE(o.converged);
  EXPECT_LE(o.fixed_point_residual, 1e-6 * p.budget.rho);
  EXPECT_EQ(o.projections, 0);
  EXPECT_LE((period_map(o.start, p.tab, 512) - o.start).norm(), 2e-6 * p.budget.rho);
  const EnergyAudit a = energy_audit(o, p.tab, p.budget);
  EXPECT_TRUE(a.identity_ok);
  EXPECT_TRUE(a.inequality_ok);
  EXPECT_TRUE(a.dissipation_ok);
  // The self-similar orbit sits on the stationary point.
  const StationaryReport st = solve_stationary(p.tab, p.budget.C2);
  EXPECT_LT((st.x - o.start).norm(), 1e-8);
}

TEST(Orbit, TransientEnergyIdentity) {
  const auto& p = SmallProblem::get();
  Eigen::VectorXd x0 = Eigen::VectorXd::Constant(p.tab.dim(), 1.0);
  x0 *= 0.5 * p.budget.rho / x0.norm();
  const OrbitResult o = integrate_period(x0, p.tab, 256, true);
  ASSERT_EQ(o.s.size(), 257u);
  const EnergyAudit a = energy_audit(o, p.tab, p.budget);
  EXPECT_TRUE(a.identity_ok) << a.identity_max_error << " vs " << a.identity_tolerance;
  EXPECT_TRUE(a.inequality_ok);
}

TEST(Orbit, TrapHoldsFromRandomStarts) {
  const auto& p = SmallProblem::get();
  const TrapReport t = trap_test(p.tab, p.budget, 30, 17, 128);
  EXPECT_EQ(t.starts, 30);
  EXPECT_EQ(t.violations, 0);
  EXPECT_LE(t.worst_margin, 0.0);
}

TEST(Orbit, ZeroForcingGivesZeroSolution) {
  const auto& p = SmallProblem::get();
  const CoeffTables t = assemble_tables(p.basis, *p.Z, {p.Z.get()}, System::MHD);
  const EnergyBudget b = EnergyBudget::make(0.0, System::MHD, p.period);
  FixedPointOptions fo;
  const OrbitResult o = poincare_fixed_point(t, b, fo);
  ASSERT_TRUE(o.converged);
  EXPECT_EQ(o.start.norm(), 0.0);
  EXPECT_EQ(o.fixed_point_residual, 0.0);
}
