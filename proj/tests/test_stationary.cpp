#include <gtest/gtest.h>

#include "dsslab/stationary.hpp"
#include "fixture.hpp"

using namespace dsslab;
using dsslab::testing::SmallProblem;

TEST(Stationary, NewtonSolveInsideSphere) {
  const auto& p = SmallProblem::get();
  const StationaryReport r = solve_stationary(p.tab, p.budget.C2, 1e-12);
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.residual, 1e-8);
  EXPECT_NEAR(r.sphere_radius, 8 * std::sqrt(p.budget.C2), 1e-15);
  EXPECT_LE(r.norm, r.sphere_radius);
  EXPECT_TRUE(r.in_sphere);
}

TEST(Stationary, WeakFormAgreesWithTables) {
  // Residual assembled in field space vanishes at the table solution.
  const auto& p = SmallProblem::get();
  const StationaryReport r = solve_stationary(p.tab, p.budget.C2, 1e-12);
  const Eigen::VectorXd w = weak_form_residual(p.basis, *p.W, {p.D.get()}, r.x);
  EXPECT_LT(w.norm(), 1e-9);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(p.tab.dim());
  EXPECT_LT((weak_form_residual(p.basis, *p.W, {p.D.get()}, z) - stationary_residual(z, p.tab)).norm(), 1e-10);
}

TEST(Stationary, SphereCertificate) {
  const auto& p = SmallProblem::get();
  const SphereCertificate c = sphere_certificate(p.tab, p.budget.C2, 200, 3);
  EXPECT_EQ(c.samples, 200);
  EXPECT_TRUE(c.ok());
  EXPECT_LE(c.worst_cubic, 1e-10);
}

TEST(Stationary, JacobianMatchesDifferences) {
  const auto& p = SmallProblem::get();
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(p.tab.dim(), -0.1, 0.1);
  const Eigen::MatrixXd J = stationary_jacobian(x, p.tab);
  const double h = 1e-6;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(x.size());
  e[3] = h;
  const Eigen::VectorXd col = (stationary_residual(x + e, p.tab) - stationary_residual(x - e, p.tab)) / (2 * h);
  EXPECT_LT((J.col(3) - col).norm(), 1e-5);
}

TEST(Stationary, CrossSystemReductions) {
  const auto& p = SmallProblem::get();
  const int k = p.tab.k;
  const StationaryReport mhd = solve_stationary(p.tab, p.budget.C2, 1e-12);
  const auto* Z = p.Z.get();
  const CoeffTables tv = assemble_tables(p.basis, *p.W, {p.D.get(), Z, Z}, System::VNSED);
  const StationaryReport vns = solve_stationary(tv, forcing_norm_c2(*p.W, {p.D.get(), Z, Z}, System::VNSED), 1e-12);
  ASSERT_TRUE(vns.converged);
  EXPECT_LT((vns.x.head(2 * k) - mhd.x).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(vns.x.tail(2 * k).cwiseAbs().maxCoeff(), 1e-10);

  const CoeffTables t0 = assemble_tables(p.basis, *p.W, {Z}, System::MHD);
  const CoeffTables tn = assemble_tables(p.basis, *p.W, {}, System::NS);
  const StationaryReport a = solve_stationary(t0, forcing_norm_c2(*p.W, {Z}, System::MHD), 1e-12);
  const StationaryReport n = solve_stationary(tn, forcing_norm_c2(*p.W, {}, System::NS), 1e-12);
  EXPECT_LT((a.x.head(k) - n.x).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(a.x.tail(k).cwiseAbs().maxCoeff(), 0.0);
}
