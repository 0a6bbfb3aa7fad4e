#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dsslab/galerkin.hpp"

namespace dsslab {

struct EnergyBudget {
  double C2 = 0;
  double decay_rate = 1.0 / 16.0;
  double period = 0;
  double rho = 0;  // C2 T / (1 - exp(-T rate))

  static EnergyBudget make(double C2, System sys, double period);
  // Integrated Gronwall envelope for E(s) = |c(s)|^2 starting from E0.
  double envelope(double E0, double s) const;
};

struct OrbitResult {
  std::vector<double> s;
  std::vector<Eigen::VectorXd> states;
  std::vector<double> energy;       // |c|^2
  std::vector<double> dissipation;  // H^1 sums |c|^2 + grad seminorms
  std::vector<double> rhs_dE;       // assembled 2 c . dc/ds
  Eigen::VectorXd start, end;
  double fixed_point_residual = 0;
  double halving_error = 0;  // |end(steps) - end(2 steps)|
  int steps = 0;
  bool finite = true;
  // Poincare solve bookkeeping.
  bool converged = false;
  int iterations = 0;
  int projections = 0;
  int newton_steps = 0;
  std::string status;
};

// RK4 with fixed step T/steps from s = 0. Records every step when record is set.
OrbitResult integrate_period(const Eigen::VectorXd& start, const CoeffTables& tab, int steps, bool record = true);
// End state only.
Eigen::VectorXd period_map(const Eigen::VectorXd& start, const CoeffTables& tab, int steps);

struct FixedPointOptions {
  double tol = 1e-10;
  int max_iters = 400;
  double theta = 0.5;
  int steps = 256;
  // Switch to quasi-Newton when the residual fails to halve over this many damped iterations.
  int stall_window = 8;
};

OrbitResult poincare_fixed_point(const CoeffTables& tab, const EnergyBudget& budget, const FixedPointOptions& opt,
                                 const Eigen::VectorXd* seed = nullptr);

struct EnergyAudit {
  // (a) identity: finite-differenced dE/ds against the assembled right-hand side.
  double identity_max_error = 0;
  double identity_tolerance = 0;  // 10 x step-halving estimate plus a roundoff floor
  bool identity_ok = true;
  // (b) dE/ds + rate E <= C2.
  double inequality_worst = 0;  // max of dE/ds + rate E - C2
  bool inequality_ok = true;
  // (c) integral of H^1 sums over the period <= C2 T / rate.
  double dissipation_integral = 0;
  double dissipation_bound = 0;
  bool dissipation_ok = true;
  bool ok() const { return identity_ok && inequality_ok && dissipation_ok; }
};

// The orbit must carry recorded samples; the refined orbit (2x steps, same start) sets the identity tolerance.
EnergyAudit energy_audit(const OrbitResult& orbit, const CoeffTables& tab, const EnergyBudget& budget,
                         double slack = 1e-9);

struct TrapReport {
  int starts = 0;
  int violations = 0;
  double worst_margin = 0;  // max over samples of |c|^2 - envelope (negative inside)
  double slack = 0;
  bool ok() const { return violations == 0; }
};

// Random starts uniformly distributed in the ball of radius rho; each integrated over one period.
TrapReport trap_test(const CoeffTables& tab, const EnergyBudget& budget, int starts, unsigned long seed, int steps);

// Orbit trace as CSV: s, E, dissipation, residual.
void write_orbit_csv(const std::string& path, const OrbitResult& orbit);

// Matrix M and vector b of the linear part of the vector field for stationary tables: dx/ds = M x + b.
void linear_system(const CoeffTables& tab, double s, Eigen::MatrixXd& M, Eigen::VectorXd& b);

}  // namespace dsslab
