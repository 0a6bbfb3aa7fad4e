#pragma once

#include <Eigen/Dense>
#include <string>

#include "dsslab/galerkin.hpp"

namespace dsslab {

// Residual P(x) of the algebraic Galerkin system; tables must be s-independent.
Eigen::VectorXd stationary_residual(const Eigen::VectorXd& x, const CoeffTables& tab);

// Forward-difference Jacobian of P with step 1e-6 (1 + |x|).
Eigen::MatrixXd stationary_jacobian(const Eigen::VectorXd& x, const CoeffTables& tab);

struct StationaryReport {
  Eigen::VectorXd x;
  double residual = 0;
  double norm = 0;
  double sphere_radius = 0;  // 8 sqrt(C2)
  bool in_sphere = true;
  bool converged = false;
  int iterations = 0;
  int gradient_steps = 0;  // iterations taken by the gradient-flow fallback
  std::string status;
};

StationaryReport solve_stationary(const CoeffTables& tab, double C2, double tol = 1e-10, int max_iters = 60);

struct SphereCertificate {
  int samples = 0;
  double radius = 0;
  double C2 = 0;
  double worst = 0;       // max of P(x).x + |x|^2/32 - C2
  double worst_sign = 0;  // max of P(x).x
  double worst_cubic = 0; // max |x . quadratic part| / |x|^3
  double limit = 0;       // 1e-6 (1 + C2)
  bool ok() const { return worst <= limit; }
};

// radius < 0 selects 8 sqrt(C2).
SphereCertificate sphere_certificate(const CoeffTables& tab, double C2, int samples, unsigned long seed,
                                     double radius = -1.0);

// Weak-form residual against each basis function, assembled directly in field space from the raw trilinear forms.
Eigen::VectorXd weak_form_residual(const GalerkinBasis& basis, const CutoffBackground& W,
                                   const std::vector<const CutoffBackground*>& aux, const Eigen::VectorXd& x);

}  // namespace dsslab
