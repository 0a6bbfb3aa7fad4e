#pragma once

#include <array>
#include <string>
#include <vector>

#include "dsslab/galerkin.hpp"
#include "dsslab/orbit.hpp"

namespace dsslab {

// Fields entering the stress bracket at one similarity time: velocity part U with its mollified copy, the
// magnetic-type parts G_n (one for MHD, three for vNSEd) and the backgrounds W, E_n.
struct StressFields {
  VecArray U, Um, W;
  std::vector<VecArray> G, Gm, E;
};

StressFields stress_fields(const GalerkinBasis& basis, const CutoffBackground& W,
                           const std::vector<const CutoffBackground*>& aux, const Eigen::VectorXd& x, double s);

// b_ij = (Um)_i U_j + W_i U_j + U_i W_j + W_i W_j - sum_n [(Gm_n)_i G_nj + E_ni G_nj + G_ni E_nj + E_ni E_nj],
// stored at index 3 i + j.
std::array<ScalarArray, 9> stress_bracket(const StressFields& f);

struct PressureField {
  Grid grid;
  ScalarArray values;  // zero mean on the box
  std::string source;
  double poisson_residual = 0;  // |Delta p + d_i d_j b|_2 / |b|_2 on the padded grid
  double bracket_norm = 0;
  int pad = 2;
};

// p solves -Delta p = d_i d_j b_ij on the zero-padded grid (pad = 1 means periodic), then restricted to the box.
PressureField riesz_pressure(const Grid& grid, const std::array<ScalarArray, 9>& bracket, int pad,
                             const std::string& source = "bracket");
PressureField riesz_pressure(const Grid& grid, const StressFields& f, int pad);

// Multiplier of the pair R_i R_j^* = xi_i xi_j / |xi|^2; zero at xi = 0.
double riesz_pair_multiplier(int i, int j, double kx, double ky, double kz);
// max |sum_i R_i R_i^* f - f| / max |f| for a deterministic mean-free test scalar.
double riesz_idempotence_defect(const Grid& grid);

// L^q(box) norm of a scalar and of a vector array.
double box_lq(const Grid& grid, const ScalarArray& f, double q);
double box_lq(const Grid& grid, const VecArray& f, double q);

struct PressureBoundAudit {
  double p_norm = 0;    // |p|_{L^{5/3}(box x [0,T])}
  double rhs = 0;       // sum of squared L^{10/3}(box x [0,T]) norms
  double ratio = 0;
  double W_norm = 0;    // |W|_{L^{10/3}(R^3 x [0,T])}, tail included
  double W_bound = 0;   // delta T^{3/10}
  bool W_ok = true;
  double W_bound_display = 0;  // delta T^{10/3}, recorded only
  std::vector<double> aux_norms;
  bool aux_ok = true;
  double max_poisson_residual = 0;
  int slices = 0;
};

// Pressure slices along the orbit, uniformly spaced over one period.
PressureBoundAudit pressure_bound_audit(const GalerkinBasis& basis, const CutoffBackground& W,
                                        const std::vector<const CutoffBackground*>& aux, const OrbitResult& orbit,
                                        int slices, int pad = 2);

struct InterpolationAudit {
  double lhs = 0;          // |U|_{L^{10/3}(box x [0,T])}
  double linf_l2 = 0;      // |U|_{L^inf L^2}
  double l2_h1 = 0;        // |U|_{L^2 H^1}
  double c_sob = 0;        // sharp constant of |f|_6 <= C |grad f|_2
  double measured_sob = 0; // max over samples of |U|_6 / |grad U|_2
  double rhs = 0;          // linf_l2^{2/5} (c_sob^2 int |grad U|^2)^{3/10}
  bool ok = true;
};

// Audits the velocity block of the orbit (first k coefficients) on every stride-th sample.
InterpolationAudit interpolation_audit(const GalerkinBasis& basis, const OrbitResult& orbit, int stride = 8);

}  // namespace dsslab
