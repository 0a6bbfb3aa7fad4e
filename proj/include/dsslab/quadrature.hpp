#pragma once

#include <functional>
#include <vector>

#include "dsslab/types.hpp"

namespace dsslab {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

const GaussRule& gauss_legendre(int n);

// Composite Gauss-Legendre on [a, b] with equal panels.
double integrate(const std::function<double(double)>& f, double a, double b, int panels, int order = 16);

// Integral of G over the exterior of the cube [-L, L]^3. The integrand is assumed to decay like
// |y|^{-beta} with a profile that is periodic in log|y| with period log_period (any positive value
// for homogeneous data); the far field is summed as a geometric series.
double cube_exterior_integral(const std::function<double(const Vec3&)>& G, double L, double beta,
                              double log_period, int face_order = 16);

// Integral of G over the cube [-a, a]^3 in cube-radial coordinates; tolerates |y|^{-2} singularities at 0.
double cube_interior_integral(const std::function<double(const Vec3&)>& G, double a, int face_order = 16,
                              int radial_order = 24);

// Integral over the ball B_R(center) using a product rule (radial Gauss x angular Gauss/trapezoid).
double ball_integral(const std::function<double(const Vec3&)>& G, const Vec3& center, double R, int n_r = 16,
                     int n_theta = 16, int n_phi = 32);

}  // namespace dsslab
