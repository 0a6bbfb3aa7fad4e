#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "dsslab/galerkin.hpp"
#include "dsslab/orbit.hpp"
#include "dsslab/pressure.hpp"
#include "dsslab/similarity.hpp"

namespace dsslab {

// Initial data v0 and its heat flow e^{t Delta} v0 in physical variables.
struct DataEvaluator {
  std::function<Vec3(const Vec3&)> v0;
  std::function<Vec3(const Vec3&, double)> heat;
};

// Built from the profile source of a background: swirl data use the direct radial quadrature of the heat flow,
// other sources the scaled profile U0(y, s) / sqrt(2t). The zero background gives zero evaluators.
DataEvaluator data_evaluator(const CutoffBackground& bg);

// Physical-space values of a candidate at one point.
struct PhysicalValue {
  Vec3 v{0, 0, 0};
  std::vector<Vec3> aux;  // b (MHD) or the columns f_n (vNSEd)
  Mat3 grad_v = zero_mat();
  std::vector<Mat3> grad_aux;
};

// A solution candidate in physical variables. Holds non-owning pointers: the basis, the backgrounds and the
// tables must outlive it.
struct SolutionCandidate {
  System system = System::MHD;
  SimilarityMap map;
  const GalerkinBasis* basis = nullptr;
  const CutoffBackground* W = nullptr;
  std::vector<const CutoffBackground*> aux;
  bool stationary = true;
  // Orbit samples on [0, T] with their s-derivatives (cubic Hermite in between).
  std::vector<double> s;
  std::vector<Eigen::VectorXd> states, rates;
  // Pressure slices p(., s_m) on the profile grid.
  std::vector<double> pressure_s;
  std::vector<PressureField> pressure;
  DataEvaluator data;
  std::vector<DataEvaluator> aux_data;

  double period() const { return map.period(); }
  int naux() const { return static_cast<int>(aux.size()); }
  // Galerkin state at similarity time s (reduced mod T).
  Eigen::VectorXd state(double s) const;
  // Profile u = U + W and g_n = G_n + E_n at (y, s); gradients when requested.
  PhysicalValue profile(const Vec3& y, double s, bool grads = false) const;
  // Physical values at (x, t); throws DomainError for t <= 0.
  PhysicalValue eval(const Vec3& x, double t, bool grads = false) const;
  Vec3 velocity(const Vec3& x, double t) const { return eval(x, t).v; }
  // Profile pressure interpolated in y (trilinear) and s (linear); zero outside the box.
  double profile_pressure(const Vec3& y, double s) const;
  double pressure_at(const Vec3& x, double t) const;
};

// From a converged periodic orbit (or a one-sample stationary orbit) and the tables that generated it.
SolutionCandidate reconstruct(const OrbitResult& orbit, const CoeffTables& tab, const GalerkinBasis& basis,
                              const CutoffBackground& W, const std::vector<const CutoffBackground*>& aux,
                              const SimilarityMap& map, int pressure_slices = 0, int pad = 2);
// Stationary state x (self-similar candidate).
SolutionCandidate reconstruct_stationary(const Eigen::VectorXd& x, System sys, const GalerkinBasis& basis,
                                         const CutoffBackground& W,
                                         const std::vector<const CutoffBackground*>& aux, const SimilarityMap& map,
                                         bool with_pressure = false, int pad = 2);

struct HeatDistanceReport {
  std::vector<double> t, g;
  std::vector<int> dyad;
  double max_ratio_error = 0;       // max |g(lambda^2 t) / (sqrt(lambda) g(t)) - 1|
  std::vector<double> envelope;     // sup over each dyad of g(t) / t^{1/4}
  double envelope_spread = 0;       // max / min - 1
  double C0 = 0;                    // largest envelope value
  int quad_points = 0;
  bool scaling_ok = true;           // ratio error <= 1%
  bool envelope_ok = true;          // spread <= 2%
};

// g(t) = (sum over fields of |field(t) - e^{t Delta} field_0|^2_{L^2})^{1/2}, by midpoint quadrature on a
// physical box that scales with each dyad. Times t0 lambda^{2j + 2m/per_dyad}.
HeatDistanceReport distance_to_heat_flow(const SolutionCandidate& c, double t0 = 0.5, int dyads = 3,
                                         int per_dyad = 4, int quad_points = 48);

// The same distance evaluated on the profile grid: (2t)^{1/4} |u - U0|_{L^2(box)}(s).
double heat_gap_profile(const SolutionCandidate& c, double t);

struct LocalEnergyRow {
  double R = 0;
  Vec3 x0{0, 0, 0};
  double energy_sup = 0;   // sup over sampled t in (0, R^2] of int_{B_R(x0)} |v|^2 + |b|^2
  double enstrophy = 0;    // int_0^{R^2} int_{B_R(x0)} |grad v|^2 + |grad b|^2
  double spacetime = 0;    // int_0^{R^2} int_{B_R(x0)} |v|^2 + |b|^2
  double split_bound = 0;  // sup over t of 2 g(t)^2 + 2 int_{B_R(x0)} |e^{t Delta} v0|^2 + ...
  bool split_ok = true;
};

struct LocalEnergyReport {
  std::vector<LocalEnergyRow> rows;
  bool finite = true;
  bool decay_ok = true;  // spacetime energy strictly decreasing along |x0| = 4R, 8R, 16R
  bool split_ok = true;
};

// C0 bounds g(t) / t^{1/4} (from distance_to_heat_flow); a negative value samples it on the profile grid.
LocalEnergyReport local_energy_report(const SolutionCandidate& c, const std::vector<double>& radii,
                                      const std::vector<Vec3>& centres, double C0 = -1.0, int t_nodes = 10);
// Default sweep: centres 0, 4R e, 8R e, 16R e along e = (1, 2, 2) / 3.
LocalEnergyReport local_energy_report(const SolutionCandidate& c, const std::vector<double>& radii = {0.5, 1.0},
                                      double C0 = -1.0);

// Test function prod_i b((z_i - c_i) / r) b((tau - tau_c) / width) with b = 1 - Z(2|.|): a C-infinity bump equal
// to 1 on [-1/2, 1/2] and supported in [-1, 1]. tau is s for profile tests and t for physical tests.
struct BumpTest {
  Vec3 centre{0, 0, 0};
  double radius = 2.0;
  double time_centre = 0;
  double time_half = 0.25;
};
// b, b' and b'' at z.
Jet2 bump1d(double z);

// Value, tau-derivative, gradient and Laplacian of a test function at (z, tau).
struct TestValue {
  double v = 0, dt = 0, lap = 0;
  Vec3 grad{0, 0, 0};
};
// Returns false where the function and its derivatives vanish.
using TestFunction = std::function<bool(const Vec3& z, double tau, TestValue& out)>;
TestFunction bump_function(const BumpTest& b);
// psi(y, s) = e^s phi(y e^s, e^{2s} / 2) from a physical test function phi(x, t).
TestFunction profile_pullback(const TestFunction& phi);

std::vector<BumpTest> default_profile_bumps(double period, unsigned long seed, int n = 5);
std::vector<BumpTest> default_physical_bumps(double lambda, unsigned long seed, int n = 5);

struct LeiTerms {
  double lhs = 0;       // energy and dissipation against the test function
  double heat = 0;      // energy against d_tau + Delta of the test function
  double flux = 0;      // transport and pressure flux
  double coupling = 0;  // -(u . a)(a . grad) summed over the magnetic-type fields
  double residual = 0;  // heat + flux + coupling - lhs
  double scale = 0;     // |lhs| + |heat| + |flux| + |coupling|
  bool ok = true;       // residual >= -1e-6 scale
};

struct LeiReport {
  std::vector<LeiTerms> profile, physical;
  double worst_relative = 0;  // min over tests of residual / scale
  int s_nodes = 0;
  bool ok = true;
};

// Residual of the local energy inequality in profile form and in physical form, by trapezoid quadrature in s on
// [0, T] and grid quadrature in y. Every test function must be supported in s in [0, T] (t in [1/2, lambda^2/2]).
LeiReport local_energy_inequality(const SolutionCandidate& c, const std::vector<BumpTest>& profile_tests,
                                  const std::vector<BumpTest>& physical_tests, int s_nodes = 24, int pad = 2);
// General test functions; the caller guarantees the support condition.
LeiReport local_energy_inequality(const SolutionCandidate& c, const std::vector<TestFunction>& profile_tests,
                                  const std::vector<TestFunction>& physical_tests, int s_nodes = 24, int pad = 2);

struct InitialDataReport {
  std::vector<double> t;
  std::vector<double> total;       // |v(t) - v0|_{L^2(K)}
  std::vector<double> flow_part;   // |v(t) - e^{t Delta} v0|_{L^2(K)}
  std::vector<double> heat_part;   // |e^{t Delta} v0 - v0|_{L^2(K)}
  std::vector<double> flow_bound;  // C0 t^{1/4}
  bool flow_decreasing = true;
  bool heat_decreasing = true;
  bool bound_ok = true;
};

// K is the annulus r_in <= |x| <= r_out; C0 comes from distance_to_heat_flow.
InitialDataReport initial_data_convergence(const SolutionCandidate& c, double r_in, double r_out,
                                           const std::vector<double>& t_sequence, double C0);

}  // namespace dsslab
