#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dsslab/background.hpp"
#include "dsslab/grid.hpp"
#include "dsslab/spectral.hpp"

namespace dsslab {

// NS is the velocity-only reduction (no magnetic or deformation fields).
enum class System { MHD, VNSED, NS };

std::string to_string(System s);
System system_from_string(const std::string& s);
// Number of magnetic-type fields: 1 (MHD), 3 (vNSEd), 0 (NS).
int aux_count(System s);

enum class BasisLayout { Lattice, Radial };
std::string to_string(BasisLayout l);
BasisLayout layout_from_string(const std::string& s);

struct BasisOptions {
  int k = 12;
  BasisLayout layout = BasisLayout::Lattice;
  double sigma = 0.75;      // Gaussian potential width
  double spacing = 0.875;  // lattice spacing of the potential centres
  double support = 6.0;    // centres satisfy |c|_inf + support * sigma <= L
};

// Smooth compactly supported bump eta_eps with unit discrete integral, applied as a Fourier multiplier.
class Mollifier {
 public:
  Mollifier(const Spectral& sp, double eps);
  double epsilon() const { return eps_; }
  double integral() const { return integral_; }
  VecArray apply(const VecArray& v) const;

 private:
  const Spectral* sp_;
  double eps_;
  double integral_ = 0;
  Spectrum kernel_hat_;
};

// Orthonormal divergence-free modes h_i = Gram-Schmidt(curl(phi_c e_a)).
struct GalerkinBasis {
  Grid grid;
  int requested = 0;
  std::vector<VecArray> h;
  std::vector<GradArray> grad;
  std::vector<VecArray> molli;  // eta_eps * h_i
  double epsilon = 0;
  double gram_residual = 0;  // Frobenius norm of Gram - I
  double div_max = 0;        // max spectral divergence over modes
  double molli_div_max = 0;
  int dropped = 0;  // raw modes rejected as linearly dependent

  // Raw potentials curl(phi_c e_a) with phi_c a Gaussian of width sigma; h_i = sum_r transform(i, r) raw_r.
  struct RawMode {
    Vec3 centre{0, 0, 0};
    int axis = 0;
  };
  double sigma = 0;
  std::vector<RawMode> raw;
  Eigen::MatrixXd transform;

  int k() const { return static_cast<int>(h.size()); }
  // U = sum_i c_i h_i and its gradient.
  VecArray combine(const double* c) const;
  GradArray combine_grad(const double* c) const;
  VecArray combine_molli(const double* c) const;
  // sum_i c_i h_i at an arbitrary point from the analytic raw modes; optionally its gradient.
  Vec3 value_at(const double* c, const Vec3& y, Mat3* grad = nullptr) const;
  // Same from precomputed raw weights w = transform^T c.
  Eigen::VectorXd raw_weights(const double* c) const;
  Vec3 raw_value(const Eigen::VectorXd& w, const Vec3& y, Mat3* grad = nullptr) const;
};

GalerkinBasis build_basis(const Spectral& sp, const BasisOptions& opt, double epsilon);

// Tables of one background slice; index convention d mu_j/ds = sum_i A(i,j) mu_i + ...
struct SliceTables {
  double s = 0;
  Eigen::MatrixXd A, F;
  std::vector<Eigen::MatrixXd> B, E;  // one per magnetic-type field
  Eigen::VectorXd D;
  std::vector<Eigen::VectorXd> H;
};

struct CoeffTables {
  System system = System::MHD;
  int k = 0;
  int naux = 1;
  double period = 0;
  Eigen::MatrixXd K;      // (grad h_i, grad h_j)
  std::vector<double> C;  // C(i,l,j) at (i*k + l)*k + j
  std::vector<double> G;
  std::vector<SliceTables> slices;

  double c(int i, int l, int j) const { return C[(static_cast<std::size_t>(i) * k + l) * k + j]; }
  double g(int i, int l, int j) const { return G[(static_cast<std::size_t>(i) * k + l) * k + j]; }
  bool stationary() const { return slices.size() == 1; }
  int dim() const { return k * (1 + naux); }
  // Sum of squared H^1 seminorms ||grad U||^2 + sum ||grad G_n||^2 of a state.
  double dissipation(const Eigen::VectorXd& x) const;
  // Linear interpolation between slices (periodic in s).
  SliceTables at(double s) const;
  // Builds a copy with the quadratic tables zeroed (linear-only system).
  CoeffTables linear_only() const;
};

// Table assembly. aux holds D (MHD, one entry), E_1..E_3 (vNSEd) or nothing (NS).
CoeffTables assemble_tables(const GalerkinBasis& basis, const CutoffBackground& W,
                            const std::vector<const CutoffBackground*>& aux, System sys);

// Raw inner products used by the tables.
double drift_inner(const GalerkinBasis& basis, int i, int j);  // (y . grad h_i, h_j)
double grad_inner(const GalerkinBasis& basis, int i, int j);   // (grad h_i, grad h_j)

// State layout: [mu (k), aux_1 (k), ..., aux_n (k)].
Eigen::VectorXd rhs(const Eigen::VectorXd& x, const SliceTables& t, const CoeffTables& tab);
Eigen::VectorXd rhs(const Eigen::VectorXd& x, double s, const CoeffTables& tab);
// Quadratic part only.
Eigen::VectorXd rhs_quadratic(const Eigen::VectorXd& x, const CoeffTables& tab);
// d/ds (|mu|^2 + |aux|^2) contributed by the quadratic part.
double cubic_energy_contribution(const Eigen::VectorXd& x, const CoeffTables& tab);

// C2 = 8(...) for MHD and NS, 32(...) for vNSEd, from slice-wise sup norms.
double forcing_norm_c2(const CutoffBackground& W, const std::vector<const CutoffBackground*>& aux, System sys);
double decay_rate(System sys);

// Field-space evaluation of d/ds(|U|^2 + sum |G_n|^2) from the energy identity, independent of the tables.
struct EnergyTerms {
  double dEds = 0;        // assembled right-hand side of d/ds E
  double dissipation = 0;  // sum of ||grad||^2
  double energy = 0;       // sum of ||.||^2
};
EnergyTerms energy_identity_field(const GalerkinBasis& basis, const CutoffBackground& W,
                                  const std::vector<const CutoffBackground*>& aux, const Eigen::VectorXd& x,
                                  double s);

// Binary table cache with a versioned header; the key string must match on load.
void save_tables(const std::string& path, const CoeffTables& t, const std::string& key);
bool load_tables(const std::string& path, const std::string& key, CoeffTables& out);

}  // namespace dsslab
