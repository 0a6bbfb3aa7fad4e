#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dsslab/grid.hpp"
#include "dsslab/spectral.hpp"
#include "dsslab/swirl.hpp"

namespace dsslab {

using Evaluator = std::function<Vec3(const Vec3&)>;

// Sampled vector field on [-L, L)^3 with an optional analytic description outside the box.
struct VectorField {
  Grid grid;
  VecArray values;
  // Field values for points outside the box (homogeneous or DSS decay); empty when absent.
  Evaluator tail;
  // log-period of the tail profile; 0 for a (-1)-homogeneous tail.
  double tail_log_period = 0.0;
  // Exact evaluator for fields singular at the origin; the origin cell is then integrated analytically.
  Evaluator origin_eval;
  bool divergence_free = false;
  double divergence_tol = 1e-8;

  VectorField() = default;
  VectorField(const Grid& g) : grid(g), values(g.size()) {}
};

struct TensorField {
  std::array<VectorField, 3> columns;
};

VectorField field_from(const Grid& grid, const Evaluator& f);

// ----- data generators -----

struct HomogeneousData {
  SwirlData swirl;
  VectorField field;
};

// Seed 0 gives c0 (-x2, x1, 0)/|x|^2; other seeds give random rotations and combinations.
HomogeneousData make_homogeneous_data(unsigned long long angular_seed, double c0, const Grid& grid);

// Random modulated swirl data that is lambda-DSS but not homogeneous.
SwirlData make_swirl_dss(unsigned long long seed, double c0, double lambda, double mod_amp = 0.3);

struct AnnulusProfile {
  Evaluator eval;  // defined on r_inner <= |x| < r_outer
  double r_inner = 1.0;
  double r_outer = 2.0;
};

struct DssData {
  Evaluator eval;  // extension to all of R^3 \ {0}
  VectorField field;
};

DssData make_dss_data(const AnnulusProfile& profile, double lambda, const Grid& grid);

// ----- norms -----

// Integral of G(y, f(y)) over R^3: trapezoidal box rule, exact cube around a singular origin, and the
// exterior tail when tail_beta > 3 (G(tail) must decay like |y|^{-tail_beta}).
double integrate_field(const VectorField& f, const std::function<double(const Vec3& y, const Vec3& v)>& G,
                       double tail_beta);

struct WeakNormResult {
  double value = 0.0;
  bool warning = false;  // boundary values do not decay and no tail is known
};

WeakNormResult weak_l3_norm(const VectorField& f);
// Lower bound of the Morrey M^{2,1} norm over dyadic radii and a coarse center lattice.
double morrey_norm(const VectorField& f, int center_stride = 0);
double weighted_l2_norm(const VectorField& f);
// L2 norm over the ball |x| <= M (M must lie inside the box).
double l2_ball_norm(const VectorField& f, double M);
// Whole-space L^q norm (q > 3 uses the tail; otherwise box only).
double lq_norm(const VectorField& f, double q);

// ----- embedding chain: weak L^3 => Morrey M^{2,1} => weighted L^2 -----

struct NamedField {
  std::string name;
  VectorField field;
};

// Ten test fields: (|x|^{-1}, 0, 0), homogeneous swirls, DSS swirls, a Gaussian and a sum.
std::vector<NamedField> embedding_corpus(const Grid& grid);

struct EmbeddingRow {
  std::string name;
  double weak_l3 = 0, morrey = 0, weighted_l2 = 0;
  double ball_radius = 0, ball_l2 = 0;  // |f|_{L^2(B_M)} against (1 + M)^{3/2} |f|_{L^2_{-3/2}}
  bool weak_warning = false;
};

struct EmbeddingAudit {
  std::vector<EmbeddingRow> rows;
  // Sharp constants: Morrey <= sqrt(3 (4 pi / 3)^{1/3}) weak-L^3 and weighted <= Morrey / sqrt(2).
  double k_morrey = 0, k_weighted = 0;
  double c_morrey = 0, c_weighted = 0;  // measured maxima of the ratios
  double inv_weak = 0, inv_weighted = 0;  // values for |x|^{-1}
  double tol = 0.02;
  bool ordering_ok = true, ball_ok = true, reference_ok = true;
  bool ok() const { return ordering_ok && ball_ok && reference_ok; }
};

EmbeddingAudit embedding_audit(const Grid& grid, double ball_radius = 2.0);

// Projects onto divergence-free fields with the spectral projector I - k k^T / |k|^2.
VectorField leray_project(const VectorField& f, const Spectral& sp);
double spectral_divergence_max(const VectorField& f, const Spectral& sp);

// Max relative mismatch between the tail evaluator and grid values on the outer shell.
double tail_shell_mismatch(const VectorField& f);

// ----- field import / export -----

void write_field_binary(const std::string& path, const VectorField& f, int tail_kind = 0, double tail_param = 0.0);
VectorField read_field_binary(const std::string& path, int* tail_kind = nullptr, double* tail_param = nullptr);
void write_field_csv(const std::string& path, const VectorField& f);

}  // namespace dsslab
