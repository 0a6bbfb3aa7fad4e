#pragma once

#include <memory>
#include <vector>

#include "dsslab/fields_norms.hpp"
#include "dsslab/grid.hpp"
#include "dsslab/profile_source.hpp"
#include "dsslab/spectral.hpp"

namespace dsslab {

// C-infinity step in tau: 0 for tau <= 1, 1 for tau >= 2, with first and second tau-derivatives.
Jet2 smoothstep(double tau);

// xi(y) = Z(|y|/R0) with gradient and Laplacian.
struct CutoffValue {
  double xi = 0;
  Vec3 grad{0, 0, 0};
  double lap = 0;
};
CutoffValue cutoff(const Vec3& y, double R0);

// Heat-semigroup background U0 sampled on s-slices of one period.
class HeatBackground {
 public:
  HeatBackground(std::shared_ptr<const ProfileSource> src, const Grid& grid, double period, int slices);

  const ProfileSource& source() const { return *src_; }
  std::shared_ptr<const ProfileSource> source_ptr() const { return src_; }
  const Grid& grid() const { return grid_; }
  double period() const { return period_; }
  bool stationary() const { return src_->s_independent(); }
  int slices() const { return static_cast<int>(s_.size()); }
  double slice_time(int m) const { return s_[m]; }

  // U0(., s_m) as a field with the analytic tail.
  VectorField field(int m) const;
  // Max over the grid of |U0(., 0) - U0(., period)|.
  double periodicity_defect() const;
  // Theta(R) = sup over slices of ||U0||_{L^q(|y| >= R)}; requires R <= L.
  std::vector<double> tail_function(const std::vector<double>& radii, double q) const;

 private:
  std::shared_ptr<const ProfileSource> src_;
  Grid grid_;
  double period_;
  std::vector<double> s_;
};

struct CutoffOptions {
  double delta = 0.25;
  double q = 10.0 / 3.0;
  // Candidate radii, searched in increasing order; empty means dyadic radii 1, 2, 4, ... with 2 R0 < L.
  std::vector<double> r0_candidates;
  // Default candidates need R0 >= this many grid cells.
  double min_transition_cells = 8.0;
  int pad = 2;
};

struct CutoffSlice {
  double s = 0;
  VecArray W;   // xi U0 + w
  VecArray LW;  // L W = d_s W - Delta W - W - y.grad W
  double lq = 0, l4 = 0, lw_hm1 = 0;
  double div_max = 0;  // max |div W| (analytic part plus spectral corrector)
};

// Raised when no candidate R0 brings ||W||_{L^q} below delta.
class CutoffError : public std::runtime_error {
 public:
  CutoffError(const std::string& msg, double achieved) : std::runtime_error(msg), achieved_norm(achieved) {}
  double achieved_norm;
};

class CutoffBackground {
 public:
  static CutoffBackground build(const HeatBackground& U0, const CutoffOptions& opt);
  // Fixed R0 (no search).
  static CutoffBackground build_fixed(const HeatBackground& U0, double R0, const CutoffOptions& opt);
  static CutoffBackground zero(const Grid& grid, double period, int slices);

  const Grid& grid() const { return grid_; }
  double R0() const { return R0_; }
  double delta() const { return delta_; }
  double period() const { return period_; }
  bool stationary() const { return slices_.size() == 1; }
  int slices() const { return static_cast<int>(slices_.size()); }
  const CutoffSlice& slice(int m) const { return slices_[m]; }
  bool is_zero() const { return zero_; }
  // Underlying profile; null for the zero background.
  const ProfileSource* source() const { return zero_ ? nullptr : src_.get(); }

  double sup_lq() const;
  double sup_l4() const;
  double sup_lw_hm1() const;
  double sup_div() const;
  double theta_R0() const { return theta_R0_; }
  double corrector_max() const { return corrector_max_; }
  double poisson_residual() const { return poisson_residual_; }

  // W at an arbitrary point: xi U0 exactly plus the corrector interpolated on the grid (zero outside).
  Vec3 eval(const Vec3& y, double s) const;
  // Gradient of eval: analytic part exactly, corrector by centred differences of the interpolant.
  Mat3 eval_grad(const Vec3& y, double s) const;
  // W and L W on the grid at arbitrary s, linear between slices.
  VecArray W_at(double s) const;
  VecArray LW_at(double s) const;
  // W(., s_m) as a field with tail.
  VectorField field(int m) const;
  // Index of the slice at or before s and the linear weight of the next one.
  std::pair<int, double> locate(double s) const;

 private:
  Grid grid_;
  double R0_ = 1, delta_ = 0.25, period_ = 1;
  std::vector<CutoffSlice> slices_;
  std::vector<VecArray> corr_;  // corrector w per slice
  std::shared_ptr<const ProfileSource> src_;
  double theta_R0_ = 0, corrector_max_ = 0, poisson_residual_ = 0;
  bool zero_ = false;
};

// L W on one slice and its H^{-1} surrogate; throws DomainError for a single slice of s-dependent data.
struct LwForcing {
  VecArray LW;
  double hm1 = 0;
};
LwForcing lw_forcing(const CutoffBackground& bg, int slice, const Spectral& sp);

}  // namespace dsslab
