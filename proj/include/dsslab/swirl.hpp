#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "dsslab/profile_source.hpp"
#include "dsslab/types.hpp"

namespace dsslab {

// One swirl component amp * m(log|x|) * (n x x) / |x|^2 with m(tau) = 1 + mod_amp sin(2 pi tau / P + phase).
struct SwirlTerm {
  Vec3 axis{0, 0, 1};
  double amp = 1.0;
  double mod_amp = 0.0;
  double mod_phase = 0.0;
};

// Divergence-free swirl data; homogeneous of degree -1 when log_period == 0 or all mod_amp == 0.
struct SwirlData {
  std::vector<SwirlTerm> terms;
  double log_period = 0.0;

  bool homogeneous() const;
  bool is_zero() const;
  Jet2 modulation(const SwirlTerm& term, const Jet2& log_r) const;
  double modulation(const SwirlTerm& term, double r) const;
  Vec3 value(const Vec3& x) const;
  // The (-1)-homogeneous canonical swirl c (-x2, x1, 0)/|x|^2.
  static SwirlData canonical(double c);
};

// Radial heat-flow factor Q(r,t) with r-derivatives, so that e^{t Delta}[amp m (n x x)/|x|^2] = Q(|x|,t) (n x x).
Jet2 swirl_heat_radial(const SwirlData& data, const SwirlTerm& term, double r, double t);

// p, p', p'' tabulated on a graded radial mesh and evaluated by quintic Hermite interpolation.
class RadialTable {
 public:
  RadialTable() = default;
  RadialTable(const std::vector<double>& nodes, std::vector<Jet2> values, Jet2 (*far)(double, const void*),
              const void* far_ctx);
  Jet2 eval(double r) const;
  double r_max() const { return nodes_.empty() ? 0.0 : nodes_.back(); }

 private:
  std::vector<double> nodes_;
  std::vector<Jet2> vals_;
  Jet2 (*far_)(double, const void*) = nullptr;
  const void* far_ctx_ = nullptr;
};

// Similarity profile of the heat flow of swirl data: U0(y,s) = sum_a p_a(|y|, s) (n_a x y).
class SwirlBackground : public ProfileSource {
 public:
  explicit SwirlBackground(SwirlData data, double r_table = 128.0);
  Vec3 value(const Vec3& y, double s) const override;
  Mat3 grad(const Vec3& y, double s) const override;
  bool s_independent() const override { return data_.homogeneous(); }
  double log_period() const override { return data_.homogeneous() ? 0.0 : data_.log_period; }
  bool is_zero() const override { return data_.is_zero(); }
  const SwirlData& data() const { return data_; }

  // Exact (quadrature) radial profile p(r, s) with r-derivatives for one term.
  Jet2 profile_exact(std::size_t term, double r, double s) const;
  // Cached table for one term at similarity time s.
  const RadialTable& table(std::size_t term, double s) const;
  // Physical heat flow e^{t Delta} v0 at (x, t), evaluated directly by radial quadrature.
  Vec3 heat_physical(const Vec3& x, double t) const;

 private:
  double canonical_s(double s) const;
  SwirlData data_;
  double r_table_;
  mutable std::mutex mu_;
  mutable std::map<double, std::vector<std::shared_ptr<RadialTable>>> cache_;
  mutable std::vector<double> cache_order_;
};

}  // namespace dsslab
