#pragma once

#include "dsslab/types.hpp"

namespace dsslab {

// A divergence-free background profile U0(y, s) with first derivatives in y.
class ProfileSource {
 public:
  virtual ~ProfileSource() = default;
  virtual Vec3 value(const Vec3& y, double s) const = 0;
  virtual Mat3 grad(const Vec3& y, double s) const = 0;
  // True when U0 does not depend on s (self-similar data).
  virtual bool s_independent() const = 0;
  // Period in log|y| of the far-field profile (log lambda); 0 for homogeneous decay.
  virtual double log_period() const = 0;
  virtual bool is_zero() const { return false; }
};

}  // namespace dsslab
