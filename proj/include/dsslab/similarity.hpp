#pragma once

#include <functional>
#include <vector>

#include "dsslab/types.hpp"

namespace dsslab {

// Scale factor lambda and similarity-time period T = log(lambda).
struct SimilarityMap {
  double lambda = 2.0;
  explicit SimilarityMap(double lam = 2.0);
  double period() const { return std::log(lambda); }
};

struct PhysicalSample {
  Vec3 x{0, 0, 0};
  double t = 1.0;
};

struct ProfileSample {
  Vec3 y{0, 0, 0};
  double s = 0.0;
};

// y = x / sqrt(2t), s = log sqrt(2t).
ProfileSample map_to_profile(const PhysicalSample& xt);
PhysicalSample map_to_physical(const ProfileSample& ys);

enum class Direction { ToProfile, ToPhysical };
enum class FieldKind { Vector, Pressure };

// Velocity-type values scale by sqrt(2t), pressure by 2t.
Vec3 scale_field_value(const Vec3& value, Direction dir, double t, FieldKind kind = FieldKind::Vector);
double scale_pressure_value(double value, Direction dir, double t);

using PhysicalSampler = std::function<Vec3(const Vec3& x, double t)>;

// max over probes of |lambda f(lambda x, lambda^2 t) - f(x, t)|.
double dss_defect(const PhysicalSampler& f, double lambda, const std::vector<PhysicalSample>& probes);

// Log-uniform times over one lambda^2 dyad starting at t0 and points in the annulus 0.5 <= |x| <= 2.
std::vector<PhysicalSample> default_probe_set(double lambda, int n_times = 6, int n_points = 64, double t0 = 1.0);

}  // namespace dsslab
