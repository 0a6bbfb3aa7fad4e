#include "dsslab/similarity.hpp"

#include <cmath>

namespace dsslab {

SimilarityMap::SimilarityMap(double lam) : lambda(lam) {
  if (!(lam > 0) || !std::isfinite(lam)) throw DomainError("scale factor must be positive and finite");
}

ProfileSample map_to_profile(const PhysicalSample& xt) {
  if (!(xt.t > 0)) throw DomainError("physical time must be positive");
  const double r = std::sqrt(2.0 * xt.t);
  return {{xt.x[0] / r, xt.x[1] / r, xt.x[2] / r}, std::log(r)};
}

PhysicalSample map_to_physical(const ProfileSample& ys) {
  const double r = std::exp(ys.s);
  return {{ys.y[0] * r, ys.y[1] * r, ys.y[2] * r}, 0.5 * r * r};
}

Vec3 scale_field_value(const Vec3& value, Direction dir, double t, FieldKind kind) {
  if (!(t > 0)) throw DomainError("physical time must be positive");
  const double f = kind == FieldKind::Vector ? std::sqrt(2.0 * t) : 2.0 * t;
  if (dir == Direction::ToProfile) return f * value;
  return {value[0] / f, value[1] / f, value[2] / f};
}

double scale_pressure_value(double value, Direction dir, double t) {
  if (!(t > 0)) throw DomainError("physical time must be positive");
  return dir == Direction::ToProfile ? value * 2.0 * t : value / (2.0 * t);
}

double dss_defect(const PhysicalSampler& f, double lambda, const std::vector<PhysicalSample>& probes) {
  if (probes.empty()) throw ArgumentError("empty probe set");
  if (!(lambda > 1)) throw DomainError("dss_defect needs lambda > 1");
  double worst = 0;
  for (const auto& p : probes) {
    if (!(p.t > 0)) throw DomainError("probe time must be positive");
    const Vec3 a = f(lambda * p.x, lambda * lambda * p.t);
    const Vec3 b = f(p.x, p.t);
    worst = std::max(worst, norm(lambda * a - b));
  }
  return worst;
}

std::vector<PhysicalSample> default_probe_set(double lambda, int n_times, int n_points, double t0) {
  std::vector<PhysicalSample> out;
  // Deterministic quasi-random directions (golden-angle spiral) and radii in [0.5, 2].
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int it = 0; it < n_times; ++it) {
    const double t = t0 * std::pow(lambda * lambda, static_cast<double>(it) / n_times);
    for (int ip = 0; ip < n_points; ++ip) {
      const double z = 1.0 - 2.0 * (ip + 0.5) / n_points;
      const double rr = std::sqrt(1.0 - z * z);
      const double phi = golden * ip;
      const double rad = 0.5 * std::pow(4.0, std::fmod(0.6180339887498949 * (ip + 1), 1.0));
      out.push_back({{rad * rr * std::cos(phi), rad * rr * std::sin(phi), rad * z}, t});
    }
  }
  return out;
}

}  // namespace dsslab
