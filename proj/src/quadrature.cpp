#include "dsslab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace dsslab {

namespace {

GaussRule build_rule(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.x[i] = z;
    r.w[i] = 2.0 / ((1 - z * z) * dp * dp);
  }
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b, int panels, int order) {
  const GaussRule& g = gauss_legendre(order);
  const double w = (b - a) / panels;
  double s = 0;
  for (int p = 0; p < panels; ++p) {
    const double c = a + (p + 0.5) * w;
    for (int i = 0; i < order; ++i) s += g.w[i] * f(c + 0.5 * w * g.x[i]);
  }
  return s * 0.5 * w;
}

namespace {

// Visits the six faces of [-a,a]^3: yields the face point p and the area weight (including a = p.n).
template <class F>
void for_each_face_point(double a, int order, F&& fn) {
  const GaussRule& g = gauss_legendre(order);
  for (int axis = 0; axis < 3; ++axis)
    for (int sgn = -1; sgn <= 1; sgn += 2) {
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      for (int i = 0; i < order; ++i)
        for (int j = 0; j < order; ++j) {
          Vec3 p{0, 0, 0};
          p[axis] = sgn * a;
          p[u] = a * g.x[i];
          p[v] = a * g.x[j];
          fn(p, g.w[i] * g.w[j] * a * a * a);
        }
    }
}

}  // namespace

double cube_exterior_integral(const std::function<double(const Vec3&)>& G, double L, double beta,
                              double log_period, int face_order) {
  if (!(beta > 3)) throw ArgumentError("exterior integral needs decay faster than |y|^-3");
  const double P = log_period > 0 ? log_period : 1.0;
  // Explicit radial range in u = log tau, then one more period for the geometric far field.
  const double u_end = std::max(std::log(64.0 / L), 3.0 * P);
  const int per_panel = 8;
  const int panels = std::max(4, static_cast<int>(std::ceil(u_end / (0.2))));
  const int last_panels = std::max(2, static_cast<int>(std::ceil(P / 0.2)));
  const double ratio = std::exp((3.0 - beta) * P);
  double total = 0;
  for_each_face_point(L, face_order, [&](const Vec3& p, double w) {
    auto radial = [&](double u) {
      const double tau = std::exp(u);
      return tau * tau * tau * G(tau * p);
    };
    const double near = integrate(radial, 0.0, u_end, panels, per_panel);
    const double last = integrate(radial, u_end, u_end + P, last_panels, per_panel);
    total += w * (near + last / (1.0 - ratio));
  });
  return total;
}

double cube_interior_integral(const std::function<double(const Vec3&)>& G, double a, int face_order,
                              int radial_order) {
  double total = 0;
  for_each_face_point(a, face_order, [&](const Vec3& p, double w) {
    auto radial = [&](double tau) { return tau * tau * G(tau * p); };
    total += w * integrate(radial, 0.0, 1.0, 1, radial_order);
  });
  return total;
}

double ball_integral(const std::function<double(const Vec3&)>& G, const Vec3& center, double R, int n_r,
                     int n_theta, int n_phi) {
  const GaussRule& gr = gauss_legendre(n_r);
  const GaussRule& gt = gauss_legendre(n_theta);
  double total = 0;
  for (int i = 0; i < n_r; ++i) {
    const double r = 0.5 * R * (gr.x[i] + 1);
    const double wr = 0.5 * R * gr.w[i] * r * r;
    for (int j = 0; j < n_theta; ++j) {
      const double ct = gt.x[j];
      const double st = std::sqrt(1 - ct * ct);
      for (int k = 0; k < n_phi; ++k) {
        const double ph = 2 * M_PI * (k + 0.5) / n_phi;
        const Vec3 y{center[0] + r * st * std::cos(ph), center[1] + r * st * std::sin(ph), center[2] + r * ct};
        total += wr * gt.w[j] * (2 * M_PI / n_phi) * G(y);
      }
    }
  }
  return total;
}

}  // namespace dsslab
