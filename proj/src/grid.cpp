#include "dsslab/grid.hpp"

#include <algorithm>
#include <cmath>

namespace dsslab {

Grid::Grid(double half_width, int points) : L(half_width), N(points) {
  if (!(half_width > 0)) throw ArgumentError("grid half width must be positive");
  if (points < 2 || points % 2 != 0) throw ArgumentError("grid points per axis must be even and >= 2");
}

Vec3 Grid::point(std::size_t idx) const {
  const int k = static_cast<int>(idx % N);
  const int j = static_cast<int>((idx / N) % N);
  const int i = static_cast<int>(idx / (static_cast<std::size_t>(N) * N));
  return point(i, j, k);
}

long Grid::radius_key(std::size_t idx) const {
  const long k = static_cast<long>(idx % N) - N / 2;
  const long j = static_cast<long>((idx / N) % N) - N / 2;
  const long i = static_cast<long>(idx / (static_cast<std::size_t>(N) * N)) - N / 2;
  return i * i + j * j + k * k;
}

VecArray sample(const Grid& grid, const std::function<Vec3(const Vec3&)>& f) {
  VecArray out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out.set(i, f(grid.point(i)));
  return out;
}

ScalarArray sample_scalar(const Grid& grid, const std::function<double(const Vec3&)>& f) {
  ScalarArray out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = f(grid.point(i));
  return out;
}

double inner(const Grid& grid, const VecArray& a, const VecArray& b) {
  double s = 0;
  for (int d = 0; d < 3; ++d) {
    const double* x = a.c[d].data();
    const double* y = b.c[d].data();
    for (std::size_t i = 0; i < a.size(); ++i) s += x[i] * y[i];
  }
  return s * grid.weight();
}

double inner(const Grid& grid, const ScalarArray& a, const ScalarArray& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * grid.weight();
}

double l2norm(const Grid& grid, const VecArray& a) { return std::sqrt(inner(grid, a, a)); }

double max_abs(const ScalarArray& a) {
  double m = 0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double max_abs(const VecArray& a) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, norm(a.at(i)));
  return m;
}

void axpy(double a, const VecArray& x, VecArray& y) {
  for (int d = 0; d < 3; ++d)
    for (std::size_t i = 0; i < x.size(); ++i) y.c[d][i] += a * x.c[d][i];
}

}  // namespace dsslab
