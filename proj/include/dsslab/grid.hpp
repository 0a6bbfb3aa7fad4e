#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "dsslab/types.hpp"

namespace dsslab {

// Uniform periodic grid on the cube [-L, L)^3 with N points per axis.
struct Grid {
  double L = 6.0;
  int N = 48;

  Grid() = default;
  Grid(double half_width, int points);

  double h() const { return 2.0 * L / N; }
  std::size_t size() const { return static_cast<std::size_t>(N) * N * N; }
  double coord(int i) const { return -L + i * h(); }
  double weight() const { const double hh = h(); return hh * hh * hh; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * N + j) * N + k;
  }
  Vec3 point(std::size_t idx) const;
  Vec3 point(int i, int j, int k) const { return {coord(i), coord(j), coord(k)}; }
  // Index of the grid point at the origin.
  std::size_t origin_index() const { return index(N / 2, N / 2, N / 2); }
  // Integer key i^2+j^2+k^2 of the radius (in units of h) of a grid point.
  long radius_key(std::size_t idx) const;
  bool operator==(const Grid& o) const { return L == o.L && N == o.N; }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

using ScalarArray = std::vector<double>;

struct VecArray {
  std::array<ScalarArray, 3> c;
  VecArray() = default;
  explicit VecArray(std::size_t n) { for (auto& a : c) a.assign(n, 0.0); }
  std::size_t size() const { return c[0].size(); }
  Vec3 at(std::size_t i) const { return {c[0][i], c[1][i], c[2][i]}; }
  void set(std::size_t i, const Vec3& v) { c[0][i] = v[0]; c[1][i] = v[1]; c[2][i] = v[2]; }
};

// 3x3 gradient samples: g[3*i+j] = d v_i / d y_j.
struct GradArray {
  std::array<ScalarArray, 9> g;
  GradArray() = default;
  explicit GradArray(std::size_t n) { for (auto& a : g) a.assign(n, 0.0); }
  std::size_t size() const { return g[0].size(); }
};

VecArray sample(const Grid& grid, const std::function<Vec3(const Vec3&)>& f);
ScalarArray sample_scalar(const Grid& grid, const std::function<double(const Vec3&)>& f);

// Discrete L2 inner products with weight h^3.
double inner(const Grid& grid, const VecArray& a, const VecArray& b);
double inner(const Grid& grid, const ScalarArray& a, const ScalarArray& b);
double l2norm(const Grid& grid, const VecArray& a);
double max_abs(const ScalarArray& a);
double max_abs(const VecArray& a);

void axpy(double a, const VecArray& x, VecArray& y);

}  // namespace dsslab
