#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "dsslab/grid.hpp"

namespace dsslab {

using Spectrum = std::vector<std::complex<double>>;

// FFT toolkit on a periodic grid. Plans use FFTW_ESTIMATE so results are reproducible bit for bit.
class Spectral {
 public:
  explicit Spectral(const Grid& grid);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  const Grid& grid() const { return grid_; }
  int nz_half() const { return grid_.N / 2 + 1; }
  std::size_t spec_size() const { return static_cast<std::size_t>(grid_.N) * grid_.N * nz_half(); }
  std::size_t spec_index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * grid_.N + j) * nz_half() + k;
  }
  // Angular wavenumber for array index i along a full axis (k index uses the same formula).
  double wavenumber(int i) const;
  bool is_nyquist(int i) const { return i == grid_.N / 2; }

  Spectrum forward(const ScalarArray& f) const;
  ScalarArray backward(const Spectrum& F) const;

  // Multiplies the spectrum by m(kx,ky,kz) and transforms back.
  ScalarArray apply(const ScalarArray& f,
                    const std::function<std::complex<double>(double, double, double)>& m) const;
  ScalarArray derivative(const ScalarArray& f, int axis) const;
  ScalarArray laplacian(const ScalarArray& f) const;
  ScalarArray divergence(const VecArray& v) const;
  GradArray gradient(const VecArray& v) const;

  // sum over the full spectrum of w(k)|F_k|^2, scaled so that w = 1 gives the L2 norm squared.
  double parseval(const Spectrum& F, const std::function<double(double, double, double)>& w) const;
  // H^{-1} norm with multiplier (1+|k|^2)^{-1/2}.
  double hm1_norm(const VecArray& v) const;

 private:
  Grid grid_;
  double* rbuf_ = nullptr;
  void* cbuf_ = nullptr;
  void* plan_f_ = nullptr;
  void* plan_b_ = nullptr;
};

}  // namespace dsslab
