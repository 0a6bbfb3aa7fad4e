#include "dsslab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>

namespace dsslab {

Spectral::Spectral(const Grid& grid) : grid_(grid) {
  const int N = grid_.N;
  rbuf_ = fftw_alloc_real(grid_.size());
  auto* c = fftw_alloc_complex(spec_size());
  cbuf_ = c;
  plan_f_ = fftw_plan_dft_r2c_3d(N, N, N, rbuf_, c, FFTW_ESTIMATE);
  plan_b_ = fftw_plan_dft_c2r_3d(N, N, N, c, rbuf_, FFTW_ESTIMATE);
}

Spectral::~Spectral() {
  fftw_destroy_plan(static_cast<fftw_plan>(plan_f_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_b_));
  fftw_free(rbuf_);
  fftw_free(cbuf_);
}

double Spectral::wavenumber(int i) const {
  const int N = grid_.N;
  const int m = i <= N / 2 ? i : i - N;
  return M_PI * m / grid_.L;
}

Spectrum Spectral::forward(const ScalarArray& f) const {
  std::memcpy(rbuf_, f.data(), sizeof(double) * grid_.size());
  fftw_execute(static_cast<fftw_plan>(plan_f_));
  Spectrum out(spec_size());
  std::memcpy(out.data(), cbuf_, sizeof(fftw_complex) * spec_size());
  return out;
}

ScalarArray Spectral::backward(const Spectrum& F) const {
  std::memcpy(cbuf_, F.data(), sizeof(fftw_complex) * spec_size());
  fftw_execute(static_cast<fftw_plan>(plan_b_));
  ScalarArray out(grid_.size());
  const double s = 1.0 / static_cast<double>(grid_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = rbuf_[i] * s;
  return out;
}

ScalarArray Spectral::apply(const ScalarArray& f,
                            const std::function<std::complex<double>(double, double, double)>& m) const {
  Spectrum F = forward(f);
  const int N = grid_.N;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < nz_half(); ++k) F[spec_index(i, j, k)] *= m(wavenumber(i), wavenumber(j), wavenumber(k));
  return backward(F);
}

ScalarArray Spectral::derivative(const ScalarArray& f, int axis) const {
  Spectrum F = forward(f);
  const int N = grid_.N;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < nz_half(); ++k) {
        const int idx = axis == 0 ? i : (axis == 1 ? j : k);
        const double kk = is_nyquist(idx) ? 0.0 : wavenumber(idx);
        F[spec_index(i, j, k)] *= std::complex<double>(0.0, kk);
      }
  return backward(F);
}

ScalarArray Spectral::laplacian(const ScalarArray& f) const {
  return apply(f, [](double a, double b, double c) { return std::complex<double>(-(a * a + b * b + c * c), 0.0); });
}

ScalarArray Spectral::divergence(const VecArray& v) const {
  ScalarArray out(grid_.size(), 0.0);
  for (int d = 0; d < 3; ++d) {
    ScalarArray dd = derivative(v.c[d], d);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += dd[i];
  }
  return out;
}

GradArray Spectral::gradient(const VecArray& v) const {
  GradArray g;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) g.g[3 * a + b] = derivative(v.c[a], b);
  return g;
}

double Spectral::parseval(const Spectrum& F, const std::function<double(double, double, double)>& w) const {
  const int N = grid_.N;
  double s = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < nz_half(); ++k) {
        const double mult = (k == 0 || k == N / 2) ? 1.0 : 2.0;
        s += mult * w(wavenumber(i), wavenumber(j), wavenumber(k)) * std::norm(F[spec_index(i, j, k)]);
      }
  return s * grid_.weight() / static_cast<double>(grid_.size());
}

double Spectral::hm1_norm(const VecArray& v) const {
  double s = 0;
  for (int d = 0; d < 3; ++d)
    s += parseval(forward(v.c[d]), [](double a, double b, double c) { return 1.0 / (1.0 + a * a + b * b + c * c); });
  return std::sqrt(s);
}

}  // namespace dsslab
