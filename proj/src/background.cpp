#include "dsslab/background.hpp"

#include <algorithm>
#include <cmath>

namespace dsslab {

namespace {

// psi(x) = exp(-1/x) for x > 0 with two derivatives.
Jet2 psi(const Jet2& x) {
  if (x.v <= 0) return Jet2(0.0);
  const double e = std::exp(-1.0 / x.v);
  const double x2 = x.v * x.v;
  const double d1 = e / x2;
  const double d2 = e * (1.0 / (x2 * x2) - 2.0 / (x2 * x.v));
  return compose(x, e, d1, d2);
}

}  // namespace

Jet2 smoothstep(double tau) {
  if (tau <= 1) return Jet2(0.0);
  if (tau >= 2) return Jet2(1.0);
  const Jet2 t(tau, 1.0, 0.0);
  const Jet2 a = psi(t - Jet2(1.0));
  const Jet2 b = psi(Jet2(2.0) - t);
  return a / (a + b);
}

CutoffValue cutoff(const Vec3& y, double R0) {
  CutoffValue c;
  const double r = norm(y);
  const double tau = r / R0;
  const Jet2 z = smoothstep(tau);
  c.xi = z.v;
  if (tau > 1 && tau < 2) {
    const double zr = z.d / R0, zrr = z.dd / (R0 * R0);
    c.grad = (zr / r) * y;
    c.lap = zrr + 2.0 * zr / r;
  }
  return c;
}

// ----- HeatBackground -----

HeatBackground::HeatBackground(std::shared_ptr<const ProfileSource> src, const Grid& grid, double period,
                               int slices)
    : src_(std::move(src)), grid_(grid), period_(period) {
  if (!src_) throw ArgumentError("background needs a profile source");
  if (src_->s_independent()) {
    s_ = {0.0};
  } else {
    if (!(period > 0)) throw DomainError("s-dependent background needs a positive period");
    if (slices < 2) throw DomainError("s-dependent background needs at least two slices");
    for (int m = 0; m < slices; ++m) s_.push_back(period * m / slices);
  }
}

VectorField HeatBackground::field(int m) const {
  const double s = s_.at(m);
  auto src = src_;
  Evaluator ev = [src, s](const Vec3& y) { return src->value(y, s); };
  VectorField f = field_from(grid_, ev);
  f.tail = ev;
  f.tail_log_period = src_->log_period();
  f.divergence_free = true;
  return f;
}

double HeatBackground::periodicity_defect() const {
  if (stationary()) return 0.0;
  double d = 0;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const Vec3 y = grid_.point(i);
    d = std::max(d, norm(src_->value(y, 0.0) - src_->value(y, period_)));
  }
  return d;
}

std::vector<double> HeatBackground::tail_function(const std::vector<double>& radii, double q) const {
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] < 0) throw DomainError("negative radius");
    if (radii[i] > grid_.L) throw DomainError("radius beyond the box; the tail rule assumes R <= L");
    if (i > 0 && radii[i] < radii[i - 1]) throw ArgumentError("radii must be increasing");
  }
  std::vector<double> out(radii.size(), 0.0);
  for (int m = 0; m < slices(); ++m) {
    const VectorField f = field(m);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const double R = radii[i];
      auto G = [R, q](const Vec3& y, const Vec3& v) { return norm(y) >= R ? std::pow(norm(v), q) : 0.0; };
      out[i] = std::max(out[i], std::pow(integrate_field(f, G, q), 1.0 / q));
    }
  }
  // Nested domains; enforce monotonicity against rounding.
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = std::min(out[i], out[i - 1]);
  return out;
}

// ----- CutoffBackground -----

namespace {

struct PaddedPoisson {
  Grid inner, outer;
  int off;
  std::unique_ptr<Spectral> sp;
  PaddedPoisson(const Grid& g, int pad) : inner(g), outer(pad * g.L, pad * g.N), off((pad - 1) * g.N / 2) {
    sp = std::make_unique<Spectral>(outer);
  }
  std::size_t outer_index(int i, int j, int k) const { return outer.index(i + off, j + off, k + off); }
};

}  // namespace

CutoffBackground CutoffBackground::zero(const Grid& grid, double period, int slices) {
  CutoffBackground bg;
  bg.grid_ = grid;
  bg.period_ = period;
  bg.zero_ = true;
  bg.R0_ = 1.0;
  bg.delta_ = 1.0;
  const int n = std::max(1, slices);
  for (int m = 0; m < n; ++m) {
    CutoffSlice sl;
    sl.s = period * m / n;
    sl.W = VecArray(grid.size());
    sl.LW = VecArray(grid.size());
    bg.slices_.push_back(std::move(sl));
  }
  return bg;
}

CutoffBackground CutoffBackground::build_fixed(const HeatBackground& U0, double R0, const CutoffOptions& opt) {
  if (!(opt.delta > 0 && opt.delta < 1)) throw ArgumentError("delta must lie in (0, 1)");
  if (opt.pad < 2) throw ArgumentError("zero padding factor must be at least 2");
  const Grid& g = U0.grid();
  if (!(2 * R0 < g.L)) throw DomainError("cutoff transition 2 R0 must lie inside the box");
  CutoffBackground bg;
  bg.grid_ = g;
  bg.R0_ = R0;
  bg.delta_ = opt.delta;
  bg.period_ = U0.period();
  bg.src_ = U0.source_ptr();
  bg.zero_ = U0.source().is_zero();
  const ProfileSource& src = U0.source();
  const int n_sl = U0.slices();
  const std::size_t n = g.size();
  const Spectral sp(g);

  // Cutoff-only part and the divergence source sigma = grad xi . U0 per slice.
  std::vector<VecArray> xiU(n_sl), Lxi(n_sl);
  std::vector<ScalarArray> sigma(n_sl), trace_part(n_sl);
  double sig_max = 0;
  for (int m = 0; m < n_sl; ++m) {
    const double s = U0.slice_time(m);
    xiU[m] = VecArray(n);
    Lxi[m] = VecArray(n);
    sigma[m].assign(n, 0.0);
    trace_part[m].assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 y = g.point(i);
      const CutoffValue c = cutoff(y, R0);
      if (c.xi == 0 && c.lap == 0) continue;
      const Vec3 u = src.value(y, s);
      const Mat3 G = src.grad(y, s);
      xiU[m].set(i, c.xi * u);
      // L(xi U0) = -U0 lap xi - 2 (grad U0) grad xi - (y . grad xi) U0, using L U0 = 0.
      Vec3 gu{0, 0, 0};
      for (int a = 0; a < 3; ++a) gu[a] = G[a][0] * c.grad[0] + G[a][1] * c.grad[1] + G[a][2] * c.grad[2];
      const Vec3 lw = (-c.lap - dot(y, c.grad)) * u - 2.0 * gu;
      Lxi[m].set(i, lw);
      sigma[m][i] = dot(c.grad, u);
      trace_part[m][i] = c.xi * trace(G);
      sig_max = std::max(sig_max, std::abs(sigma[m][i]));
    }
  }

  // Corrector w = grad phi with -Delta phi = sigma on the zero-padded grid.
  std::vector<VecArray> w(n_sl);
  std::vector<VecArray> Lw_part(n_sl);
  std::vector<ScalarArray> divw(n_sl);
  const bool need_corr = sig_max > 0;
  double res_max = 0, corr_max = 0;
  if (need_corr) {
    PaddedPoisson pp(g, opt.pad);
    const Spectral& ps = *pp.sp;
    const std::size_t no = pp.outer.size();
    for (int m = 0; m < n_sl; ++m) {
      ScalarArray src_o(no, 0.0);
      for (int i = 0; i < g.N; ++i)
        for (int j = 0; j < g.N; ++j)
          for (int k = 0; k < g.N; ++k) src_o[pp.outer_index(i, j, k)] = sigma[m][g.index(i, j, k)];
      const ScalarArray phi = ps.apply(src_o, [](double a, double b, double c) -> std::complex<double> {
        const double k2 = a * a + b * b + c * c;
        return k2 == 0 ? 0.0 : 1.0 / k2;
      });
      // Poisson residual on the padded grid.
      const ScalarArray lap = ps.laplacian(phi);
      double mean = 0;
      for (double v : src_o) mean += v;
      mean /= static_cast<double>(no);
      for (std::size_t q = 0; q < no; ++q) res_max = std::max(res_max, std::abs(lap[q] + src_o[q] - mean));
      std::array<ScalarArray, 3> wo;
      for (int d = 0; d < 3; ++d) wo[d] = ps.derivative(phi, d);
      // div w = Delta phi with the full spectral Laplacian, the same operator used for the residual.
      const ScalarArray& div_o = lap;
      // y . grad w and Delta w = -grad sigma on the padded grid.
      VecArray ygw(no), lapw(no);
      std::array<ScalarArray, 3> gsig;
      for (int d = 0; d < 3; ++d) gsig[d] = ps.derivative(src_o, d);
      for (int d = 0; d < 3; ++d) {
        std::array<ScalarArray, 3> dw;
        for (int e = 0; e < 3; ++e) dw[e] = ps.derivative(wo[d], e);
        for (std::size_t q = 0; q < no; ++q) {
          const Vec3 y = pp.outer.point(q);
          ygw.c[d][q] = y[0] * dw[0][q] + y[1] * dw[1][q] + y[2] * dw[2][q];
          lapw.c[d][q] = -gsig[d][q];
        }
      }
      w[m] = VecArray(n);
      Lw_part[m] = VecArray(n);
      divw[m].assign(n, 0.0);
      for (int i = 0; i < g.N; ++i)
        for (int j = 0; j < g.N; ++j)
          for (int k = 0; k < g.N; ++k) {
            const std::size_t qi = g.index(i, j, k), qo = pp.outer_index(i, j, k);
            for (int d = 0; d < 3; ++d) {
              w[m].c[d][qi] = wo[d][qo];
              // -Delta w - w - y . grad w; d_s w is added below.
              Lw_part[m].c[d][qi] = -lapw.c[d][qo] - wo[d][qo] - ygw.c[d][qo];
            }
            divw[m][qi] = div_o[qo];
            corr_max = std::max(corr_max, norm(w[m].at(qi)));
          }
    }
    if (n_sl > 1) {
      const double ds = U0.period() / n_sl;
      for (int m = 0; m < n_sl; ++m) {
        const VecArray& wp = w[(m + 1) % n_sl];
        const VecArray& wm = w[(m + n_sl - 1) % n_sl];
        for (int d = 0; d < 3; ++d)
          for (std::size_t q = 0; q < n; ++q) Lw_part[m].c[d][q] += (wp.c[d][q] - wm.c[d][q]) / (2 * ds);
      }
    }
  }
  bg.poisson_residual_ = res_max;
  bg.corrector_max_ = corr_max;

  const double q = opt.q;
  for (int m = 0; m < n_sl; ++m) {
    CutoffSlice sl;
    sl.s = U0.slice_time(m);
    sl.W = std::move(xiU[m]);
    sl.LW = std::move(Lxi[m]);
    if (need_corr) {
      axpy(1.0, w[m], sl.W);
      axpy(1.0, Lw_part[m], sl.LW);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double dv = sigma[m][i] + trace_part[m][i] + (need_corr ? divw[m][i] : 0.0);
      sl.div_max = std::max(sl.div_max, std::abs(dv));
    }
    bg.slices_.push_back(std::move(sl));
    if (need_corr) bg.corr_.push_back(std::move(w[m]));
  }
  for (int m = 0; m < n_sl; ++m) {
    CutoffSlice& sl = bg.slices_[m];
    const VectorField f = bg.field(m);
    sl.lq = lq_norm(f, q);
    sl.l4 = lq_norm(f, 4.0);
    sl.lw_hm1 = sp.hm1_norm(sl.LW);
  }
  bg.theta_R0_ = U0.tail_function({R0}, q)[0];
  return bg;
}

CutoffBackground CutoffBackground::build(const HeatBackground& U0, const CutoffOptions& opt) {
  std::vector<double> cand = opt.r0_candidates;
  if (cand.empty()) {
    // Dyadic radii whose transition shell [R0, 2 R0] spans enough grid cells.
    const double rmin = std::max(1.0, opt.min_transition_cells * U0.grid().h());
    for (double r = 1; 2 * r < U0.grid().L; r *= 2)
      if (r >= rmin) cand.push_back(r);
  }
  if (cand.empty()) throw DomainError("box too small for any cutoff radius R0 >= 1");
  std::sort(cand.begin(), cand.end());
  double achieved = 0;
  for (double R0 : cand) {
    if (R0 < 1) continue;
    CutoffBackground bg = build_fixed(U0, R0, opt);
    if (bg.sup_lq() <= opt.delta) return bg;
    achieved = bg.sup_lq();
  }
  throw CutoffError("no cutoff radius reaches ||W||_{L^q} <= delta (achieved " + std::to_string(achieved) + ")",
                    achieved);
}

double CutoffBackground::sup_lq() const {
  double v = 0;
  for (const auto& s : slices_) v = std::max(v, s.lq);
  return v;
}
double CutoffBackground::sup_l4() const {
  double v = 0;
  for (const auto& s : slices_) v = std::max(v, s.l4);
  return v;
}
double CutoffBackground::sup_lw_hm1() const {
  double v = 0;
  for (const auto& s : slices_) v = std::max(v, s.lw_hm1);
  return v;
}
double CutoffBackground::sup_div() const {
  double v = 0;
  for (const auto& s : slices_) v = std::max(v, s.div_max);
  return v;
}

std::pair<int, double> CutoffBackground::locate(double s) const {
  const int n = slices();
  if (n == 1) return {0, 0.0};
  double r = std::fmod(s, period_);
  if (r < 0) r += period_;
  const double x = r / period_ * n;
  int m = static_cast<int>(std::floor(x));
  double th = x - m;
  if (m >= n) {
    m = n - 1;
    th = 1.0;
  }
  return {m, th};
}

Vec3 CutoffBackground::eval(const Vec3& y, double s) const {
  if (zero_) return {0, 0, 0};
  const CutoffValue c = cutoff(y, R0_);
  Vec3 out = c.xi == 0 ? Vec3{0, 0, 0} : c.xi * src_->value(y, s);
  if (corr_.empty()) return out;
  // Trilinear interpolation of the corrector inside the box, linear in s.
  const double h = grid_.h();
  double fi[3];
  int i0[3];
  for (int d = 0; d < 3; ++d) {
    const double u = (y[d] + grid_.L) / h;
    if (u < 0 || u > grid_.N - 1) return out;
    i0[d] = std::min(grid_.N - 2, static_cast<int>(std::floor(u)));
    fi[d] = u - i0[d];
  }
  const auto [m, th] = locate(s);
  const int m2 = (m + 1) % slices();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int cc = 0; cc < 2; ++cc) {
        const double wt = (a ? fi[0] : 1 - fi[0]) * (b ? fi[1] : 1 - fi[1]) * (cc ? fi[2] : 1 - fi[2]);
        const std::size_t q = grid_.index(i0[0] + a, i0[1] + b, i0[2] + cc);
        out += (wt * (1 - th)) * corr_[m].at(q);
        if (th > 0) out += (wt * th) * corr_[m2].at(q);
      }
  return out;
}

Mat3 CutoffBackground::eval_grad(const Vec3& y, double s) const {
  Mat3 out = zero_mat();
  if (zero_) return out;
  const CutoffValue c = cutoff(y, R0_);
  if (c.xi != 0) {
    const Vec3 u = src_->value(y, s);
    const Mat3 gu = src_->grad(y, s);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out[i][j] = c.xi * gu[i][j] + u[i] * c.grad[j];
  }
  if (corr_.empty()) return out;
  const double h = grid_.h();
  for (int j = 0; j < 3; ++j) {
    Vec3 yp = y, ym = y;
    yp[j] += 0.5 * h;
    ym[j] -= 0.5 * h;
    const CutoffValue cp = cutoff(yp, R0_), cm = cutoff(ym, R0_);
    const Vec3 ap = cp.xi == 0 ? Vec3{0, 0, 0} : cp.xi * src_->value(yp, s);
    const Vec3 am = cm.xi == 0 ? Vec3{0, 0, 0} : cm.xi * src_->value(ym, s);
    const Vec3 d = (eval(yp, s) - ap) - (eval(ym, s) - am);
    for (int i = 0; i < 3; ++i) out[i][j] += d[i] / h;
  }
  return out;
}

namespace {
VecArray blend(const VecArray& a, const VecArray& b, double th) {
  VecArray out(a.size());
  for (int d = 0; d < 3; ++d)
    for (std::size_t p = 0; p < a.size(); ++p) out.c[d][p] = (1 - th) * a.c[d][p] + th * b.c[d][p];
  return out;
}
}  // namespace

VecArray CutoffBackground::W_at(double s) const {
  const auto [m, th] = locate(s);
  return blend(slices_[m].W, slices_[(m + 1) % slices()].W, th);
}

VecArray CutoffBackground::LW_at(double s) const {
  const auto [m, th] = locate(s);
  return blend(slices_[m].LW, slices_[(m + 1) % slices()].LW, th);
}

VectorField CutoffBackground::field(int m) const {
  VectorField f(grid_);
  f.values = slices_.at(m).W;
  f.divergence_free = true;
  if (!zero_ && src_) {
    auto src = src_;
    const double s = slices_[m].s;
    // Beyond 2 R0 the cutoff is 1; the decaying corrector is neglected outside the box.
    f.tail = [src, s](const Vec3& y) { return src->value(y, s); };
    f.tail_log_period = src_->log_period();
  }
  return f;
}

LwForcing lw_forcing(const CutoffBackground& bg, int slice, const Spectral& sp) {
  if (bg.slices() == 1 && !bg.stationary()) throw DomainError("single slice cannot resolve d/ds");
  if (sp.grid() != bg.grid()) throw ArgumentError("spectral grid mismatch");
  LwForcing out;
  out.LW = bg.slice(slice).LW;
  out.hm1 = sp.hm1_norm(out.LW);
  return out;
}

}  // namespace dsslab
