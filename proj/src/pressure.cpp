#include "dsslab/pressure.hpp"

#include <cmath>
#include <random>

namespace dsslab {

StressFields stress_fields(const GalerkinBasis& basis, const CutoffBackground& W,
                           const std::vector<const CutoffBackground*>& aux, const Eigen::VectorXd& x, double s) {
  const int k = basis.k();
  if (x.size() != k * (1 + static_cast<int>(aux.size()))) throw ArgumentError("state dimension does not match");
  StressFields f;
  f.U = basis.combine(x.data());
  f.Um = basis.combine_molli(x.data());
  f.W = W.W_at(s);
  for (std::size_t n = 0; n < aux.size(); ++n) {
    const double* c = x.data() + (n + 1) * k;
    f.G.push_back(basis.combine(c));
    f.Gm.push_back(basis.combine_molli(c));
    f.E.push_back(aux[n]->W_at(s));
  }
  return f;
}

std::array<ScalarArray, 9> stress_bracket(const StressFields& f) {
  const std::size_t n = f.U.size();
  std::array<ScalarArray, 9> b;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      ScalarArray& out = b[3 * i + j];
      out.assign(n, 0.0);
      for (std::size_t p = 0; p < n; ++p)
        out[p] = f.Um.c[i][p] * f.U.c[j][p] + f.W.c[i][p] * f.U.c[j][p] + f.U.c[i][p] * f.W.c[j][p] +
                 f.W.c[i][p] * f.W.c[j][p];
      for (std::size_t m = 0; m < f.G.size(); ++m) {
        const VecArray &G = f.G[m], &Gm = f.Gm[m], &E = f.E[m];
        for (std::size_t p = 0; p < n; ++p)
          out[p] -= Gm.c[i][p] * G.c[j][p] + E.c[i][p] * G.c[j][p] + G.c[i][p] * E.c[j][p] + E.c[i][p] * E.c[j][p];
      }
    }
  return b;
}

double riesz_pair_multiplier(int i, int j, double kx, double ky, double kz) {
  const double k2 = kx * kx + ky * ky + kz * kz;
  if (k2 == 0) return 0.0;
  const double k[3] = {kx, ky, kz};
  return k[i] * k[j] / k2;
}

PressureField riesz_pressure(const Grid& grid, const std::array<ScalarArray, 9>& bracket, int pad,
                             const std::string& source) {
  if (pad < 1) throw ArgumentError("padding factor must be at least 1");
  const int N = grid.N;
  const Grid gp(pad * grid.L, pad * N);
  const int off = (pad - 1) * N / 2;
  const Spectral sp(gp);
  const int Np = gp.N;

  auto embed = [&](const ScalarArray& f) {
    if (pad == 1) return f;
    ScalarArray out(gp.size(), 0.0);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) out[gp.index(i + off, j + off, k + off)] = f[grid.index(i, j, k)];
    return out;
  };

  std::array<Spectrum, 9> B;
  double bnorm2 = 0;
  for (int c = 0; c < 9; ++c) {
    const ScalarArray e = embed(bracket[c]);
    bnorm2 += inner(gp, e, e);
    B[c] = sp.forward(e);
  }
  Spectrum P(sp.spec_size(), 0.0), DD(sp.spec_size(), 0.0);
  for (int a = 0; a < Np; ++a)
    for (int b = 0; b < Np; ++b)
      for (int c = 0; c < sp.nz_half(); ++c) {
        const double kx = sp.wavenumber(a), ky = sp.wavenumber(b), kz = sp.wavenumber(c);
        const double kk[3] = {kx, ky, kz};
        const std::size_t idx = sp.spec_index(a, b, c);
        std::complex<double> acc = 0.0, dd = 0.0;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            acc -= riesz_pair_multiplier(i, j, kx, ky, kz) * B[3 * i + j][idx];
            dd -= kk[i] * kk[j] * B[3 * i + j][idx];
          }
        P[idx] = acc;
        DD[idx] = dd;
      }
  const ScalarArray pp = sp.backward(P);
  const ScalarArray lap = sp.laplacian(pp);
  const ScalarArray ddb = sp.backward(DD);
  double r2 = 0;
  for (std::size_t q = 0; q < lap.size(); ++q) r2 += (lap[q] + ddb[q]) * (lap[q] + ddb[q]);
  r2 *= gp.weight();

  PressureField out;
  out.grid = grid;
  out.source = source;
  out.pad = pad;
  out.bracket_norm = std::sqrt(bnorm2);
  out.poisson_residual = out.bracket_norm > 0 ? std::sqrt(r2) / out.bracket_norm : std::sqrt(r2);
  out.values.assign(grid.size(), 0.0);
  double mean = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        const double v = pp[gp.index(i + off, j + off, k + off)];
        out.values[grid.index(i, j, k)] = v;
        mean += v;
      }
  mean /= static_cast<double>(grid.size());
  for (double& v : out.values) v -= mean;
  return out;
}

PressureField riesz_pressure(const Grid& grid, const StressFields& f, int pad) {
  return riesz_pressure(grid, stress_bracket(f), pad, f.G.empty() ? "velocity" : "velocity-magnetic");
}

double riesz_idempotence_defect(const Grid& grid) {
  const Spectral sp(grid);
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarArray f(grid.size());
  double mean = 0;
  for (double& v : f) {
    v = u(rng);
    mean += v;
  }
  mean /= static_cast<double>(f.size());
  double fmax = 0;
  for (double& v : f) {
    v -= mean;
    fmax = std::max(fmax, std::abs(v));
  }
  const ScalarArray g = sp.apply(f, [](double a, double b, double c) {
    double s = 0;
    for (int i = 0; i < 3; ++i) s += riesz_pair_multiplier(i, i, a, b, c);
    return std::complex<double>(s, 0.0);
  });
  double d = 0;
  for (std::size_t q = 0; q < f.size(); ++q) d = std::max(d, std::abs(g[q] - f[q]));
  return d / fmax;
}

double box_lq(const Grid& grid, const ScalarArray& f, double q) {
  double s = 0;
  for (double v : f) s += std::pow(std::abs(v), q);
  return std::pow(s * grid.weight(), 1.0 / q);
}

double box_lq(const Grid& grid, const VecArray& f, double q) {
  double s = 0;
  for (std::size_t p = 0; p < f.size(); ++p) s += std::pow(norm(f.at(p)), q);
  return std::pow(s * grid.weight(), 1.0 / q);
}

namespace {

const Eigen::VectorXd& state_at(const OrbitResult& o, double s) {
  const double h = o.s.size() > 1 ? o.s[1] - o.s[0] : 1.0;
  std::size_t i = static_cast<std::size_t>(std::llround(s / h));
  if (i >= o.states.size()) i = o.states.size() - 1;
  return o.states[i];
}

}  // namespace

PressureBoundAudit pressure_bound_audit(const GalerkinBasis& basis, const CutoffBackground& W,
                                        const std::vector<const CutoffBackground*>& aux, const OrbitResult& orbit,
                                        int slices, int pad) {
  if (slices < 1) throw ArgumentError("at least one pressure slice is required");
  if (orbit.states.empty()) throw ArgumentError("orbit has no recorded states");
  const Grid& g = basis.grid;
  const double T = orbit.s.back() - orbit.s.front();
  const double ds = T / slices;
  const double q = 10.0 / 3.0, q53 = 5.0 / 3.0;
  PressureBoundAudit a;
  a.slices = slices;
  double pint = 0, uint = 0, wint = 0;
  std::vector<double> gint(aux.size(), 0.0), eint(aux.size(), 0.0);
  for (int m = 0; m < slices; ++m) {
    const double s = m * ds;
    const StressFields f = stress_fields(basis, W, aux, state_at(orbit, s), s);
    const PressureField p = riesz_pressure(g, f, pad);
    a.max_poisson_residual = std::max(a.max_poisson_residual, p.poisson_residual);
    pint += std::pow(box_lq(g, p.values, q53), q53) * ds;
    uint += std::pow(box_lq(g, f.U, q), q) * ds;
    wint += std::pow(box_lq(g, f.W, q), q) * ds;
    for (std::size_t n = 0; n < aux.size(); ++n) {
      gint[n] += std::pow(box_lq(g, f.G[n], q), q) * ds;
      eint[n] += std::pow(box_lq(g, f.E[n], q), q) * ds;
    }
  }
  a.p_norm = std::pow(pint, 1.0 / q53);
  a.rhs = std::pow(uint, 2.0 / q) + std::pow(wint, 2.0 / q);
  for (std::size_t n = 0; n < aux.size(); ++n) a.rhs += std::pow(gint[n], 2.0 / q) + std::pow(eint[n], 2.0 / q);
  a.ratio = a.rhs > 0 ? a.p_norm / a.rhs : 0.0;

  // Whole-space background norms from the slice values (tail included).
  auto spacetime = [&](const CutoffBackground& b) {
    double acc = 0;
    for (int m = 0; m < b.slices(); ++m) acc += std::pow(b.slice(m).lq, q) * T / b.slices();
    return std::pow(acc, 1.0 / q);
  };
  a.W_norm = spacetime(W);
  a.W_bound = W.delta() * std::pow(T, 0.3);
  a.W_bound_display = W.delta() * std::pow(T, q);
  a.W_ok = a.W_norm <= a.W_bound * (1 + 1e-12);
  for (const auto* b : aux) {
    const double v = spacetime(*b);
    a.aux_norms.push_back(v);
    if (v > b->delta() * std::pow(T, 0.3) * (1 + 1e-12)) a.aux_ok = false;
  }
  return a;
}

InterpolationAudit interpolation_audit(const GalerkinBasis& basis, const OrbitResult& orbit, int stride) {
  if (orbit.states.size() < 2) throw ArgumentError("interpolation audit needs at least two samples");
  if (stride < 1) throw ArgumentError("stride must be positive");
  const Grid& g = basis.grid;
  InterpolationAudit a;
  // Sharp constant of |f|_{L^6} <= C |grad f|_{L^2} in three dimensions.
  a.c_sob = std::pow(std::tgamma(3.0) / std::tgamma(1.5), 1.0 / 3.0) / std::sqrt(3.0 * M_PI);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < orbit.states.size(); i += stride) idx.push_back(i);
  if (idx.back() != orbit.states.size() - 1) idx.push_back(orbit.states.size() - 1);
  std::vector<double> s, l103, l2, g2;
  for (std::size_t i : idx) {
    const double* c = orbit.states[i].data();
    const VecArray U = basis.combine(c);
    const GradArray G = basis.combine_grad(c);
    double gg = 0;
    for (int q = 0; q < 9; ++q)
      for (double v : G.g[q]) gg += v * v;
    gg *= g.weight();
    const double u2 = inner(g, U, U);
    s.push_back(orbit.s[i]);
    l103.push_back(std::pow(box_lq(g, U, 10.0 / 3.0), 10.0 / 3.0));
    l2.push_back(u2);
    g2.push_back(gg);
    a.linf_l2 = std::max(a.linf_l2, std::sqrt(u2));
    if (gg > 0) a.measured_sob = std::max(a.measured_sob, box_lq(g, U, 6.0) / std::sqrt(gg));
  }
  double I103 = 0, Ig = 0, Ih1 = 0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double w = 0.5 * (s[i + 1] - s[i]);
    I103 += w * (l103[i] + l103[i + 1]);
    Ig += w * (g2[i] + g2[i + 1]);
    Ih1 += w * (l2[i] + g2[i] + l2[i + 1] + g2[i + 1]);
  }
  a.lhs = std::pow(I103, 0.3);
  a.l2_h1 = std::sqrt(Ih1);
  a.rhs = std::pow(a.linf_l2, 0.4) * std::pow(a.c_sob * a.c_sob * Ig, 0.3);
  a.ok = a.lhs <= a.rhs * (1 + 1e-9) + 1e-300;
  return a;
}

}  // namespace dsslab
