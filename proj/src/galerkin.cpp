#include "dsslab/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace dsslab {

std::string to_string(System s) {
  switch (s) {
    case System::MHD: return "mhd";
    case System::VNSED: return "vnsed";
    case System::NS: return "ns";
  }
  return "?";
}

System system_from_string(const std::string& s) {
  if (s == "mhd") return System::MHD;
  if (s == "vnsed") return System::VNSED;
  if (s == "ns") return System::NS;
  throw ArgumentError("unknown system '" + s + "'");
}

int aux_count(System s) { return s == System::MHD ? 1 : (s == System::VNSED ? 3 : 0); }

std::string to_string(BasisLayout l) { return l == BasisLayout::Lattice ? "lattice" : "radial"; }

BasisLayout layout_from_string(const std::string& s) {
  if (s == "lattice") return BasisLayout::Lattice;
  if (s == "radial") return BasisLayout::Radial;
  throw ArgumentError("unknown basis layout '" + s + "'");
}

// ---------------------------------------------------------------- mollifier

Mollifier::Mollifier(const Spectral& sp, double eps) : sp_(&sp), eps_(eps) {
  if (!(eps > 0)) throw ArgumentError("mollifier width must be positive");
  const Grid& g = sp.grid();
  const int N = g.N;
  const double h = g.h();
  const int r = static_cast<int>(std::ceil(eps / h));
  if (2 * r + 1 > N) throw ArgumentError("mollifier wider than the grid");
  ScalarArray ker(g.size(), 0.0);
  double sum = 0;
  for (int a = -r; a <= r; ++a)
    for (int b = -r; b <= r; ++b)
      for (int c = -r; c <= r; ++c) {
        const double q = (a * a + b * b + c * c) * h * h / (eps * eps);
        if (q >= 1) continue;
        const double v = std::exp(-1.0 / (1.0 - q));
        ker[g.index((a + N) % N, (b + N) % N, (c + N) % N)] = v;
        sum += v;
      }
  // Unit discrete integral.
  const double scale = 1.0 / (sum * g.weight());
  integral_ = 0;
  for (double& v : ker) {
    v *= scale;
    integral_ += v * g.weight();
  }
  kernel_hat_ = sp.forward(ker);
  for (auto& z : kernel_hat_) z *= g.weight();
}

VecArray Mollifier::apply(const VecArray& v) const {
  VecArray out;
  for (int d = 0; d < 3; ++d) {
    Spectrum F = sp_->forward(v.c[d]);
    for (std::size_t i = 0; i < F.size(); ++i) F[i] *= kernel_hat_[i];
    out.c[d] = sp_->backward(F);
  }
  return out;
}

// ---------------------------------------------------------------- basis

namespace {

std::vector<Vec3> potential_centres(const BasisOptions& opt) {
  std::vector<Vec3> out;
  const double d = opt.spacing;
  if (opt.layout == BasisLayout::Lattice) {
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b)
        for (int c = -1; c <= 1; ++c) out.push_back({a * d, b * d, c * d});
  } else {
    // Origin, then one shell of radius d along axes, body diagonals and face diagonals.
    out.push_back({0, 0, 0});
    for (int a = 0; a < 3; ++a)
      for (int sgn = -1; sgn <= 1; sgn += 2) {
        Vec3 c{0, 0, 0};
        c[a] = sgn * d;
        out.push_back(c);
      }
    const double t = d / std::sqrt(3.0);
    for (int a = -1; a <= 1; a += 2)
      for (int b = -1; b <= 1; b += 2)
        for (int c = -1; c <= 1; c += 2) out.push_back({a * t, b * t, c * t});
    const double u = d / std::sqrt(2.0);
    for (int a = 0; a < 3; ++a)
      for (int sa = -1; sa <= 1; sa += 2)
        for (int sb = -1; sb <= 1; sb += 2) {
          Vec3 c{0, 0, 0};
          c[a] = sa * u;
          c[(a + 1) % 3] = sb * u;
          out.push_back(c);
        }
  }
  // Stable order by radius, ties lexicographic.
  std::stable_sort(out.begin(), out.end(), [](const Vec3& x, const Vec3& y) {
    const double nx = dot(x, x), ny = dot(y, y);
    if (std::abs(nx - ny) > 1e-12) return nx < ny;
    return x < y;
  });
  return out;
}

double inner9(const Grid& g, const GradArray& a, const GradArray& b) {
  double s = 0;
  for (int c = 0; c < 9; ++c)
    for (std::size_t i = 0; i < a.g[c].size(); ++i) s += a.g[c][i] * b.g[c][i];
  return s * g.weight();
}

}  // namespace

GalerkinBasis build_basis(const Spectral& sp, const BasisOptions& opt, double epsilon) {
  if (opt.k < 1) throw ArgumentError("basis size k must be at least 1");
  if (!(opt.sigma > 0)) throw ArgumentError("basis width must be positive");
  const Grid& g = sp.grid();
  const auto centres = potential_centres(opt);
  for (const Vec3& c : centres) {
    const double ext = std::max({std::abs(c[0]), std::abs(c[1]), std::abs(c[2])}) + opt.support * opt.sigma;
    if (ext > g.L) throw ArgumentError("basis potentials do not fit inside the grid");
  }
  GalerkinBasis B;
  B.grid = g;
  B.requested = opt.k;
  B.epsilon = epsilon;
  B.sigma = opt.sigma;
  const std::size_t n = g.size();
  std::vector<Eigen::VectorXd> rows;
  const double inv2s2 = 1.0 / (2 * opt.sigma * opt.sigma);

  std::size_t next = 0;
  while (B.k() < opt.k && next < 3 * centres.size()) {
    const Vec3 c = centres[next / 3];
    const int a = static_cast<int>(next % 3);
    ++next;
    ScalarArray phi(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 d = g.point(i) - c;
      phi[i] = std::exp(-dot(d, d) * inv2s2);
    }
    // curl(phi e_a) = grad(phi) x e_a
    VecArray v(n);
    const int a1 = (a + 1) % 3, a2 = (a + 2) % 3;
    const ScalarArray d1 = sp.derivative(phi, a1);
    const ScalarArray d2 = sp.derivative(phi, a2);
    v.c[a2] = d1;
    for (std::size_t i = 0; i < n; ++i) v.c[a1][i] = -d2[i];
    const double n0 = l2norm(g, v);
    const int r = static_cast<int>(B.raw.size());
    B.raw.push_back({c, a});
    Eigen::VectorXd t = Eigen::VectorXd::Zero(3 * static_cast<int>(centres.size()));
    t[r] = 1.0;
    // Modified Gram-Schmidt, two passes.
    for (int pass = 0; pass < 2; ++pass)
      for (int m = 0; m < B.k(); ++m) {
        const double pr = inner(g, v, B.h[m]);
        axpy(-pr, B.h[m], v);
        t -= pr * rows[m];
      }
    const double n1 = l2norm(g, v);
    if (!(n1 > 1e-8 * n0)) {
      ++B.dropped;
      continue;
    }
    for (auto& comp : v.c)
      for (double& x : comp) x /= n1;
    B.h.push_back(std::move(v));
    rows.push_back(t / n1);
  }
  B.transform = Eigen::MatrixXd::Zero(B.k(), static_cast<int>(B.raw.size()));
  for (int i = 0; i < B.k(); ++i) B.transform.row(i) = rows[i].head(B.raw.size()).transpose();

  const Mollifier mol(sp, epsilon);
  double gram = 0;
  for (int i = 0; i < B.k(); ++i) {
    B.grad.push_back(sp.gradient(B.h[i]));
    B.molli.push_back(mol.apply(B.h[i]));
    B.div_max = std::max(B.div_max, max_abs(sp.divergence(B.h[i])));
    B.molli_div_max = std::max(B.molli_div_max, max_abs(sp.divergence(B.molli[i])));
    for (int j = 0; j < B.k(); ++j) {
      const double e = inner(g, B.h[i], B.h[j]) - (i == j ? 1.0 : 0.0);
      gram += e * e;
    }
  }
  B.gram_residual = std::sqrt(gram);
  return B;
}

VecArray GalerkinBasis::combine(const double* c) const {
  VecArray out(grid.size());
  for (int i = 0; i < k(); ++i)
    if (c[i] != 0) axpy(c[i], h[i], out);
  return out;
}

GradArray GalerkinBasis::combine_grad(const double* c) const {
  GradArray out(grid.size());
  for (int i = 0; i < k(); ++i) {
    if (c[i] == 0) continue;
    for (int q = 0; q < 9; ++q)
      for (std::size_t p = 0; p < out.size(); ++p) out.g[q][p] += c[i] * grad[i].g[q][p];
  }
  return out;
}

VecArray GalerkinBasis::combine_molli(const double* c) const {
  VecArray out(grid.size());
  for (int i = 0; i < k(); ++i)
    if (c[i] != 0) axpy(c[i], molli[i], out);
  return out;
}

Eigen::VectorXd GalerkinBasis::raw_weights(const double* c) const {
  return transform.transpose() * Eigen::Map<const Eigen::VectorXd>(c, k());
}

Vec3 GalerkinBasis::value_at(const double* c, const Vec3& y, Mat3* grad_out) const {
  return raw_value(raw_weights(c), y, grad_out);
}

Vec3 GalerkinBasis::raw_value(const Eigen::VectorXd& wts, const Vec3& y, Mat3* grad_out) const {
  Vec3 out{0, 0, 0};
  if (grad_out) *grad_out = zero_mat();
  const double is2 = 1.0 / (sigma * sigma);
  const int nr = static_cast<int>(raw.size());
  for (int r = 0; r < nr; ++r) {
    const double w = wts[r];
    if (w == 0) continue;
    const Vec3 d = y - raw[r].centre;
    const double phi = std::exp(-0.5 * dot(d, d) * is2);
    if (phi == 0) continue;
    const int a = raw[r].axis, a1 = (a + 1) % 3, a2 = (a + 2) % 3;
    // grad(phi) x e_a: component a2 gets d_{a1} phi, component a1 gets -d_{a2} phi.
    out[a2] += w * (-d[a1] * is2 * phi);
    out[a1] -= w * (-d[a2] * is2 * phi);
    if (grad_out) {
      for (int m = 0; m < 3; ++m) {
        const double h1 = (d[a1] * d[m] * is2 - (a1 == m ? 1.0 : 0.0)) * is2 * phi;
        const double h2 = (d[a2] * d[m] * is2 - (a2 == m ? 1.0 : 0.0)) * is2 * phi;
        (*grad_out)[a2][m] += w * h1;
        (*grad_out)[a1][m] -= w * h2;
      }
    }
  }
  return out;
}

double drift_inner(const GalerkinBasis& basis, int i, int j) {
  const Grid& g = basis.grid;
  const GradArray& G = basis.grad[i];
  const VecArray& hj = basis.h[j];
  double s = 0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Vec3 y = g.point(p);
    for (int a = 0; a < 3; ++a)
      s += (y[0] * G.g[3 * a][p] + y[1] * G.g[3 * a + 1][p] + y[2] * G.g[3 * a + 2][p]) * hj.c[a][p];
  }
  return s * g.weight();
}

double grad_inner(const GalerkinBasis& basis, int i, int j) {
  return inner9(basis.grid, basis.grad[i], basis.grad[j]);
}

// ---------------------------------------------------------------- tables

SliceTables CoeffTables::at(double s) const {
  const int n = static_cast<int>(slices.size());
  if (n == 1) return slices[0];
  double r = std::fmod(s, period);
  if (r < 0) r += period;
  const double x = r / period * n;
  int m = static_cast<int>(std::floor(x));
  double th = x - m;
  if (m >= n) {
    m = n - 1;
    th = 1.0;
  }
  const SliceTables& a = slices[m];
  const SliceTables& b = slices[(m + 1) % n];
  SliceTables out;
  out.s = s;
  out.A = (1 - th) * a.A + th * b.A;
  out.F = (1 - th) * a.F + th * b.F;
  out.D = (1 - th) * a.D + th * b.D;
  for (std::size_t q = 0; q < a.B.size(); ++q) {
    out.B.push_back((1 - th) * a.B[q] + th * b.B[q]);
    out.E.push_back((1 - th) * a.E[q] + th * b.E[q]);
    out.H.push_back((1 - th) * a.H[q] + th * b.H[q]);
  }
  return out;
}

double CoeffTables::dissipation(const Eigen::VectorXd& x) const {
  double s = 0;
  for (int b = 0; b <= naux; ++b) {
    const auto v = x.segment(b * k, k);
    s += v.dot(K * v);
  }
  return s;
}

CoeffTables CoeffTables::linear_only() const {
  CoeffTables t = *this;
  std::fill(t.C.begin(), t.C.end(), 0.0);
  std::fill(t.G.begin(), t.G.end(), 0.0);
  return t;
}

namespace {

// Flattened 3N^3 view of a vector array.
Eigen::VectorXd flatten(const VecArray& v) {
  const std::size_t n = v.size();
  Eigen::VectorXd out(3 * n);
  for (int d = 0; d < 3; ++d)
    for (std::size_t i = 0; i < n; ++i) out[d * n + i] = v.c[d][i];
  return out;
}

// (a . grad f, g) with gradient array of f.
double advect_inner(const Grid& grid, const VecArray& a, const GradArray& gf, const VecArray& g) {
  double s = 0;
  for (std::size_t p = 0; p < grid.size(); ++p)
    for (int r = 0; r < 3; ++r)
      s += (a.c[0][p] * gf.g[3 * r][p] + a.c[1][p] * gf.g[3 * r + 1][p] + a.c[2][p] * gf.g[3 * r + 2][p]) *
           g.c[r][p];
  return s * grid.weight();
}

}  // namespace

CoeffTables assemble_tables(const GalerkinBasis& basis, const CutoffBackground& W,
                            const std::vector<const CutoffBackground*>& aux, System sys) {
  const int naux = aux_count(sys);
  if (static_cast<int>(aux.size()) != naux) throw ArgumentError("wrong number of auxiliary backgrounds for system");
  const Grid& g = basis.grid;
  if (W.grid() != g) throw ArgumentError("background grid does not match basis grid");
  for (const auto* a : aux)
    if (a->grid() != g) throw ArgumentError("auxiliary grid does not match basis grid");
  int M = W.slices();
  for (const auto* a : aux) M = std::max(M, a->slices());
  auto slice_of = [M](const CutoffBackground& b, int m) {
    if (b.slices() == 1) return 0;
    if (b.slices() != M) throw ArgumentError("backgrounds have incompatible slice counts");
    return m;
  };
  slice_of(W, 0);
  for (const auto* a : aux) slice_of(*a, 0);

  const int k = basis.k();
  const std::size_t n = g.size();
  CoeffTables T;
  T.system = sys;
  T.k = k;
  T.naux = naux;
  T.period = W.period();

  // Columns: y, then W and aux fields per slice.
  const int nfield = 1 + naux;
  const int ncol = 1 + nfield * M;
  Eigen::MatrixXd X(3 * n, ncol);
  {
    VecArray y(n);
    for (std::size_t p = 0; p < n; ++p) y.set(p, g.point(p));
    X.col(0) = flatten(y);
  }
  auto field_at = [&](int f, int m) -> const CutoffSlice& {
    const CutoffBackground& b = f == 0 ? W : *aux[f - 1];
    return b.slice(slice_of(b, m));
  };
  for (int m = 0; m < M; ++m)
    for (int f = 0; f < nfield; ++f) X.col(1 + m * nfield + f) = flatten(field_at(f, m).W);

  // P_ij(X) = (h_i . grad h_j, X), R_ij . X = (1/2)[(X.grad h_i, h_j) - (X.grad h_j, h_i)].
  std::vector<Eigen::MatrixXd> P(ncol, Eigen::MatrixXd::Zero(k, k)), R(ncol, Eigen::MatrixXd::Zero(k, k));
  Eigen::VectorXd q(3 * n);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const VecArray& hi = basis.h[i];
      const GradArray& gj = basis.grad[j];
      for (int a = 0; a < 3; ++a)
        for (std::size_t p = 0; p < n; ++p)
          q[a * n + p] = hi.c[0][p] * gj.g[3 * a][p] + hi.c[1][p] * gj.g[3 * a + 1][p] + hi.c[2][p] * gj.g[3 * a + 2][p];
      const Eigen::VectorXd r = (X.transpose() * q) * g.weight();
      for (int c = 0; c < ncol; ++c) P[c](i, j) = r[c];
      if (j <= i) continue;
      const VecArray& hj = basis.h[j];
      const GradArray& gi = basis.grad[i];
      for (int b = 0; b < 3; ++b)
        for (std::size_t p = 0; p < n; ++p) {
          double s = 0;
          for (int a = 0; a < 3; ++a) s += hj.c[a][p] * gi.g[3 * a + b][p] - hi.c[a][p] * gj.g[3 * a + b][p];
          q[b * n + p] = 0.5 * s;
        }
      const Eigen::VectorXd rr = (X.transpose() * q) * g.weight();
      for (int c = 0; c < ncol; ++c) {
        R[c](i, j) = rr[c];
        R[c](j, i) = -rr[c];
      }
    }

  Eigen::MatrixXd K(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) K(i, j) = K(j, i) = grad_inner(basis, i, j);
  T.K = K;
  const Eigen::MatrixXd base = -K - 0.5 * Eigen::MatrixXd::Identity(k, k) + R[0];

  for (int m = 0; m < M; ++m) {
    SliceTables st;
    st.s = field_at(0, m).s;
    const int cw = 1 + m * nfield;
    st.A = base + P[cw] - R[cw];
    st.F = base - P[cw] - R[cw];
    for (int f = 1; f <= naux; ++f) {
      st.B.push_back(-P[cw + f] + R[cw + f]);
      st.E.push_back(P[cw + f] + R[cw + f]);
    }
    // Forcing vectors.
    const VecArray& Wm = field_at(0, m).W;
    const VecArray& LWm = field_at(0, m).LW;
    st.D = Eigen::VectorXd::Zero(k);
    st.H.assign(naux, Eigen::VectorXd::Zero(k));
    for (int j = 0; j < k; ++j) {
      double d = -inner(g, LWm, basis.h[j]) + advect_inner(g, Wm, basis.grad[j], Wm);
      for (int f = 1; f <= naux; ++f) {
        const CutoffSlice& E = field_at(f, m);
        d -= advect_inner(g, E.W, basis.grad[j], E.W);
        st.H[f - 1][j] = -inner(g, E.LW, basis.h[j]) + advect_inner(g, Wm, basis.grad[j], E.W) -
                         advect_inner(g, E.W, basis.grad[j], Wm);
      }
      st.D[j] = d;
    }
    T.slices.push_back(std::move(st));
  }

  // C_ilj = -(1/2)[((eta*h_i).grad h_l, h_j) - ((eta*h_i).grad h_j, h_l)].
  std::vector<double> raw(static_cast<std::size_t>(k) * k * k, 0.0);
  Eigen::MatrixXd H(3 * n, k);
  for (int j = 0; j < k; ++j) H.col(j) = flatten(basis.h[j]);
  for (int i = 0; i < k; ++i)
    for (int l = 0; l < k; ++l) {
      const VecArray& a = basis.molli[i];
      const GradArray& gl = basis.grad[l];
      for (int r = 0; r < 3; ++r)
        for (std::size_t p = 0; p < n; ++p)
          q[r * n + p] = a.c[0][p] * gl.g[3 * r][p] + a.c[1][p] * gl.g[3 * r + 1][p] + a.c[2][p] * gl.g[3 * r + 2][p];
      const Eigen::VectorXd r = (H.transpose() * q) * g.weight();
      for (int j = 0; j < k; ++j) raw[(static_cast<std::size_t>(i) * k + l) * k + j] = r[j];
    }
  T.C.assign(raw.size(), 0.0);
  T.G.assign(raw.size(), 0.0);
  for (int i = 0; i < k; ++i)
    for (int l = 0; l < k; ++l)
      for (int j = 0; j < k; ++j) {
        const std::size_t a = (static_cast<std::size_t>(i) * k + l) * k + j;
        const std::size_t b = (static_cast<std::size_t>(i) * k + j) * k + l;
        T.C[a] = -0.5 * (raw[a] - raw[b]);
      }
  for (int i = 0; i < k; ++i)
    for (int l = 0; l < k; ++l)
      for (int j = 0; j < k; ++j) T.G[(static_cast<std::size_t>(i) * k + l) * k + j] = T.c(i, l, j) - T.c(l, i, j);
  return T;
}

// ---------------------------------------------------------------- right-hand side

namespace {

// out_j += sign * sum_{i,l} Q(i,l,j) u_i v_l
void contract(const std::vector<double>& Q, int k, const double* u, const double* v, double sign, double* out) {
  for (int i = 0; i < k; ++i) {
    if (u[i] == 0) continue;
    for (int l = 0; l < k; ++l) {
      const double w = sign * u[i] * v[l];
      if (w == 0) continue;
      const double* row = &Q[(static_cast<std::size_t>(i) * k + l) * k];
      for (int j = 0; j < k; ++j) out[j] += w * row[j];
    }
  }
}

void check_dim(const Eigen::VectorXd& x, const CoeffTables& tab) {
  if (x.size() != tab.dim()) throw ArgumentError("state dimension does not match the tables");
}

}  // namespace

Eigen::VectorXd rhs_quadratic(const Eigen::VectorXd& x, const CoeffTables& tab) {
  check_dim(x, tab);
  const int k = tab.k;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  const double* mu = x.data();
  contract(tab.C, k, mu, mu, 1.0, out.data());
  for (int n = 0; n < tab.naux; ++n) {
    const double* ga = x.data() + (n + 1) * k;
    contract(tab.C, k, ga, ga, -1.0, out.data());
    contract(tab.G, k, mu, ga, 1.0, out.data() + (n + 1) * k);
  }
  return out;
}

Eigen::VectorXd rhs(const Eigen::VectorXd& x, const SliceTables& t, const CoeffTables& tab) {
  Eigen::VectorXd out = rhs_quadratic(x, tab);
  const int k = tab.k;
  const auto mu = x.segment(0, k);
  out.segment(0, k) += t.A.transpose() * mu + t.D;
  for (int n = 0; n < tab.naux; ++n) {
    const auto ga = x.segment((n + 1) * k, k);
    out.segment(0, k) += t.B[n].transpose() * ga;
    out.segment((n + 1) * k, k) += t.E[n].transpose() * mu + t.F.transpose() * ga + t.H[n];
  }
  return out;
}

Eigen::VectorXd rhs(const Eigen::VectorXd& x, double s, const CoeffTables& tab) {
  return rhs(x, tab.at(s), tab);
}

double cubic_energy_contribution(const Eigen::VectorXd& x, const CoeffTables& tab) {
  return 2.0 * x.dot(rhs_quadratic(x, tab));
}

double decay_rate(System sys) { return sys == System::VNSED ? 1.0 / 64.0 : 1.0 / 16.0; }

double forcing_norm_c2(const CutoffBackground& W, const std::vector<const CutoffBackground*>& aux, System sys) {
  double hm = W.sup_lw_hm1() * W.sup_lw_hm1();
  double l4 = W.sup_l4() * W.sup_l4();
  for (const auto* a : aux) {
    hm += a->sup_lw_hm1() * a->sup_lw_hm1();
    l4 += a->sup_l4() * a->sup_l4();
  }
  const double pre = sys == System::VNSED ? 32.0 : 8.0;
  return pre * (hm + l4 * l4);
}

// ---------------------------------------------------------------- field-space energy identity

EnergyTerms energy_identity_field(const GalerkinBasis& basis, const CutoffBackground& W,
                                  const std::vector<const CutoffBackground*>& aux, const Eigen::VectorXd& x,
                                  double s) {
  const Grid& g = basis.grid;
  const int k = basis.k();
  const int naux = static_cast<int>(aux.size());
  if (x.size() != k * (1 + naux)) throw ArgumentError("state dimension does not match the basis");

  const VecArray Wf = W.W_at(s), LWf = W.LW_at(s);
  std::vector<VecArray> Ef, LEf;
  for (const auto* a : aux) {
    Ef.push_back(a->W_at(s));
    LEf.push_back(a->LW_at(s));
  }
  const VecArray U = basis.combine(x.data());
  const GradArray gU = basis.combine_grad(x.data());
  std::vector<VecArray> Gm;
  std::vector<GradArray> gG;
  for (int m = 0; m < naux; ++m) {
    Gm.push_back(basis.combine(x.data() + (m + 1) * k));
    gG.push_back(basis.combine_grad(x.data() + (m + 1) * k));
  }

  EnergyTerms e;
  e.energy = inner(g, U, U);
  e.dissipation = inner9(g, gU, gU);
  for (int m = 0; m < naux; ++m) {
    e.energy += inner(g, Gm[m], Gm[m]);
    e.dissipation += inner9(g, gG[m], gG[m]);
  }
  double half = -e.dissipation - 0.5 * e.energy;
  half += advect_inner(g, U, gU, Wf);
  half += -inner(g, LWf, U) + advect_inner(g, Wf, gU, Wf);
  for (int m = 0; m < naux; ++m) {
    half += -advect_inner(g, Gm[m], gU, Ef[m]) + advect_inner(g, U, gG[m], Ef[m]) -
            advect_inner(g, Gm[m], gG[m], Wf);
    half += -advect_inner(g, Ef[m], gU, Ef[m]);
    half += -inner(g, LEf[m], Gm[m]) + advect_inner(g, Wf, gG[m], Ef[m]) - advect_inner(g, Ef[m], gG[m], Wf);
  }
  e.dEds = 2.0 * half;
  return e;
}

// ---------------------------------------------------------------- cache

namespace {
constexpr char kMagic[4] = {'D', 'S', 'S', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_mat(std::ofstream& os, const Eigen::MatrixXd& m) {
  os.write(reinterpret_cast<const char*>(m.data()), sizeof(double) * m.size());
}
void get_mat(std::ifstream& is, Eigen::MatrixXd& m, int r, int c) {
  m.resize(r, c);
  is.read(reinterpret_cast<char*>(m.data()), sizeof(double) * m.size());
}
}  // namespace

void save_tables(const std::string& path, const CoeffTables& t, const std::string& key) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ArgumentError("cannot write table cache " + path);
  os.write(kMagic, 4);
  os.write(reinterpret_cast<const char*>(&kVersion), 4);
  const std::uint32_t klen = static_cast<std::uint32_t>(key.size());
  os.write(reinterpret_cast<const char*>(&klen), 4);
  os.write(key.data(), klen);
  const std::int32_t hdr[4] = {static_cast<std::int32_t>(t.system), t.k, t.naux,
                               static_cast<std::int32_t>(t.slices.size())};
  os.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
  os.write(reinterpret_cast<const char*>(&t.period), sizeof(double));
  put_mat(os, t.K);
  os.write(reinterpret_cast<const char*>(t.C.data()), sizeof(double) * t.C.size());
  os.write(reinterpret_cast<const char*>(t.G.data()), sizeof(double) * t.G.size());
  for (const auto& s : t.slices) {
    os.write(reinterpret_cast<const char*>(&s.s), sizeof(double));
    put_mat(os, s.A);
    put_mat(os, s.F);
    put_mat(os, s.D);
    for (int n = 0; n < t.naux; ++n) {
      put_mat(os, s.B[n]);
      put_mat(os, s.E[n]);
      put_mat(os, s.H[n]);
    }
  }
}

bool load_tables(const std::string& path, const std::string& key, CoeffTables& out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  char magic[4];
  std::uint32_t ver = 0, klen = 0;
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(&ver), 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0 || ver != kVersion) return false;
  is.read(reinterpret_cast<char*>(&klen), 4);
  if (klen > (1u << 20)) return false;
  std::string stored(klen, '\0');
  is.read(stored.data(), klen);
  if (stored != key) return false;
  std::int32_t hdr[4];
  is.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
  if (!is || hdr[0] < 0 || hdr[0] > 2 || hdr[1] <= 0 || hdr[1] > 256 || hdr[2] < 0 || hdr[2] > 3 || hdr[3] <= 0 ||
      hdr[3] > 4096)
    return false;
  CoeffTables t;
  t.system = static_cast<System>(hdr[0]);
  t.k = hdr[1];
  t.naux = hdr[2];
  is.read(reinterpret_cast<char*>(&t.period), sizeof(double));
  get_mat(is, t.K, t.k, t.k);
  const std::size_t k3 = static_cast<std::size_t>(t.k) * t.k * t.k;
  t.C.resize(k3);
  t.G.resize(k3);
  is.read(reinterpret_cast<char*>(t.C.data()), sizeof(double) * k3);
  is.read(reinterpret_cast<char*>(t.G.data()), sizeof(double) * k3);
  for (int m = 0; m < hdr[3]; ++m) {
    SliceTables s;
    is.read(reinterpret_cast<char*>(&s.s), sizeof(double));
    get_mat(is, s.A, t.k, t.k);
    get_mat(is, s.F, t.k, t.k);
    Eigen::MatrixXd d;
    get_mat(is, d, t.k, 1);
    s.D = d.col(0);
    for (int n = 0; n < t.naux; ++n) {
      Eigen::MatrixXd b, e, h;
      get_mat(is, b, t.k, t.k);
      get_mat(is, e, t.k, t.k);
      get_mat(is, h, t.k, 1);
      s.B.push_back(b);
      s.E.push_back(e);
      s.H.push_back(h.col(0));
    }
    t.slices.push_back(std::move(s));
  }
  if (!is) return false;
  out = std::move(t);
  return true;
}

}  // namespace dsslab
