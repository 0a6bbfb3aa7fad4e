#include "dsslab/fields_norms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "dsslab/quadrature.hpp"

namespace dsslab {

VectorField field_from(const Grid& grid, const Evaluator& f) {
  VectorField out(grid);
  out.values = sample(grid, f);
  return out;
}

namespace {

// Grid points with |n - n_origin|_inf <= kExclude are replaced by exact quadrature for singular fields.
constexpr int kExclude = 3;

int exclusion_radius(const VectorField& f) {
  if (!f.origin_eval) return -1;
  return f.grid.N / 2 >= kExclude + 2 ? kExclude : 0;
}

double exclusion_half_width(const VectorField& f) { return (exclusion_radius(f) + 0.5) * f.grid.h(); }

// Trapezoidal rule on the closed cube [-L, L]^3. Index N along an axis is the virtual plane y = +L,
// filled from the tail when known and by periodic wrap otherwise. Excluded points get weight 0.
template <class F>
void for_each_quad_point(const VectorField& f, F&& fn) {
  const Grid& g = f.grid;
  const int N = g.N;
  const double h = g.h();
  const int m = exclusion_radius(f);
  auto wt = [&](int i) { return (i == 0 || i == N) ? 0.5 * h : h; };
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= N; ++j)
      for (int k = 0; k <= N; ++k) {
        const Vec3 y{g.coord(i), g.coord(j), g.coord(k)};
        Vec3 v;
        if (i == N || j == N || k == N) {
          v = f.tail ? f.tail(y) : f.values.at(g.index(i % N, j % N, k % N));
        } else {
          v = f.values.at(g.index(i, j, k));
        }
        const bool excluded =
            m >= 0 && std::max({std::abs(i - N / 2), std::abs(j - N / 2), std::abs(k - N / 2)}) <= m;
        fn(i, j, k, y, v, excluded ? 0.0 : wt(i) * wt(j) * wt(k));
      }
}

// Integral of G(y, f(y)) over the excluded cube around a singular origin.
double origin_cell(const VectorField& f, const std::function<double(const Vec3& y, const Vec3& v)>& G) {
  if (!f.origin_eval) return 0.0;
  return cube_interior_integral([&](const Vec3& y) { return G(y, f.origin_eval(y)); }, exclusion_half_width(f));
}

double tail_beta_integral(const VectorField& f, double beta,
                          const std::function<double(const Vec3& y, const Vec3& v)>& G) {
  if (!f.tail) return 0.0;
  return cube_exterior_integral([&](const Vec3& y) { return G(y, f.tail(y)); }, f.grid.L, beta,
                                f.tail_log_period);
}

// P(c1 U1 + ... + ck Uk > t) for independent U_i ~ U(0,1).
double uniform_sum_tail(const double* c, int k, double t) {
  double total = 0;
  for (int i = 0; i < k; ++i) total += c[i];
  if (t <= 0) return 1.0;
  if (t >= total) return 0.0;
  double prod = 1;
  double fact = 1;
  for (int i = 0; i < k; ++i) {
    prod *= c[i];
    fact *= (i + 1);
  }
  double cdf = 0;
  for (int mask = 0; mask < (1 << k); ++mask) {
    double shift = 0;
    int bits = 0;
    for (int i = 0; i < k; ++i)
      if (mask & (1 << i)) {
        shift += c[i];
        ++bits;
      }
    const double x = t - shift;
    if (x > 0) cdf += ((bits & 1) ? -1.0 : 1.0) * (k == 1 ? x : k == 2 ? x * x : x * x * x);
  }
  cdf /= fact * prod;
  return std::clamp(1.0 - cdf, 0.0, 1.0);
}

}  // namespace

double integrate_field(const VectorField& f, const std::function<double(const Vec3& y, const Vec3& v)>& G,
                       double tail_beta) {
  double s = 0;
  for_each_quad_point(f, [&](int, int, int, const Vec3& y, const Vec3& v, double w) {
    if (w > 0) s += w * G(y, v);
  });
  s += origin_cell(f, G);
  if (tail_beta > 3) s += tail_beta_integral(f, tail_beta, G);
  return s;
}

// ----- generators -----

HomogeneousData make_homogeneous_data(unsigned long long angular_seed, double c0, const Grid& grid) {
  if (c0 < 0) throw ArgumentError("amplitude must be nonnegative");
  HomogeneousData out;
  if (angular_seed == 0) {
    out.swirl = SwirlData::canonical(c0);
  } else {
    std::mt19937_64 rng(angular_seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ud(0.2, 1.0);
    const int terms = 1 + static_cast<int>(angular_seed % 3);
    std::vector<double> w(terms);
    for (auto& x : w) x = ud(rng);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    for (int a = 0; a < terms; ++a) {
      Vec3 n{nd(rng), nd(rng), nd(rng)};
      n = (1.0 / norm(n)) * n;
      const double sign = (rng() & 1u) ? 1.0 : -1.0;
      out.swirl.terms.push_back({n, sign * c0 * w[a] / sum, 0.0, 0.0});
    }
  }
  const SwirlData sd = out.swirl;
  auto eval = [sd](const Vec3& x) { return sd.value(x); };
  out.field = field_from(grid, eval);
  // Cell average of an odd field over the origin cell.
  out.field.values.set(grid.origin_index(), {0, 0, 0});
  if (!sd.is_zero()) {
    out.field.tail = eval;
    out.field.origin_eval = eval;
  }
  out.field.divergence_free = true;
  return out;
}

SwirlData make_swirl_dss(unsigned long long seed, double c0, double lambda, double mod_amp) {
  if (!(lambda > 1)) throw DomainError("DSS data needs lambda > 1");
  SwirlData d;
  d.log_period = std::log(lambda);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2 * M_PI);
  Vec3 n{0, 0, 1};
  if (seed != 0) {
    n = {nd(rng), nd(rng), nd(rng)};
    n = (1.0 / norm(n)) * n;
  }
  const double ph = seed == 0 ? 0.0 : phase(rng);
  d.terms.push_back({n, c0 / (1.0 + mod_amp), mod_amp, ph});
  return d;
}

DssData make_dss_data(const AnnulusProfile& profile, double lambda, const Grid& grid) {
  if (!(lambda > 1)) throw DomainError("DSS extension needs lambda > 1");
  if (!(profile.r_inner > 0) || profile.r_outer < lambda * profile.r_inner * (1 - 1e-12))
    throw ArgumentError("annulus profile must cover r_inner <= |x| < lambda r_inner");
  DssData out;
  const double logl = std::log(lambda);
  const double r_in = profile.r_inner;
  const Evaluator prof = profile.eval;
  out.eval = [prof, logl, r_in, lambda](const Vec3& x) -> Vec3 {
    const double r = norm(x);
    if (r == 0) return {0, 0, 0};
    const double k = std::floor(std::log(r / r_in) / logl);
    const double sc = std::pow(lambda, -k);
    Vec3 xs = sc * x;
    // Guard the shell boundary against rounding in the logarithm.
    const double rs = norm(xs);
    double extra = 1.0;
    if (rs < r_in) {
      xs = lambda * xs;
      extra = lambda;
    } else if (rs >= lambda * r_in) {
      xs = (1.0 / lambda) * xs;
      extra = 1.0 / lambda;
    }
    return (sc * extra) * prof(xs);
  };
  out.field = field_from(grid, out.eval);
  out.field.values.set(grid.origin_index(), {0, 0, 0});
  out.field.tail = out.eval;
  out.field.tail_log_period = logl;
  out.field.origin_eval = out.eval;
  return out;
}

// ----- norms -----

WeakNormResult weak_l3_norm(const VectorField& f) {
  const Grid& g = f.grid;
  const int N = g.N;
  const int M = N + 1;
  const double h = g.h();
  // |f| on the closed lattice; excluded points keep their samples for the difference stencils.
  std::vector<double> a(static_cast<std::size_t>(M) * M * M), w(a.size());
  auto q = [M](int i, int j, int k) { return (static_cast<std::size_t>(i) * M + j) * M + k; };
  double boundary_max = 0, interior_max = 0;
  for_each_quad_point(f, [&](int i, int j, int k, const Vec3& y, const Vec3& v, double wt) {
    const double av = norm(v);
    a[q(i, j, k)] = av;
    w[q(i, j, k)] = wt;
    const double ym = std::max({std::abs(y[0]), std::abs(y[1]), std::abs(y[2])});
    if (ym >= g.L - 1e-12) boundary_max = std::max(boundary_max, av);
    if (wt > 0) interior_max = std::max(interior_max, av);
  });
  WeakNormResult res;
  if (!f.tail && boundary_max > 1e-3 * interior_max) res.warning = true;

  // Each cell carries the value distribution of the local linear model of |f| over the cell.
  struct Cell {
    double v, w;
    double c[3];
    int k;
  };
  std::vector<Cell> cells;
  cells.reserve(a.size());
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= N; ++j)
      for (int k = 0; k <= N; ++k) {
        const std::size_t id = q(i, j, k);
        if (w[id] == 0) continue;
        const int ix[3] = {i, j, k};
        Cell c{a[id], w[id], {0, 0, 0}, 0};
        double gmax = 0, gs[3];
        // Minmod slope: jumps stay sharp, smooth profiles get their local spread.
        for (int d = 0; d < 3; ++d) {
          int lo[3] = {i, j, k}, hi[3] = {i, j, k};
          lo[d] = std::max(0, ix[d] - 1);
          hi[d] = std::min(N, ix[d] + 1);
          const double dl = a[id] - a[q(lo[0], lo[1], lo[2])];
          const double dr = a[q(hi[0], hi[1], hi[2])] - a[id];
          if (lo[d] == ix[d]) gs[d] = std::abs(dr);
          else if (hi[d] == ix[d]) gs[d] = std::abs(dl);
          else gs[d] = dl * dr > 0 ? std::min(std::abs(dl), std::abs(dr)) : 0.0;
          gmax = std::max(gmax, gs[d]);
        }
        for (int d = 0; d < 3; ++d)
          if (gs[d] > 1e-6 * gmax) c.c[c.k++] = gs[d];
        cells.push_back(c);
      }
  auto mu_box = [&](double alpha) {
    double m = 0;
    for (const Cell& c : cells) {
      double tot = 0;
      for (int d = 0; d < c.k; ++d) tot += c.c[d];
      // Values span v - tot/2 .. v + tot/2.
      const double t = alpha - (c.v - 0.5 * tot);
      m += c.w * (c.k == 0 ? (c.v > alpha ? 1.0 : 0.0) : uniform_sum_tail(c.c, c.k, t));
    }
    return m;
  };

  // Exact distribution on the excluded origin cube: |f(tau p)| sampled along face rays.
  const int n_tau = 128;
  std::vector<std::pair<double, double>> ray;  // (|f|, measure weight)
  if (f.origin_eval) {
    const double ah = exclusion_half_width(f);
    const GaussRule& gr = gauss_legendre(16);
    for (int axis = 0; axis < 3; ++axis)
      for (int sgn = -1; sgn <= 1; sgn += 2)
        for (int i = 0; i < 16; ++i)
          for (int j = 0; j < 16; ++j) {
            Vec3 p{0, 0, 0};
            p[axis] = sgn * ah;
            p[(axis + 1) % 3] = ah * gr.x[i];
            p[(axis + 2) % 3] = ah * gr.x[j];
            const double wf = gr.w[i] * gr.w[j] * ah * ah * ah;
            for (int m = 0; m < n_tau; ++m) {
              const double tau = (m + 0.5) / n_tau;
              ray.emplace_back(norm(f.origin_eval(tau * p)), wf * tau * tau / n_tau);
            }
          }
    std::sort(ray.begin(), ray.end(), [](auto& x, auto& y) { return x.first > y.first; });
    double acc = 0;
    for (auto& e : ray) e.second = (acc += e.second);
  }
  auto mu_origin = [&](double alpha) {
    auto it = std::lower_bound(ray.begin(), ray.end(), alpha,
                               [](const std::pair<double, double>& e, double x) { return e.first > x; });
    return it == ray.begin() ? 0.0 : std::prev(it)->second;
  };

  // Angular envelope of the tail on the cube surface: |f(tau p)| <= F(p)/tau.
  std::vector<std::pair<double, double>> face;
  if (f.tail) {
    const GaussRule& gr = gauss_legendre(16);
    const double L = g.L;
    const int n_per = f.tail_log_period > 0 ? 16 : 1;
    for (int axis = 0; axis < 3; ++axis)
      for (int sgn = -1; sgn <= 1; sgn += 2)
        for (int i = 0; i < 16; ++i)
          for (int j = 0; j < 16; ++j) {
            Vec3 p{0, 0, 0};
            p[axis] = sgn * L;
            p[(axis + 1) % 3] = L * gr.x[i];
            p[(axis + 2) % 3] = L * gr.x[j];
            double F = 0;
            for (int m = 0; m < n_per; ++m) {
              const double tau = std::exp(f.tail_log_period * m / n_per);
              F = std::max(F, tau * norm(f.tail(tau * p)));
            }
            face.emplace_back(F, gr.w[i] * gr.w[j] * L * L * L);
          }
  }
  auto mu_tail = [&](double alpha) {
    double m = 0;
    for (const auto& [F, wf] : face) {
      const double r = F / alpha;
      if (r > 1) m += wf * (r * r * r - 1) / 3.0;
    }
    return m;
  };

  double top = interior_max;
  if (!ray.empty()) top = std::max(top, ray.front().first);
  if (!(top > 0)) return res;
  // Level sets smaller than a ball of radius 2h are not resolved by the lattice.
  const double v_res = 4.0 * M_PI / 3.0 * std::pow(2 * h, 3);
  auto score = [&](double alpha) {
    const double mu = mu_box(alpha) + mu_origin(alpha) + mu_tail(alpha);
    return mu >= v_res ? alpha * std::cbrt(mu) : 0.0;
  };
  double best = 0, a_best = 0;
  const int n_alpha = 120;
  const double decades = 6.0;
  for (int s = 0; s <= n_alpha; ++s) {
    const double alpha = top * std::pow(10.0, -decades * s / n_alpha);
    const double v = score(alpha);
    if (v > best) {
      best = v;
      a_best = alpha;
    }
  }
  // Refine between the neighbouring coarse levels.
  if (a_best > 0) {
    const double step = std::pow(10.0, decades / n_alpha);
    for (int s = -16; s <= 16; ++s) best = std::max(best, score(a_best * std::pow(step, s / 16.0)));
  }
  res.value = best;
  return res;
}

double morrey_norm(const VectorField& f, int center_stride) {
  const Grid& g = f.grid;
  const int N = g.N;
  const double h = g.h();
  if (center_stride <= 0) center_stride = std::max(1, N / 8);
  const int M = N + 1;
  std::vector<double> sq(static_cast<std::size_t>(M) * M * M, 0.0);
  std::vector<double> wq(sq.size(), 0.0);
  auto qidx = [M](int i, int j, int k) { return (static_cast<std::size_t>(i) * M + j) * M + k; };
  for_each_quad_point(f, [&](int i, int j, int k, const Vec3&, const Vec3& v, double w) {
    sq[qidx(i, j, k)] = dot(v, v);
    wq[qidx(i, j, k)] = w;
  });
  const double ah = f.origin_eval ? exclusion_half_width(f) : 0.0;
  std::vector<int> centers;
  for (int i = (N / 2) % center_stride; i <= N; i += center_stride) centers.push_back(i);
  double best = 0;
  for (int ci : centers)
    for (int cj : centers)
      for (int ck : centers) {
        const Vec3 c{g.coord(ci), g.coord(cj), g.coord(ck)};
        const double cmax = std::max({std::abs(c[0]), std::abs(c[1]), std::abs(c[2])});
        const double rmax = g.L - cmax;
        // Radii resolved by at least four cells; the ball indicator is smoothed over one cell.
        std::vector<double> radii;
        for (double r = 4 * h; r <= rmax + 1e-12; r *= 2) radii.push_back(r);
        if (radii.empty()) continue;
        std::vector<double> acc(radii.size(), 0.0);
        const double R = radii.back() + h;
        const int span = static_cast<int>(std::ceil(R / h));
        for (int i = std::max(0, ci - span); i <= std::min(N, ci + span); ++i)
          for (int j = std::max(0, cj - span); j <= std::min(N, cj + span); ++j)
            for (int k = std::max(0, ck - span); k <= std::min(N, ck + span); ++k) {
              const std::size_t id = qidx(i, j, k);
              if (wq[id] == 0) continue;
              const double dx = (i - ci) * h, dy = (j - cj) * h, dz = (k - ck) * h;
              const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
              for (std::size_t r = 0; r < radii.size(); ++r) {
                const double chi = std::clamp((radii[r] - d) / h + 0.5, 0.0, 1.0);
                acc[r] += chi * wq[id] * sq[id];
              }
            }
        for (std::size_t r = 0; r < radii.size(); ++r) {
          double total = acc[r];
          if (f.origin_eval && norm(c) < radii[r] + ah * std::sqrt(3.0)) {
            const double rr = radii[r];
            total += cube_interior_integral(
                [&](const Vec3& y) {
                  const Vec3 v = f.origin_eval(y);
                  return norm(y - c) <= rr ? dot(v, v) : 0.0;
                },
                ah);
          }
          best = std::max(best, std::sqrt(total / radii[r]));
        }
      }
  return best;
}

double weighted_l2_norm(const VectorField& f) {
  auto G = [](const Vec3& y, const Vec3& v) {
    const double d = 1.0 + norm(y);
    return dot(v, v) / (d * d * d);
  };
  return std::sqrt(integrate_field(f, G, 5.0));
}

double l2_ball_norm(const VectorField& f, double M) {
  if (M > f.grid.L) throw DomainError("ball radius exceeds the box");
  auto G = [M](const Vec3& y, const Vec3& v) { return norm(y) <= M ? dot(v, v) : 0.0; };
  return std::sqrt(integrate_field(f, G, 0.0));
}

double lq_norm(const VectorField& f, double q) {
  if (!(q >= 1)) throw ArgumentError("q must be >= 1");
  auto G = [q](const Vec3&, const Vec3& v) { return std::pow(norm(v), q); };
  return std::pow(integrate_field(f, G, q), 1.0 / q);
}

std::vector<NamedField> embedding_corpus(const Grid& grid) {
  std::vector<NamedField> out;
  auto singular = [&](const std::string& name, const Evaluator& ev, double log_period) {
    VectorField f = field_from(grid, ev);
    f.values.set(grid.origin_index(), {0, 0, 0});
    f.tail = ev;
    f.origin_eval = ev;
    f.tail_log_period = log_period;
    out.push_back({name, std::move(f)});
  };
  singular("inverse_radial", [](const Vec3& x) { const double r = norm(x); return Vec3{r > 0 ? 1.0 / r : 0.0, 0, 0}; },
           0.0);
  for (unsigned seed = 0; seed < 5; ++seed) {
    const HomogeneousData d = make_homogeneous_data(seed, 1.0, grid);
    out.push_back({"homogeneous_" + std::to_string(seed), d.field});
  }
  for (unsigned seed = 1; seed <= 2; ++seed) {
    const SwirlData sd = make_swirl_dss(seed, 1.0, 2.0);
    singular("dss_" + std::to_string(seed), [sd](const Vec3& x) { return sd.value(x); }, sd.log_period);
  }
  auto gauss = [](const Vec3& x) {
    const double e = std::exp(-dot(x, x));
    return Vec3{e, e, 0};
  };
  out.push_back({"gaussian", field_from(grid, gauss)});
  const SwirlData c = SwirlData::canonical(1.0);
  singular("swirl_plus_gaussian", [c, gauss](const Vec3& x) { return c.value(x) + gauss(x); }, 0.0);
  // The Gaussian part decays faster than the tail rule assumes; its exterior mass is below 1e-15.
  return out;
}

EmbeddingAudit embedding_audit(const Grid& grid, double ball_radius) {
  EmbeddingAudit a;
  a.k_morrey = std::sqrt(3.0 * std::cbrt(4.0 * M_PI / 3.0));
  a.k_weighted = 1.0 / std::sqrt(2.0);
  for (const NamedField& nf : embedding_corpus(grid)) {
    EmbeddingRow r;
    r.name = nf.name;
    const WeakNormResult w = weak_l3_norm(nf.field);
    r.weak_l3 = w.value;
    r.weak_warning = w.warning;
    r.morrey = morrey_norm(nf.field);
    r.weighted_l2 = weighted_l2_norm(nf.field);
    r.ball_radius = ball_radius;
    r.ball_l2 = l2_ball_norm(nf.field, ball_radius);
    const bool finite = std::isfinite(r.weak_l3) && std::isfinite(r.morrey) && std::isfinite(r.weighted_l2);
    if (!finite || r.weak_warning) a.ordering_ok = false;
    if (r.weak_l3 > 0) a.c_morrey = std::max(a.c_morrey, r.morrey / r.weak_l3);
    if (r.morrey > 0) a.c_weighted = std::max(a.c_weighted, r.weighted_l2 / r.morrey);
    const double bound = std::pow(1.0 + ball_radius, 1.5) * r.weighted_l2;
    if (r.ball_l2 > bound * (1 + 1e-10)) a.ball_ok = false;
    if (r.name == "inverse_radial") {
      a.inv_weak = r.weak_l3;
      a.inv_weighted = r.weighted_l2;
    }
    a.rows.push_back(r);
  }
  if (a.c_morrey > a.k_morrey * (1 + a.tol) || a.c_weighted > a.k_weighted * (1 + a.tol)) a.ordering_ok = false;
  const double ref_weak = std::cbrt(4.0 * M_PI / 3.0), ref_weighted = std::sqrt(2.0 * M_PI);
  a.reference_ok = std::abs(a.inv_weak / ref_weak - 1) <= 0.01 && std::abs(a.inv_weighted / ref_weighted - 1) <= 0.01;
  return a;
}

VectorField leray_project(const VectorField& f, const Spectral& sp) {
  const Grid& g = f.grid;
  if (sp.grid() != g) throw ArgumentError("spectral grid mismatch");
  const int N = g.N;
  std::array<Spectrum, 3> F;
  for (int d = 0; d < 3; ++d) F[d] = sp.forward(f.values.c[d]);
  auto keff = [&](int i) { return sp.is_nyquist(i) ? 0.0 : sp.wavenumber(i); };
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < sp.nz_half(); ++k) {
        const double kv[3] = {keff(i), keff(j), keff(k)};
        const double k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
        if (k2 == 0) continue;
        const std::size_t s = sp.spec_index(i, j, k);
        std::complex<double> kd = 0;
        for (int d = 0; d < 3; ++d) kd += kv[d] * F[d][s];
        for (int d = 0; d < 3; ++d) F[d][s] -= kv[d] * kd / k2;
      }
  VectorField out = f;
  for (int d = 0; d < 3; ++d) out.values.c[d] = sp.backward(F[d]);
  out.divergence_free = true;
  return out;
}

double spectral_divergence_max(const VectorField& f, const Spectral& sp) {
  return max_abs(sp.divergence(f.values));
}

double tail_shell_mismatch(const VectorField& f) {
  if (!f.tail) return 0.0;
  const Grid& g = f.grid;
  double num = 0, den = 0;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const int k = static_cast<int>(idx % g.N);
    const int j = static_cast<int>((idx / g.N) % g.N);
    const int i = static_cast<int>(idx / (static_cast<std::size_t>(g.N) * g.N));
    if (i != 0 && j != 0 && k != 0) continue;
    const Vec3 y = g.point(idx);
    const Vec3 v = f.values.at(idx);
    num = std::max(num, norm(f.tail(y) - v));
    den = std::max(den, norm(v));
  }
  return den > 0 ? num / den : num;
}

// ----- IO -----

namespace {
constexpr char kMagic[4] = {'D', 'S', 'S', 'F'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_field_binary(const std::string& path, const VectorField& f, int tail_kind, double tail_param) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ArgumentError("cannot open " + path);
  const double L = f.grid.L;
  const std::int32_t N = f.grid.N, tk = tail_kind;
  os.write(kMagic, 4);
  os.write(reinterpret_cast<const char*>(&kVersion), 4);
  os.write(reinterpret_cast<const char*>(&L), 8);
  os.write(reinterpret_cast<const char*>(&N), 4);
  os.write(reinterpret_cast<const char*>(&tk), 4);
  os.write(reinterpret_cast<const char*>(&tail_param), 8);
  for (int d = 0; d < 3; ++d)
    os.write(reinterpret_cast<const char*>(f.values.c[d].data()),
             static_cast<std::streamsize>(sizeof(double) * f.values.size()));
  if (!os) throw ArgumentError("write failed: " + path);
}

VectorField read_field_binary(const std::string& path, int* tail_kind, double* tail_param) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArgumentError("cannot open " + path);
  char magic[4];
  std::uint32_t version = 0;
  double L = 0, tp = 0;
  std::int32_t N = 0, tk = 0;
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(&version), 4);
  is.read(reinterpret_cast<char*>(&L), 8);
  is.read(reinterpret_cast<char*>(&N), 4);
  is.read(reinterpret_cast<char*>(&tk), 4);
  is.read(reinterpret_cast<char*>(&tp), 8);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw ArgumentError("not a field file: " + path);
  if (version != kVersion) throw ArgumentError("unsupported field file version");
  VectorField f(Grid(L, N));
  for (int d = 0; d < 3; ++d)
    is.read(reinterpret_cast<char*>(f.values.c[d].data()),
            static_cast<std::streamsize>(sizeof(double) * f.values.size()));
  if (!is) throw ArgumentError("truncated field file: " + path);
  if (tail_kind) *tail_kind = tk;
  if (tail_param) *tail_param = tp;
  return f;
}

void write_field_csv(const std::string& path, const VectorField& f) {
  std::ofstream os(path);
  if (!os) throw ArgumentError("cannot open " + path);
  os.precision(17);
  os << "y1,y2,y3,f1,f2,f3\n";
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const Vec3 y = f.grid.point(i);
    const Vec3 v = f.values.at(i);
    os << y[0] << ',' << y[1] << ',' << y[2] << ',' << v[0] << ',' << v[1] << ',' << v[2] << '\n';
  }
}

}  // namespace dsslab
