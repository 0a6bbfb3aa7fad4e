#include "dsslab/physical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "dsslab/quadrature.hpp"
#include "dsslab/swirl.hpp"

namespace dsslab {

DataEvaluator data_evaluator(const CutoffBackground& bg) {
  DataEvaluator d;
  const ProfileSource* src = bg.source();
  if (!src || src->is_zero()) {
    d.v0 = [](const Vec3&) { return Vec3{0, 0, 0}; };
    d.heat = [](const Vec3&, double) { return Vec3{0, 0, 0}; };
    return d;
  }
  if (const auto* sw = dynamic_cast<const SwirlBackground*>(src)) {
    d.v0 = [sw](const Vec3& x) { return sw->data().value(x); };
    d.heat = [sw](const Vec3& x, double t) { return sw->heat_physical(x, t); };
    return d;
  }
  d.v0 = [](const Vec3&) -> Vec3 { throw DomainError("initial data are not available for this source"); };
  d.heat = [src](const Vec3& x, double t) {
    const ProfileSample ys = map_to_profile({x, t});
    return (1.0 / std::sqrt(2 * t)) * src->value(ys.y, ys.s);
  };
  return d;
}

namespace {

double reduce(double s, double T) {
  double r = s - T * std::floor(s / T);
  if (r >= T) r -= T;
  return r < 0 ? 0.0 : r;
}

// Field evaluation at fixed similarity time: raw weights per field are computed once.
struct Frozen {
  const SolutionCandidate* c;
  double s;
  std::vector<Eigen::VectorXd> w;  // velocity, then aux fields

  Frozen(const SolutionCandidate& cand, double s_) : c(&cand), s(s_) {
    const Eigen::VectorXd x = cand.state(s_);
    const int k = cand.basis->k();
    for (int f = 0; f <= cand.naux(); ++f) w.push_back(cand.basis->raw_weights(x.data() + f * k));
  }

  PhysicalValue at(const Vec3& y, bool grads) const {
    PhysicalValue out;
    Mat3 g;
    out.v = c->basis->raw_value(w[0], y, grads ? &g : nullptr) + c->W->eval(y, s);
    if (grads) {
      const Mat3 gw = c->W->eval_grad(y, s);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.grad_v[i][j] = g[i][j] + gw[i][j];
    }
    for (int n = 0; n < c->naux(); ++n) {
      out.aux.push_back(c->basis->raw_value(w[n + 1], y, grads ? &g : nullptr) + c->aux[n]->eval(y, s));
      if (grads) {
        const Mat3 gw = c->aux[n]->eval_grad(y, s);
        Mat3 sum = zero_mat();
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) sum[i][j] = g[i][j] + gw[i][j];
        out.grad_aux.push_back(sum);
      }
    }
    return out;
  }
};

double frob2(const Mat3& m) {
  double s = 0;
  for (const auto& r : m)
    for (double v : r) s += v * v;
  return s;
}

}  // namespace

Eigen::VectorXd SolutionCandidate::state(double sv) const {
  if (states.empty()) throw DomainError("candidate carries no states");
  if (stationary || states.size() == 1) return states[0];
  const double T = period();
  const double r = reduce(sv, T);
  const int segs = static_cast<int>(states.size()) - 1;
  const double h = s[1] - s[0];
  const int n = std::min(segs - 1, static_cast<int>(r / h));
  const double th = (r - s[n]) / h;
  const double t2 = th * th, t3 = t2 * th;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + th, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * states[n] + (h10 * h) * rates[n] + h01 * states[n + 1] + (h11 * h) * rates[n + 1];
}

PhysicalValue SolutionCandidate::profile(const Vec3& y, double sv, bool grads) const {
  return Frozen(*this, sv).at(y, grads);
}

PhysicalValue SolutionCandidate::eval(const Vec3& x, double t, bool grads) const {
  if (!(t > 0)) throw DomainError("physical evaluation needs t > 0");
  const ProfileSample ys = map_to_profile({x, t});
  PhysicalValue p = profile(ys.y, ys.s, grads);
  const double a = 1.0 / std::sqrt(2 * t), b = 1.0 / (2 * t);
  p.v = a * p.v;
  for (auto& v : p.aux) v = a * v;
  for (auto& r : p.grad_v)
    for (double& v : r) v *= b;
  for (auto& m : p.grad_aux)
    for (auto& r : m)
      for (double& v : r) v *= b;
  return p;
}

double SolutionCandidate::profile_pressure(const Vec3& y, double sv) const {
  if (pressure.empty()) throw DomainError("candidate carries no pressure slices");
  const Grid& g = pressure[0].grid;
  const double h = g.h();
  double fi[3];
  int i0[3];
  for (int d = 0; d < 3; ++d) {
    const double u = (y[d] + g.L) / h;
    if (u < 0 || u > g.N - 1) return 0.0;
    i0[d] = std::min(g.N - 2, static_cast<int>(std::floor(u)));
    fi[d] = u - i0[d];
  }
  const int M = static_cast<int>(pressure.size());
  int m = 0;
  double th = 0;
  if (M > 1) {
    const double r = reduce(sv, period()) * M / period();
    m = std::min(M - 1, static_cast<int>(r));
    th = r - m;
  }
  const int m2 = (m + 1) % M;
  double out = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int cc = 0; cc < 2; ++cc) {
        const double wt = (a ? fi[0] : 1 - fi[0]) * (b ? fi[1] : 1 - fi[1]) * (cc ? fi[2] : 1 - fi[2]);
        const std::size_t q = g.index(i0[0] + a, i0[1] + b, i0[2] + cc);
        out += wt * ((1 - th) * pressure[m].values[q] + th * pressure[m2].values[q]);
      }
  return out;
}

double SolutionCandidate::pressure_at(const Vec3& x, double t) const {
  if (!(t > 0)) throw DomainError("physical evaluation needs t > 0");
  const ProfileSample ys = map_to_profile({x, t});
  return profile_pressure(ys.y, ys.s) / (2 * t);
}

namespace {

SolutionCandidate base_candidate(System sys, const GalerkinBasis& basis, const CutoffBackground& W,
                                 const std::vector<const CutoffBackground*>& aux, const SimilarityMap& map) {
  if (static_cast<int>(aux.size()) != aux_count(sys)) throw ArgumentError("wrong number of auxiliary backgrounds");
  SolutionCandidate c;
  c.system = sys;
  c.map = map;
  c.basis = &basis;
  c.W = &W;
  c.aux = aux;
  c.data = data_evaluator(W);
  for (const auto* a : aux) c.aux_data.push_back(data_evaluator(*a));
  return c;
}

void add_pressure(SolutionCandidate& c, int slices, int pad) {
  for (int m = 0; m < slices; ++m) {
    const double s = c.period() * m / slices;
    c.pressure_s.push_back(s);
    c.pressure.push_back(riesz_pressure(c.basis->grid, stress_fields(*c.basis, *c.W, c.aux, c.state(s), s), pad));
  }
}

}  // namespace

SolutionCandidate reconstruct(const OrbitResult& orbit, const CoeffTables& tab, const GalerkinBasis& basis,
                              const CutoffBackground& W, const std::vector<const CutoffBackground*>& aux,
                              const SimilarityMap& map, int pressure_slices, int pad) {
  if (orbit.states.size() < 2 || !orbit.finite) throw ArgumentError("reconstruction needs a recorded finite orbit");
  if (std::abs(tab.period - map.period()) > 1e-12 * map.period())
    throw ArgumentError("orbit period does not match log(lambda)");
  SolutionCandidate c = base_candidate(tab.system, basis, W, aux, map);
  c.stationary = false;
  c.s = orbit.s;
  c.states = orbit.states;
  for (std::size_t i = 0; i < orbit.states.size(); ++i) c.rates.push_back(rhs(orbit.states[i], orbit.s[i], tab));
  add_pressure(c, pressure_slices, pad);
  return c;
}

SolutionCandidate reconstruct_stationary(const Eigen::VectorXd& x, System sys, const GalerkinBasis& basis,
                                         const CutoffBackground& W,
                                         const std::vector<const CutoffBackground*>& aux, const SimilarityMap& map,
                                         bool with_pressure, int pad) {
  SolutionCandidate c = base_candidate(sys, basis, W, aux, map);
  if (x.size() != basis.k() * (1 + c.naux())) throw ArgumentError("state dimension does not match the basis");
  c.stationary = true;
  c.s = {0.0};
  c.states = {x};
  c.rates = {Eigen::VectorXd::Zero(x.size())};
  if (with_pressure) add_pressure(c, 1, pad);
  return c;
}

// ----- distance to the heat flow -----

namespace {

// sum over fields of |field - heat|^2 at x for the candidate frozen at t.
double gap2(const Frozen& fz, const SolutionCandidate& c, const Vec3& x, double t) {
  const double r = std::sqrt(2 * t);
  const Vec3 y = (1.0 / r) * x;
  const PhysicalValue p = fz.at(y, false);
  const Vec3 d = (1.0 / r) * p.v - c.data.heat(x, t);
  double s = dot(d, d);
  for (int n = 0; n < c.naux(); ++n) {
    const Vec3 e = (1.0 / r) * p.aux[n] - c.aux_data[n].heat(x, t);
    s += dot(e, e);
  }
  return s;
}

double physical_gap(const SolutionCandidate& c, double t, double X, int N) {
  const Frozen fz(c, std::log(std::sqrt(2 * t)));
  const double h = 2 * X / N;
  double sum = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        const Vec3 x{-X + (i + 0.5) * h, -X + (j + 0.5) * h, -X + (k + 0.5) * h};
        sum += gap2(fz, c, x, t);
      }
  return std::sqrt(sum * h * h * h);
}

}  // namespace

HeatDistanceReport distance_to_heat_flow(const SolutionCandidate& c, double t0, int dyads, int per_dyad,
                                         int quad_points) {
  if (!(t0 > 0)) throw ArgumentError("sample times must be positive");
  if (dyads < 1 || per_dyad < 1 || quad_points < 4) throw ArgumentError("invalid sampling for the heat distance");
  HeatDistanceReport r;
  r.quad_points = quad_points;
  const double lam = c.map.lambda;
  const double L = c.basis->grid.L;
  std::vector<std::vector<double>> g(dyads, std::vector<double>(per_dyad));
  for (int j = 0; j < dyads; ++j) {
    // The box covers |y| <= L at the end of the dyad and scales by lambda from one dyad to the next.
    const double X = L * lam * std::sqrt(2 * t0) * std::pow(lam, j);
    double env = 0;
    for (int m = 0; m < per_dyad; ++m) {
      const double t = t0 * std::pow(lam, 2 * j) * std::pow(lam, 2.0 * m / per_dyad);
      g[j][m] = physical_gap(c, t, X, quad_points);
      r.t.push_back(t);
      r.g.push_back(g[j][m]);
      r.dyad.push_back(j);
      env = std::max(env, g[j][m] / std::pow(t, 0.25));
    }
    r.envelope.push_back(env);
  }
  for (int j = 0; j + 1 < dyads; ++j)
    for (int m = 0; m < per_dyad; ++m) {
      const double a = g[j][m], b = g[j + 1][m];
      if (a == 0 && b == 0) continue;
      const double e = a == 0 ? std::numeric_limits<double>::infinity() : std::abs(b / (std::sqrt(lam) * a) - 1);
      r.max_ratio_error = std::max(r.max_ratio_error, e);
    }
  const double emax = *std::max_element(r.envelope.begin(), r.envelope.end());
  const double emin = *std::min_element(r.envelope.begin(), r.envelope.end());
  r.C0 = emax;
  r.envelope_spread = emax == 0 ? 0.0 : (emin == 0 ? std::numeric_limits<double>::infinity() : emax / emin - 1);
  r.scaling_ok = r.max_ratio_error <= 1e-2;
  r.envelope_ok = r.envelope_spread <= 2e-2;
  return r;
}

double heat_gap_profile(const SolutionCandidate& c, double t) {
  if (!(t > 0)) throw DomainError("heat gap needs t > 0");
  const Frozen fz(c, std::log(std::sqrt(2 * t)));
  const Grid& g = c.basis->grid;
  const double r = std::sqrt(2 * t);
  double sum = 0;
  for (std::size_t p = 0; p < g.size(); ++p) sum += gap2(fz, c, r * g.point(p), t);
  // |f(x / r) / r|_{L^2_x}^2 = r |f|_{L^2_y}^2.
  return std::sqrt(sum * g.weight() / r) * std::pow(2 * t, 0.25);
}

// ----- local energy -----

namespace {

struct BallNode {
  Vec3 x;
  double w;
};

std::vector<BallNode> ball_nodes(const Vec3& centre, double R, int n_r = 12, int n_t = 12, int n_p = 24) {
  std::vector<BallNode> out;
  const GaussRule& gr = gauss_legendre(n_r);
  const GaussRule& gt = gauss_legendre(n_t);
  for (int i = 0; i < n_r; ++i) {
    const double r = 0.5 * R * (gr.x[i] + 1);
    const double wr = 0.5 * R * gr.w[i] * r * r;
    for (int j = 0; j < n_t; ++j) {
      const double ct = gt.x[j], st = std::sqrt(1 - ct * ct);
      for (int k = 0; k < n_p; ++k) {
        const double ph = 2 * M_PI * (k + 0.5) / n_p;
        out.push_back({{centre[0] + r * st * std::cos(ph), centre[1] + r * st * std::sin(ph), centre[2] + r * ct},
                       wr * gt.w[j] * 2 * M_PI / n_p});
      }
    }
  }
  return out;
}

// Sup over one period of g(t) / t^{1/4}, sampled on the profile grid.
double profile_envelope(const SolutionCandidate& c, int samples) {
  double best = 0;
  const int n = c.stationary ? 1 : samples;
  for (int m = 0; m < n; ++m) {
    const double s = c.period() * m / n;
    const double t = 0.5 * std::exp(2 * s);
    best = std::max(best, heat_gap_profile(c, t) / std::pow(t, 0.25));
  }
  return best;
}

LocalEnergyRow energy_row(const SolutionCandidate& c, double R, const Vec3& x0, int t_nodes, double C0) {
  LocalEnergyRow row;
  row.R = R;
  row.x0 = x0;
  const auto nodes = ball_nodes(x0, R);
  auto at_time = [&](double t, double& energy, double& enstrophy, double& heat) {
    energy = enstrophy = heat = 0;
    const double r = std::sqrt(2 * t);
    const Frozen fz(c, std::log(r));
    for (const BallNode& b : nodes) {
      const PhysicalValue p = fz.at((1.0 / r) * b.x, true);
      double e = dot(p.v, p.v), q = frob2(p.grad_v);
      for (int n = 0; n < c.naux(); ++n) {
        e += dot(p.aux[n], p.aux[n]);
        q += frob2(p.grad_aux[n]);
      }
      energy += b.w * e / (r * r);
      enstrophy += b.w * q / (r * r * r * r);
      const Vec3 hv = c.data.heat(b.x, t);
      double hsum = dot(hv, hv);
      for (int n = 0; n < c.naux(); ++n) {
        const Vec3 ha = c.aux_data[n].heat(b.x, t);
        hsum += dot(ha, ha);
      }
      heat += b.w * hsum;
    }
  };
  // t = sigma^2 with Gauss nodes in sigma on [0, R] removes the t^{-1/2} endpoint behaviour.
  const GaussRule& gs = gauss_legendre(t_nodes);
  row.split_ok = true;
  auto check = [&](double t, double e, double heat) {
    row.energy_sup = std::max(row.energy_sup, e);
    const double bound = 2 * C0 * C0 * std::sqrt(t) + 2 * heat;
    row.split_bound = std::max(row.split_bound, bound);
    if (e > bound * (1 + 1e-2)) row.split_ok = false;
  };
  for (int i = 0; i < t_nodes; ++i) {
    const double sg = 0.5 * R * (gs.x[i] + 1);
    const double w = 0.5 * R * gs.w[i] * 2 * sg;
    double e, q, heat;
    at_time(sg * sg, e, q, heat);
    row.spacetime += w * e;
    row.enstrophy += w * q;
    check(sg * sg, e, heat);
  }
  double e, q, heat;
  at_time(R * R, e, q, heat);
  check(R * R, e, heat);
  return row;
}

void finish(LocalEnergyReport& rep) {
  for (const auto& r : rep.rows) {
    if (!std::isfinite(r.energy_sup) || !std::isfinite(r.enstrophy) || !std::isfinite(r.spacetime))
      rep.finite = false;
    if (!r.split_ok) rep.split_ok = false;
  }
  std::map<double, std::vector<const LocalEnergyRow*>> by_r;
  for (const auto& r : rep.rows)
    if (norm(r.x0) > 0) by_r[r.R].push_back(&r);
  for (auto& [R, rows] : by_r) {
    std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return norm(a->x0) < norm(b->x0); });
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
      if (!(rows[i + 1]->spacetime < rows[i]->spacetime) && rows[i]->spacetime > 0) rep.decay_ok = false;
  }
}

}  // namespace

LocalEnergyReport local_energy_report(const SolutionCandidate& c, const std::vector<double>& radii,
                                      const std::vector<Vec3>& centres, double C0, int t_nodes) {
  LocalEnergyReport rep;
  if (C0 < 0) C0 = profile_envelope(c, 4);
  for (double R : radii) {
    if (!(R > 0)) throw ArgumentError("radii must be positive");
    for (const Vec3& x0 : centres) rep.rows.push_back(energy_row(c, R, x0, t_nodes, C0));
  }
  finish(rep);
  return rep;
}

LocalEnergyReport local_energy_report(const SolutionCandidate& c, const std::vector<double>& radii, double C0) {
  LocalEnergyReport rep;
  if (C0 < 0) C0 = profile_envelope(c, 4);
  const Vec3 e{1.0 / 3, 2.0 / 3, 2.0 / 3};
  for (double R : radii) {
    if (!(R > 0)) throw ArgumentError("radii must be positive");
    for (double f : {0.0, 4.0, 8.0, 16.0}) rep.rows.push_back(energy_row(c, R, (f * R) * e, 10, C0));
  }
  finish(rep);
  return rep;
}

// ----- local energy inequality -----

Jet2 bump1d(double z) {
  const double a = std::abs(z);
  if (a >= 1) return Jet2(0.0);
  const Jet2 Z = smoothstep(2 * a);
  const double sg = z < 0 ? -1.0 : 1.0;
  return {1 - Z.v, -2 * sg * Z.d, -4 * Z.dd};
}

std::vector<BumpTest> default_profile_bumps(double period, unsigned long seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<BumpTest> out;
  for (int i = 0; i < n; ++i) {
    BumpTest b;
    for (double& v : b.centre) v = -1 + 2 * u01(rng);
    b.radius = 1.5 + u01(rng);
    b.time_centre = 0.5 * period;
    b.time_half = (0.3 + 0.2 * u01(rng)) * period;
    out.push_back(b);
  }
  return out;
}

std::vector<BumpTest> default_physical_bumps(double lambda, unsigned long seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double t1 = 0.5, t2 = 0.5 * lambda * lambda;
  std::vector<BumpTest> out;
  for (int i = 0; i < n; ++i) {
    BumpTest b;
    for (double& v : b.centre) v = -0.5 + u01(rng);
    b.radius = 1.5 + u01(rng);
    b.time_centre = 0.5 * (t1 + t2);
    b.time_half = (0.6 + 0.4 * u01(rng)) * 0.5 * (t2 - t1);
    out.push_back(b);
  }
  return out;
}

TestFunction bump_function(const BumpTest& b) {
  if (!(b.radius > 0) || !(b.time_half > 0)) throw ArgumentError("test function widths must be positive");
  return [b](const Vec3& z, double tau, TestValue& out) {
    const Jet2 tj = bump1d((tau - b.time_centre) / b.time_half);
    if (tj.v == 0 && tj.d == 0) return false;
    const double tv = tj.v, td = tj.d / b.time_half;
    Jet2 f[3];
    for (int d = 0; d < 3; ++d) {
      const double u = (z[d] - b.centre[d]) / b.radius;
      if (std::abs(u) >= 1) return false;
      f[d] = bump1d(u);
    }
    const double r = b.radius;
    const double sp = f[0].v * f[1].v * f[2].v;
    out.v = sp * tv;
    out.dt = sp * td;
    out.grad = {f[0].d * f[1].v * f[2].v / r * tv, f[0].v * f[1].d * f[2].v / r * tv,
                f[0].v * f[1].v * f[2].d / r * tv};
    out.lap = (f[0].dd * f[1].v * f[2].v + f[0].v * f[1].dd * f[2].v + f[0].v * f[1].v * f[2].dd) / (r * r) * tv;
    return true;
  };
}

TestFunction profile_pullback(const TestFunction& phi) {
  return [phi](const Vec3& y, double s, TestValue& out) {
    const double es = std::exp(s), e2s = es * es;
    const Vec3 x = es * y;
    TestValue p;
    if (!phi(x, 0.5 * e2s, p)) return false;
    out.v = es * p.v;
    out.dt = es * p.v + es * (dot(p.grad, x) + e2s * p.dt);
    out.grad = e2s * p.grad;
    out.lap = e2s * es * p.lap;
    return true;
  };
}

namespace {

void check_support(const BumpTest& b, double lo, double hi) {
  if (b.time_centre - b.time_half < lo - 1e-12 || b.time_centre + b.time_half > hi + 1e-12)
    throw ArgumentError("test function is not supported inside one period");
  if (!(b.radius > 0) || !(b.time_half > 0)) throw ArgumentError("test function widths must be positive");
}

// Analytic gradient of a background on the grid, blended between slices like W_at.
GradArray background_grad(const CutoffBackground& bg, double s, std::map<int, GradArray>& cache) {
  const Grid& g = bg.grid();
  auto slice_grad = [&](int m) -> const GradArray& {
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    GradArray ga(g.size());
    if (!bg.is_zero())
      for (std::size_t p = 0; p < g.size(); ++p) {
        const Mat3 m3 = bg.eval_grad(g.point(p), bg.slice(m).s);
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) ga.g[3 * i + j][p] = m3[i][j];
      }
    return cache.emplace(m, std::move(ga)).first->second;
  };
  const auto [m, th] = bg.locate(s);
  const GradArray& a = slice_grad(m);
  if (th == 0 || bg.slices() == 1) return a;
  const GradArray& b = slice_grad((m + 1) % bg.slices());
  GradArray out(g.size());
  for (int q = 0; q < 9; ++q)
    for (std::size_t p = 0; p < g.size(); ++p) out.g[q][p] = (1 - th) * a.g[q][p] + th * b.g[q][p];
  // Keep at most the slices that later nodes can still use.
  for (auto it = cache.begin(); it != cache.end();)
    it = (it->first < m && !(m == bg.slices() - 1 && it->first == 0)) ? cache.erase(it) : std::next(it);
  return out;
}

void add_grad(GradArray& a, const GradArray& b) {
  for (int q = 0; q < 9; ++q)
    for (std::size_t p = 0; p < a.size(); ++p) a.g[q][p] += b.g[q][p];
}

void add_vec(VecArray& a, const VecArray& b) {
  for (int d = 0; d < 3; ++d)
    for (std::size_t p = 0; p < a.size(); ++p) a.c[d][p] += b.c[d][p];
}

}  // namespace

LeiReport local_energy_inequality(const SolutionCandidate& c, const std::vector<BumpTest>& profile_tests,
                                  const std::vector<BumpTest>& physical_tests, int s_nodes, int pad) {
  const double T = c.period();
  std::vector<TestFunction> pf, xf;
  for (const auto& b : profile_tests) {
    check_support(b, 0.0, T);
    pf.push_back(bump_function(b));
  }
  for (const auto& b : physical_tests) {
    check_support(b, 0.5, 0.5 * std::exp(2 * T));
    xf.push_back(bump_function(b));
  }
  return local_energy_inequality(c, pf, xf, s_nodes, pad);
}

LeiReport local_energy_inequality(const SolutionCandidate& c, const std::vector<TestFunction>& profile_tests,
                                  const std::vector<TestFunction>& physical_tests, int s_nodes, int pad) {
  if (s_nodes < 4) throw ArgumentError("at least four s nodes are required");
  const double T = c.period();
  LeiReport rep;
  rep.s_nodes = s_nodes;
  rep.profile.resize(profile_tests.size());
  rep.physical.resize(physical_tests.size());
  const GalerkinBasis& B = *c.basis;
  const Grid& g = B.grid;
  const std::size_t np = g.size();
  const int k = B.k(), na = c.naux();
  std::map<int, GradArray> wcache;
  std::vector<std::map<int, GradArray>> acache(na);

  for (int node = 0; node <= s_nodes; ++node) {
    const double s = T * node / s_nodes;
    const double ws = (node == 0 || node == s_nodes ? 0.5 : 1.0) * T / s_nodes * g.weight();
    const double t = 0.5 * std::exp(2 * s);

    const Eigen::VectorXd x = c.state(s);
    const StressFields sf = stress_fields(B, *c.W, c.aux, x, s);
    const ScalarArray p = riesz_pressure(g, sf, pad).values;
    VecArray u = sf.U;
    add_vec(u, sf.W);
    GradArray gu = B.combine_grad(x.data());
    add_grad(gu, background_grad(*c.W, s, wcache));
    std::vector<VecArray> a(na);
    std::vector<GradArray> ga(na);
    for (int n = 0; n < na; ++n) {
      a[n] = sf.G[n];
      add_vec(a[n], sf.E[n]);
      ga[n] = B.combine_grad(x.data() + (n + 1) * k);
      add_grad(ga[n], background_grad(*c.aux[n], s, acache[n]));
    }
    const double es = std::exp(s), e2s = es * es, e3s = e2s * es;

    for (std::size_t q = 0; q < np; ++q) {
      const Vec3 y = g.point(q);
      const Vec3 uq = u.at(q);
      double e = dot(uq, uq), dis = 0;
      for (int m = 0; m < 9; ++m) dis += gu.g[m][q] * gu.g[m][q];
      std::vector<Vec3> aq(na);
      for (int n = 0; n < na; ++n) {
        aq[n] = a[n].at(q);
        e += dot(aq[n], aq[n]);
        for (int m = 0; m < 9; ++m) dis += ga[n].g[m][q] * ga[n].g[m][q];
      }
      e *= 0.5;
      TestValue be;
      for (std::size_t i = 0; i < profile_tests.size(); ++i) {
        if (!profile_tests[i](y, s, be)) continue;
        LeiTerms& L = rep.profile[i];
        L.lhs += ws * (e + dis) * be.v;
        L.heat += ws * e * (be.dt + be.lap);
        L.flux += ws * (dot(e * (uq - y) + p[q] * uq, be.grad));
        for (int n = 0; n < na; ++n) L.coupling -= ws * dot(uq, aq[n]) * dot(aq[n], be.grad);
      }
      if (physical_tests.empty()) continue;
      const Vec3 xq = es * y;
      for (std::size_t i = 0; i < physical_tests.size(); ++i) {
        if (!physical_tests[i](xq, t, be)) continue;
        LeiTerms& L = rep.physical[i];
        L.lhs += ws * 2 * dis * es * be.v;
        L.heat += ws * 2 * e * e3s * (be.dt + be.lap);
        L.flux += ws * (2 * e + 2 * p[q]) * e2s * dot(uq, be.grad);
        for (int n = 0; n < na; ++n) L.coupling -= ws * 2 * e2s * dot(uq, aq[n]) * dot(aq[n], be.grad);
      }
    }
  }
  rep.worst_relative = std::numeric_limits<double>::infinity();
  auto close = [&](std::vector<LeiTerms>& v) {
    for (auto& L : v) {
      L.residual = L.heat + L.flux + L.coupling - L.lhs;
      L.scale = std::abs(L.lhs) + std::abs(L.heat) + std::abs(L.flux) + std::abs(L.coupling);
      L.ok = L.residual >= -1e-6 * L.scale;
      if (!L.ok) rep.ok = false;
      if (L.scale > 0) rep.worst_relative = std::min(rep.worst_relative, L.residual / L.scale);
    }
  };
  close(rep.profile);
  close(rep.physical);
  if (!std::isfinite(rep.worst_relative)) rep.worst_relative = 0;
  return rep;
}

// ----- convergence to the data -----

InitialDataReport initial_data_convergence(const SolutionCandidate& c, double r_in, double r_out,
                                           const std::vector<double>& t_sequence, double C0) {
  if (!(r_in > 0 && r_out > r_in)) throw ArgumentError("annulus radii must satisfy 0 < r_in < r_out");
  InitialDataReport rep;
  const GaussRule& gr = gauss_legendre(16);
  const GaussRule& gt = gauss_legendre(16);
  const int n_p = 32;
  std::vector<BallNode> nodes;
  for (int i = 0; i < 16; ++i) {
    const double r = r_in + 0.5 * (r_out - r_in) * (gr.x[i] + 1);
    const double wr = 0.5 * (r_out - r_in) * gr.w[i] * r * r;
    for (int j = 0; j < 16; ++j) {
      const double ct = gt.x[j], st = std::sqrt(1 - ct * ct);
      for (int k = 0; k < n_p; ++k) {
        const double ph = 2 * M_PI * (k + 0.5) / n_p;
        nodes.push_back({{r * st * std::cos(ph), r * st * std::sin(ph), r * ct}, wr * gt.w[j] * 2 * M_PI / n_p});
      }
    }
  }
  std::vector<std::vector<Vec3>> v0(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    v0[i].push_back(c.data.v0(nodes[i].x));
    for (int n = 0; n < c.naux(); ++n) v0[i].push_back(c.aux_data[n].v0(nodes[i].x));
  }
  for (double t : t_sequence) {
    if (!(t > 0)) throw DomainError("times must be positive");
    const double r = std::sqrt(2 * t);
    const Frozen fz(c, std::log(r));
    double tot = 0, flow = 0, heat = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const PhysicalValue p = fz.at((1.0 / r) * nodes[i].x, false);
      for (int f = 0; f <= c.naux(); ++f) {
        const Vec3 v = (1.0 / r) * (f == 0 ? p.v : p.aux[f - 1]);
        const Vec3 h = f == 0 ? c.data.heat(nodes[i].x, t) : c.aux_data[f - 1].heat(nodes[i].x, t);
        const Vec3 a = v - v0[i][f], b = v - h, d = h - v0[i][f];
        tot += nodes[i].w * dot(a, a);
        flow += nodes[i].w * dot(b, b);
        heat += nodes[i].w * dot(d, d);
      }
    }
    rep.t.push_back(t);
    rep.total.push_back(std::sqrt(tot));
    rep.flow_part.push_back(std::sqrt(flow));
    rep.heat_part.push_back(std::sqrt(heat));
    rep.flow_bound.push_back(C0 * std::pow(t, 0.25));
  }
  for (std::size_t i = 0; i < rep.t.size(); ++i) {
    if (rep.flow_part[i] > rep.flow_bound[i] * (1 + 1e-2) + 1e-14) rep.bound_ok = false;
    if (i == 0) continue;
    if (rep.t[i] >= rep.t[i - 1]) throw ArgumentError("time sequence must decrease");
    if (rep.flow_part[i] > rep.flow_part[i - 1] * (1 + 1e-12) + 1e-14) rep.flow_decreasing = false;
    if (rep.heat_part[i] > rep.heat_part[i - 1] * (1 + 1e-12) + 1e-14) rep.heat_decreasing = false;
  }
  return rep;
}

}  // namespace dsslab
