#include "dsslab/swirl.hpp"

#include <algorithm>
#include <cmath>

#include "dsslab/quadrature.hpp"

namespace dsslab {

bool SwirlData::homogeneous() const {
  if (log_period <= 0) return true;
  for (const auto& t : terms)
    if (t.mod_amp != 0.0) return false;
  return true;
}

bool SwirlData::is_zero() const {
  for (const auto& t : terms)
    if (t.amp != 0.0) return false;
  return true;
}

Jet2 SwirlData::modulation(const SwirlTerm& term, const Jet2& log_r) const {
  if (log_period <= 0 || term.mod_amp == 0.0) return Jet2(1.0);
  const double w = 2 * M_PI / log_period;
  const Jet2 arg = w * log_r + Jet2(term.mod_phase);
  const Jet2 sn = compose(arg, std::sin(arg.v), std::cos(arg.v), -std::sin(arg.v));
  return Jet2(1.0) + term.mod_amp * sn;
}

double SwirlData::modulation(const SwirlTerm& term, double r) const {
  return modulation(term, Jet2(std::log(r))).v;
}

Vec3 SwirlData::value(const Vec3& x) const {
  const double r2 = dot(x, x);
  Vec3 out{0, 0, 0};
  if (r2 == 0) return out;
  for (const auto& t : terms) {
    const double m = modulation(t, std::sqrt(r2));
    out += (t.amp * m / r2) * cross(t.axis, x);
  }
  return out;
}

SwirlData SwirlData::canonical(double c) {
  SwirlData d;
  d.terms.push_back({{0, 0, 1}, c, 0.0, 0.0});
  return d;
}

namespace {

// Bt(a) = [(1+e^{-2a})/a - (1-e^{-2a})/a^2]/a, regular at a = 0 with Bt(0) = 2/3.
Jet2 bt_of(double a) {
  const Jet2 A(a, 1.0, 0.0);
  if (a < 0.5) {
    // 2 e^{-a} sum_n 2n/(2n+1)! a^{2n-2}
    static const double c[] = {1.0 / 3.0,       1.0 / 30.0,         1.0 / 840.0,
                               1.0 / 45360.0,   1.0 / 3991680.0,    12.0 / 6227020800.0,
                               14.0 / 1307674368000.0, 16.0 / 355687428096000.0};
    const Jet2 A2 = A * A;
    Jet2 S(c[7]);
    for (int n = 6; n >= 0; --n) S = S * A2 + Jet2(c[n]);
    return 2.0 * (exp(-A) * S);
  }
  const Jet2 e2 = exp(-2.0 * A);
  const Jet2 one(1.0);
  return ((one + e2) / A - (one - e2) / (A * A)) / A;
}

}  // namespace

Jet2 swirl_heat_radial(const SwirlData& data, const SwirlTerm& term, double r, double t) {
  if (!(t > 0)) throw DomainError("heat flow needs t > 0");
  if (term.amp == 0.0) return Jet2(0.0);
  const double sqt = std::sqrt(t);
  const double half = 13.5 * sqt;
  const double lo = std::max(0.0, r - half);
  const double hi = r + half;
  const bool modulated = !data.homogeneous();
  const GaussRule& g = gauss_legendre(16);

  Jet2 acc(0.0);
  auto add_panel = [&](double a, double b) {
    const double w = 0.5 * (b - a);
    const double c = 0.5 * (a + b);
    for (int i = 0; i < 16; ++i) {
      const double rho = c + w * g.x[i];
      const double m = modulated ? data.modulation(term, rho) : 1.0;
      const double diff = r - rho;
      const double gv = std::exp(-diff * diff / (4 * t));
      const Jet2 gauss(gv, gv * (-diff / (2 * t)), gv * (diff * diff / (4 * t * t) - 1.0 / (2 * t)));
      const double av = r * rho / (2 * t);
      const Jet2 b3 = bt_of(av);
      const Jet2 aj(av, rho / (2 * t), 0.0);
      const Jet2 btr = compose(aj, b3.v, b3.d, b3.dd);
      const double weight = g.w[i] * w * m * rho * rho / (2 * t);
      const Jet2 term_j = gauss * btr;
      acc = acc + weight * term_j;
    }
  };

  double start = lo;
  if (lo == 0.0 && modulated) {
    const double rho0 = std::min(hi, 0.5 * sqt);
    double b = rho0;
    for (int j = 0; j < 48; ++j) {
      add_panel(0.5 * b, b);
      b *= 0.5;
    }
    start = rho0;
  }
  double a = start;
  while (a < hi) {
    double width = sqt;
    if (modulated) width = std::min(width, std::max(0.5 * a * data.log_period, 1e-3 * sqt));
    const double b = std::min(hi, a + width);
    add_panel(a, b);
    a = b;
  }
  const double pref = 2 * M_PI * term.amp * std::pow(4 * M_PI * t, -1.5);
  return pref * acc;
}

// ---------------------------------------------------------------------------------------------

RadialTable::RadialTable(const std::vector<double>& nodes, std::vector<Jet2> values,
                         Jet2 (*far)(double, const void*), const void* far_ctx)
    : nodes_(nodes), vals_(std::move(values)), far_(far), far_ctx_(far_ctx) {}

Jet2 RadialTable::eval(double r) const {
  if (r >= nodes_.back()) {
    if (far_) return far_(r, far_ctx_);
    throw DomainError("radius beyond table");
  }
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  const double r0 = nodes_[i], r1 = nodes_[i + 1];
  const double D = r1 - r0;
  const double t = (r - r0) / D;
  const Jet2& f0 = vals_[i];
  const Jet2& f1 = vals_[i + 1];
  // Quintic Hermite basis and derivatives in t.
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double H[6] = {1 - 10 * t3 + 15 * t4 - 6 * t5, t - 6 * t3 + 8 * t4 - 3 * t5,
                       0.5 * (t2 - 3 * t3 + 3 * t4 - t5), 10 * t3 - 15 * t4 + 6 * t5,
                       -4 * t3 + 7 * t4 - 3 * t5, 0.5 * (t3 - 2 * t4 + t5)};
  const double H1[6] = {-30 * t2 + 60 * t3 - 30 * t4, 1 - 18 * t2 + 32 * t3 - 15 * t4,
                        0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4), 30 * t2 - 60 * t3 + 30 * t4,
                        -12 * t2 + 28 * t3 - 15 * t4, 0.5 * (3 * t2 - 8 * t3 + 5 * t4)};
  const double H2[6] = {-60 * t + 180 * t2 - 120 * t3, -36 * t + 96 * t2 - 60 * t3,
                        0.5 * (2 - 18 * t + 36 * t2 - 20 * t3), 60 * t - 180 * t2 + 120 * t3,
                        -24 * t + 84 * t2 - 60 * t3, 0.5 * (6 * t - 24 * t2 + 20 * t3)};
  const double c[6] = {f0.v, D * f0.d, D * D * f0.dd, f1.v, D * f1.d, D * D * f1.dd};
  double v = 0, d1 = 0, d2 = 0;
  for (int k = 0; k < 6; ++k) {
    v += c[k] * H[k];
    d1 += c[k] * H1[k];
    d2 += c[k] * H2[k];
  }
  return {v, d1 / D, d2 / (D * D)};
}

// ---------------------------------------------------------------------------------------------

namespace {

struct FarContext {
  const SwirlData* data;
  const SwirlTerm* term;
  double s;
};

// Far field: the data itself, p(r, s) = amp m(log r + s) / r^2.
Jet2 far_profile(double r, const void* ctx_v) {
  const auto* ctx = static_cast<const FarContext*>(ctx_v);
  const Jet2 logr(std::log(r) + ctx->s, 1.0 / r, -1.0 / (r * r));
  const Jet2 m = ctx->data->modulation(*ctx->term, logr);
  const Jet2 inv2(1.0 / (r * r), -2.0 / (r * r * r), 6.0 / (r * r * r * r));
  return ctx->term->amp * (m * inv2);
}

std::vector<double> graded_nodes(double r_max) {
  std::vector<double> nodes;
  double r = 0;
  while (r < r_max) {
    nodes.push_back(r);
    r += 0.02 * std::max(1.0, r / 4.0);
  }
  nodes.push_back(r_max);
  return nodes;
}

}  // namespace

SwirlBackground::SwirlBackground(SwirlData data, double r_table) : data_(std::move(data)), r_table_(r_table) {}

double SwirlBackground::canonical_s(double s) const { return data_.homogeneous() ? 0.0 : s; }

Jet2 SwirlBackground::profile_exact(std::size_t term, double r, double s) const {
  const double es = std::exp(s);
  const double t = 0.5 * es * es;
  const Jet2 q = swirl_heat_radial(data_, data_.terms.at(term), es * r, t);
  return {es * es * q.v, es * es * es * q.d, es * es * es * es * q.dd};
}

const RadialTable& SwirlBackground::table(std::size_t term, double s_in) const {
  const double s = canonical_s(s_in);
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(s);
  if (it == cache_.end()) {
    std::vector<std::shared_ptr<RadialTable>> tabs;
    const auto nodes = graded_nodes(r_table_);
    for (std::size_t a = 0; a < data_.terms.size(); ++a) {
      std::vector<Jet2> vals(nodes.size());
      for (std::size_t i = 0; i < nodes.size(); ++i) vals[i] = profile_exact(a, nodes[i], s);
      // The far-field context must outlive the table; keep it alongside.
      auto* ctx = new FarContext{&data_, &data_.terms[a], s};
      auto tab = std::shared_ptr<RadialTable>(new RadialTable(nodes, std::move(vals), &far_profile, ctx),
                                              [ctx](RadialTable* p) {
                                                delete p;
                                                delete ctx;
                                              });
      tabs.push_back(tab);
    }
    if (cache_order_.size() >= 256) {
      cache_.erase(cache_order_.front());
      cache_order_.erase(cache_order_.begin());
    }
    cache_order_.push_back(s);
    it = cache_.emplace(s, std::move(tabs)).first;
  }
  return *it->second.at(term);
}

Vec3 SwirlBackground::value(const Vec3& y, double s) const {
  Vec3 out{0, 0, 0};
  const double r = norm(y);
  for (std::size_t a = 0; a < data_.terms.size(); ++a) {
    if (data_.terms[a].amp == 0.0) continue;
    const Jet2 p = table(a, s).eval(r);
    out += p.v * cross(data_.terms[a].axis, y);
  }
  return out;
}

Mat3 SwirlBackground::grad(const Vec3& y, double s) const {
  Mat3 g = zero_mat();
  const double r = norm(y);
  for (std::size_t a = 0; a < data_.terms.size(); ++a) {
    const auto& tm = data_.terms[a];
    if (tm.amp == 0.0) continue;
    const Jet2 p = table(a, s).eval(r);
    const Vec3 ny = cross(tm.axis, y);
    const Vec3& n = tm.axis;
    // Matrix of y -> n x y.
    const Mat3 N{{{0, -n[2], n[1]}, {n[2], 0, -n[0]}, {-n[1], n[0], 0}}};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double v = p.v * N[i][j];
        if (r > 0) v += p.d * y[j] / r * ny[i];
        g[i][j] += v;
      }
  }
  return g;
}

Vec3 SwirlBackground::heat_physical(const Vec3& x, double t) const {
  Vec3 out{0, 0, 0};
  const double r = norm(x);
  for (const auto& tm : data_.terms) {
    if (tm.amp == 0.0) continue;
    out += swirl_heat_radial(data_, tm, r, t).v * cross(tm.axis, x);
  }
  return out;
}

}  // namespace dsslab
