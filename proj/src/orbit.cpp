#include "dsslab/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>

namespace dsslab {

EnergyBudget EnergyBudget::make(double C2, System sys, double period) {
  if (!(period > 0)) throw ArgumentError("period must be positive");
  if (!(C2 >= 0)) throw ArgumentError("C2 must be nonnegative");
  EnergyBudget b;
  b.C2 = C2;
  b.decay_rate = dsslab::decay_rate(sys);
  b.period = period;
  b.rho = C2 * period / (1.0 - std::exp(-period * b.decay_rate));
  return b;
}

double EnergyBudget::envelope(double E0, double s) const {
  const double e = std::exp(-decay_rate * s);
  return E0 * e + C2 / decay_rate * (1.0 - e);
}

namespace {

Eigen::VectorXd rk4_step(const Eigen::VectorXd& x, double s, double h, const CoeffTables& tab) {
  const Eigen::VectorXd k1 = rhs(x, s, tab);
  const Eigen::VectorXd k2 = rhs(x + 0.5 * h * k1, s + 0.5 * h, tab);
  const Eigen::VectorXd k3 = rhs(x + 0.5 * h * k2, s + 0.5 * h, tab);
  const Eigen::VectorXd k4 = rhs(x + h * k3, s + h, tab);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_steps(const CoeffTables& tab, int steps) {
  if (steps < 16) throw ArgumentError("at least 16 integrator steps per period are required");
  if (!(tab.period > 0)) throw ArgumentError("tables carry no positive period");
}

}  // namespace

Eigen::VectorXd period_map(const Eigen::VectorXd& start, const CoeffTables& tab, int steps) {
  check_steps(tab, steps);
  if (start.size() != tab.dim()) throw ArgumentError("state dimension does not match the tables");
  const double h = tab.period / steps;
  Eigen::VectorXd x = start;
  for (int n = 0; n < steps; ++n) x = rk4_step(x, n * h, h, tab);
  return x;
}

OrbitResult integrate_period(const Eigen::VectorXd& start, const CoeffTables& tab, int steps, bool record) {
  check_steps(tab, steps);
  if (start.size() != tab.dim()) throw ArgumentError("state dimension does not match the tables");
  OrbitResult o;
  o.steps = steps;
  o.start = start;
  const double h = tab.period / steps;
  auto push = [&](double s, const Eigen::VectorXd& x) {
    if (!record) return;
    o.s.push_back(s);
    o.states.push_back(x);
    const double E = x.squaredNorm();
    o.energy.push_back(E);
    o.dissipation.push_back(E + tab.dissipation(x));
    o.rhs_dE.push_back(2.0 * x.dot(rhs(x, s, tab)));
  };
  Eigen::VectorXd x = start;
  push(0.0, x);
  for (int n = 0; n < steps; ++n) {
    x = rk4_step(x, n * h, h, tab);
    if (!x.allFinite()) {
      o.finite = false;
      o.status = "non-finite state at step " + std::to_string(n + 1);
      break;
    }
    push((n + 1) * h, x);
  }
  o.end = x;
  o.fixed_point_residual = (x - start).norm();
  if (o.finite) {
    const Eigen::VectorXd fine = period_map(start, tab, 2 * steps);
    o.halving_error = (fine - x).norm();
  }
  return o;
}

OrbitResult poincare_fixed_point(const CoeffTables& tab, const EnergyBudget& budget, const FixedPointOptions& opt,
                                 const Eigen::VectorXd* seed) {
  if (!(opt.tol > 0)) throw ArgumentError("fixed-point tolerance must be positive");
  if (!(opt.theta > 0 && opt.theta <= 1)) throw ArgumentError("damping theta must lie in (0, 1]");
  const int dim = tab.dim();
  Eigen::VectorXd x = seed ? *seed : Eigen::VectorXd::Zero(dim);
  if (x.size() != dim) throw ArgumentError("seed dimension does not match the tables");
  int projections = 0, newton = 0, it = 0;
  std::vector<double> hist;
  auto project = [&](Eigen::VectorXd& v) {
    const double nv = v.norm();
    if (budget.rho > 0 && nv > budget.rho) {
      v *= budget.rho / nv;
      ++projections;
    }
  };
  bool converged = false;
  for (; it < opt.max_iters; ++it) {
    const Eigen::VectorXd P = period_map(x, tab, opt.steps);
    const Eigen::VectorXd r = P - x;
    const double rn = r.norm();
    if (!std::isfinite(rn)) break;
    hist.push_back(rn);
    if (rn <= opt.tol) {
      converged = true;
      break;
    }
    const int n = static_cast<int>(hist.size());
    const bool stalled = n > opt.stall_window && rn > 0.5 * hist[n - 1 - opt.stall_window];
    if (stalled) {
      // Quasi-Newton on Phi(x) - x with a forward-difference Jacobian.
      const double h = 1e-6 * (1.0 + x.norm());
      Eigen::MatrixXd J(dim, dim);
      for (int c = 0; c < dim; ++c) {
        Eigen::VectorXd xp = x;
        xp[c] += h;
        J.col(c) = (period_map(xp, tab, opt.steps) - P) / h;
        J(c, c) -= 1.0;
      }
      const Eigen::VectorXd dx = -J.partialPivLu().solve(r);
      double t = 1.0;
      Eigen::VectorXd cand = x + dx;
      for (int ls = 0; ls < 12; ++ls) {
        cand = x + t * dx;
        const double rc = (period_map(cand, tab, opt.steps) - cand).norm();
        if (std::isfinite(rc) && rc < rn) break;
        t *= 0.5;
      }
      x = cand;
      ++newton;
      hist.clear();
    } else {
      x += opt.theta * r;
    }
    project(x);
  }
  OrbitResult o = integrate_period(x, tab, opt.steps, true);
  o.converged = converged && o.fixed_point_residual <= opt.tol;
  o.iterations = it;
  o.projections = projections;
  o.newton_steps = newton;
  if (o.status.empty()) o.status = o.converged ? "converged" : "not converged";
  return o;
}

namespace {

// Sixth-order centered first derivative at interior sample i (spacing h).
double d6(const std::vector<double>& f, std::size_t i, double h) {
  return (-f[i - 3] + 9 * f[i - 2] - 45 * f[i - 1] + 45 * f[i + 1] - 9 * f[i + 2] + f[i + 3]) / (60 * h);
}

}  // namespace

EnergyAudit energy_audit(const OrbitResult& orbit, const CoeffTables& tab, const EnergyBudget& budget, double slack) {
  EnergyAudit a;
  const std::size_t n = orbit.s.size();
  if (n < 2) throw ArgumentError("energy audit needs at least two samples");
  const double h = orbit.s[1] - orbit.s[0];
  double scale = 1.0;
  for (double v : orbit.rhs_dE) scale = std::max(scale, std::abs(v));

  // (a) compare against a refined orbit to estimate the differencing and integrator error.
  if (n >= 7 && orbit.finite) {
    const OrbitResult fine = integrate_period(orbit.start, tab, 2 * orbit.steps, true);
    double est = 0, err = 0;
    for (std::size_t i = 3; i + 3 < n; ++i) {
      const double fd = d6(orbit.energy, i, h);
      const double fd2 = d6(fine.energy, 2 * i, h / 2);
      est = std::max(est, std::abs(fd - fd2));
      err = std::max(err, std::abs(fd - orbit.rhs_dE[i]));
    }
    a.identity_max_error = err;
    a.identity_tolerance = 10.0 * est + 1e-12 * scale;
    a.identity_ok = err <= a.identity_tolerance;
  }

  // (b) the differential inequality at every sample.
  a.inequality_worst = -budget.C2;
  for (std::size_t i = 0; i < n; ++i)
    a.inequality_worst =
        std::max(a.inequality_worst, orbit.rhs_dE[i] + budget.decay_rate * orbit.energy[i] - budget.C2);
  a.inequality_ok = a.inequality_worst <= slack * (1.0 + budget.C2);

  // (c) rate * int H^1 <= C2 T + E(0) - E(T).
  double integral = 0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    integral += 0.5 * (orbit.dissipation[i] + orbit.dissipation[i + 1]) * (orbit.s[i + 1] - orbit.s[i]);
  a.dissipation_integral = integral;
  const double T = orbit.s.back() - orbit.s.front();
  a.dissipation_bound = (budget.C2 * T + orbit.energy.front() - orbit.energy.back()) / budget.decay_rate;
  a.dissipation_ok = integral <= a.dissipation_bound + slack * (1.0 + std::abs(a.dissipation_bound));
  return a;
}

TrapReport trap_test(const CoeffTables& tab, const EnergyBudget& budget, int starts, unsigned long seed, int steps) {
  TrapReport r;
  r.starts = starts;
  r.worst_margin = -std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g01;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int dim = tab.dim();
  for (int t = 0; t < starts; ++t) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x[i] = g01(rng);
    x *= budget.rho * std::pow(u01(rng), 1.0 / dim) / x.norm();
    const OrbitResult o = integrate_period(x, tab, steps, true);
    const double sl = 10.0 * o.halving_error * (2.0 * budget.rho + o.halving_error) + 1e-12 * (1.0 + budget.rho * budget.rho);
    r.slack = std::max(r.slack, sl);
    bool bad = !o.finite;
    for (std::size_t i = 0; i < o.s.size(); ++i) {
      const double m = o.energy[i] - budget.envelope(o.energy[0], o.s[i]);
      r.worst_margin = std::max(r.worst_margin, m);
      if (m > sl) bad = true;
    }
    if (bad) ++r.violations;
  }
  return r;
}

void write_orbit_csv(const std::string& path, const OrbitResult& orbit) {
  std::ofstream os(path);
  if (!os) throw ArgumentError("cannot write " + path);
  os << std::setprecision(17) << "s,E,dissipation,residual\n";
  for (std::size_t i = 0; i < orbit.s.size(); ++i)
    os << orbit.s[i] << ',' << orbit.energy[i] << ',' << orbit.dissipation[i] << ','
       << (orbit.states[i] - orbit.start).norm() << '\n';
}

void linear_system(const CoeffTables& tab, double s, Eigen::MatrixXd& M, Eigen::VectorXd& b) {
  const SliceTables t = tab.at(s);
  const int k = tab.k, dim = tab.dim();
  M = Eigen::MatrixXd::Zero(dim, dim);
  b = Eigen::VectorXd::Zero(dim);
  M.block(0, 0, k, k) = t.A.transpose();
  b.segment(0, k) = t.D;
  for (int n = 0; n < tab.naux; ++n) {
    const int o = (n + 1) * k;
    M.block(0, o, k, k) = t.B[n].transpose();
    M.block(o, 0, k, k) = t.E[n].transpose();
    M.block(o, o, k, k) = t.F.transpose();
    b.segment(o, k) = t.H[n];
  }
}

}  // namespace dsslab
