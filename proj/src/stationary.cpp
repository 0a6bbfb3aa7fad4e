#include "dsslab/stationary.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace dsslab {

Eigen::VectorXd stationary_residual(const Eigen::VectorXd& x, const CoeffTables& tab) {
  if (!tab.stationary()) throw ArgumentError("stationary residual needs s-independent tables");
  return rhs(x, tab.slices[0], tab);
}

Eigen::MatrixXd stationary_jacobian(const Eigen::VectorXd& x, const CoeffTables& tab) {
  const int dim = tab.dim();
  const double h = 1e-6 * (1.0 + x.norm());
  const Eigen::VectorXd P0 = stationary_residual(x, tab);
  Eigen::MatrixXd J(dim, dim);
  for (int c = 0; c < dim; ++c) {
    Eigen::VectorXd xp = x;
    xp[c] += h;
    J.col(c) = (stationary_residual(xp, tab) - P0) / h;
  }
  return J;
}

StationaryReport solve_stationary(const CoeffTables& tab, double C2, double tol, int max_iters) {
  if (!(tol > 0)) throw ArgumentError("tolerance must be positive");
  StationaryReport r;
  r.sphere_radius = 8.0 * std::sqrt(std::max(C2, 0.0));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(tab.dim());
  Eigen::VectorXd P = stationary_residual(x, tab);
  double pn = P.norm();
  int it = 0;
  for (; it < max_iters && pn > tol; ++it) {
    const Eigen::MatrixXd J = stationary_jacobian(x, tab);
    const Eigen::VectorXd dx = -J.partialPivLu().solve(P);
    bool accepted = false;
    double t = 1.0;
    for (int ls = 0; ls < 20 && dx.allFinite(); ++ls, t *= 0.5) {
      const Eigen::VectorXd cand = x + t * dx;
      const Eigen::VectorXd Pc = stationary_residual(cand, tab);
      if (Pc.norm() < pn) {
        x = cand;
        P = Pc;
        pn = Pc.norm();
        accepted = true;
        break;
      }
    }
    if (accepted) continue;
    // Damped gradient flow on |P|^2 / 2 with backtracking.
    const Eigen::VectorXd g = J.transpose() * P;
    double tau = pn * pn / std::max(g.squaredNorm(), 1e-300);
    for (int ls = 0; ls < 40; ++ls, tau *= 0.5) {
      const Eigen::VectorXd cand = x - tau * g;
      const Eigen::VectorXd Pc = stationary_residual(cand, tab);
      if (Pc.norm() < pn) {
        x = cand;
        P = Pc;
        pn = Pc.norm();
        ++r.gradient_steps;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  r.x = x;
  r.residual = pn;
  r.norm = x.norm();
  r.iterations = it;
  r.converged = pn <= tol;
  r.in_sphere = r.norm <= r.sphere_radius || r.norm == 0;
  r.status = r.converged ? (r.in_sphere ? "converged" : "converged outside sphere") : "not converged";
  return r;
}

SphereCertificate sphere_certificate(const CoeffTables& tab, double C2, int samples, unsigned long seed,
                                     double radius) {
  if (samples < 1) throw ArgumentError("at least one sample is required");
  SphereCertificate c;
  c.samples = samples;
  c.C2 = C2;
  c.radius = radius < 0 ? 8.0 * std::sqrt(std::max(C2, 0.0)) : radius;
  c.limit = 1e-6 * (1.0 + C2);
  c.worst = -std::numeric_limits<double>::infinity();
  c.worst_sign = -std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g01;
  const int dim = tab.dim();
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x[i] = g01(rng);
    x *= c.radius / x.norm();
    const double px = stationary_residual(x, tab).dot(x);
    const double r2 = x.squaredNorm();
    c.worst = std::max(c.worst, px + r2 / 32.0 - C2);
    c.worst_sign = std::max(c.worst_sign, px);
    if (r2 > 0) c.worst_cubic = std::max(c.worst_cubic, std::abs(x.dot(rhs_quadratic(x, tab))) / (r2 * std::sqrt(r2)));
  }
  return c;
}

namespace {

// (a . grad f, g) from the gradient array of f.
double adv(const Grid& grid, const VecArray& a, const GradArray& gf, const VecArray& g) {
  double s = 0;
  for (std::size_t p = 0; p < grid.size(); ++p)
    for (int r = 0; r < 3; ++r)
      s += (a.c[0][p] * gf.g[3 * r][p] + a.c[1][p] * gf.g[3 * r + 1][p] + a.c[2][p] * gf.g[3 * r + 2][p]) *
           g.c[r][p];
  return s * grid.weight();
}

double gradpair(const Grid& grid, const GradArray& a, const GradArray& b) {
  double s = 0;
  for (int c = 0; c < 9; ++c)
    for (std::size_t p = 0; p < grid.size(); ++p) s += a.g[c][p] * b.g[c][p];
  return s * grid.weight();
}

}  // namespace

Eigen::VectorXd weak_form_residual(const GalerkinBasis& basis, const CutoffBackground& W,
                                   const std::vector<const CutoffBackground*>& aux, const Eigen::VectorXd& x) {
  const Grid& g = basis.grid;
  const int k = basis.k();
  const int naux = static_cast<int>(aux.size());
  if (x.size() != k * (1 + naux)) throw ArgumentError("state dimension does not match the basis");
  const std::size_t n = g.size();
  VecArray Y(n);
  for (std::size_t p = 0; p < n; ++p) Y.set(p, g.point(p));

  const VecArray& Wf = W.slice(0).W;
  const VecArray& LW = W.slice(0).LW;
  const VecArray U = basis.combine(x.data());
  const VecArray Um = basis.combine_molli(x.data());
  const GradArray gU = basis.combine_grad(x.data());
  std::vector<VecArray> G, Gm;
  std::vector<GradArray> gG;
  for (int m = 0; m < naux; ++m) {
    const double* c = x.data() + (m + 1) * k;
    G.push_back(basis.combine(c));
    Gm.push_back(basis.combine_molli(c));
    gG.push_back(basis.combine_grad(c));
  }
  Eigen::VectorXd out(x.size());
  for (int j = 0; j < k; ++j) {
    const VecArray& h = basis.h[j];
    const GradArray& gh = basis.grad[j];
    double r = -gradpair(g, gU, gh) + inner(g, U, h) + adv(g, Y, gU, h) - adv(g, Um, gU, h) - adv(g, Wf, gU, h) +
               adv(g, U, gh, Wf) - inner(g, LW, h) + adv(g, Wf, gh, Wf);
    for (int m = 0; m < naux; ++m) {
      const VecArray& E = aux[m]->slice(0).W;
      r += adv(g, Gm[m], gG[m], h) + adv(g, E, gG[m], h) - adv(g, G[m], gh, E) - adv(g, E, gh, E);
    }
    out[j] = r;
    for (int m = 0; m < naux; ++m) {
      const VecArray& E = aux[m]->slice(0).W;
      const VecArray& LE = aux[m]->slice(0).LW;
      out[(m + 1) * k + j] = -gradpair(g, gG[m], gh) + inner(g, G[m], h) + adv(g, Y, gG[m], h) -
                             adv(g, Um, gG[m], h) + adv(g, Gm[m], gU, h) - adv(g, Wf, gG[m], h) +
                             adv(g, U, gh, E) + adv(g, E, gU, h) - adv(g, G[m], gh, Wf) - inner(g, LE, h) +
                             adv(g, Wf, gh, E) - adv(g, E, gh, Wf);
    }
  }
  return out;
}

}  // namespace dsslab
