#include "kinklab/symplectic.hpp"

#include <cmath>
#include <sstream>

#include "kinklab/errors.hpp"

namespace kinklab {

double omega(const PerturbationState& X1, const PerturbationState& X2) {
  if (!X1.grid.same_nodes(X2.grid, 1e-9)) throw DomainError("omega: grid mismatch");
  const std::size_t n = X1.Psi.size();
  if (n == 0) return 0.0;
  auto term = [&](std::size_t i) { return X1.Psi[i] * X2.Pi[i] - X1.Pi[i] * X2.Psi[i]; };
  double s = 0.5 * (term(0) + term(n - 1));
  for (std::size_t i = 1; i + 1 < n; ++i) s += term(i);
  return s * X1.grid.h;
}

namespace {

double l2(const PerturbationState& X) {
  double s = 0;
  for (std::size_t i = 0; i < X.Psi.size(); ++i) s += X.Psi[i] * X.Psi[i] + X.Pi[i] * X.Pi[i];
  return std::sqrt(s * X.grid.h);
}

}  // namespace

PerturbationState soliton_moving(const KinkProfile& profile, double v, const Grid& grid) {
  const double g = SolitonParams{0, v}.gamma();
  PerturbationState S(grid);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const KinkPoint k = profile.eval(g * grid.x(i));
    S.Psi[i] = k.s;
    S.Pi[i] = -v * g * k.s1;
  }
  return S;
}

TangentFrame tangent_frame(const KinkProfile& profile, double v, const Grid& grid) {
  TangentFrame f;
  f.v = v;
  const double g = SolitonParams{0, v}.gamma();
  f.gamma = g;
  const double g2 = g * g, g3 = g2 * g, g4 = g3 * g, g5 = g4 * g, g6 = g5 * g, g7 = g6 * g;
  const double v2 = v * v, v3 = v2 * v;
  for (auto* X : {&f.tau1, &f.tau2, &f.dv_tau1, &f.dv_tau2, &f.dy_tau1, &f.dy_tau2})
    *X = PerturbationState(grid);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double y = grid.x(i);
    const KinkPoint k = profile.eval(g * y);
    const double s1 = k.s1, s2 = k.s2, s3 = k.s3;
    f.tau1.Psi[i] = -g * s1;
    f.tau1.Pi[i] = v * g2 * s2;
    f.tau2.Psi[i] = v * g3 * y * s1;
    f.tau2.Pi[i] = -g3 * s1 - v2 * g4 * y * s2;
    f.dv_tau1.Psi[i] = -v * g3 * s1 - v * g4 * y * s2;
    f.dv_tau1.Pi[i] = (g2 + 2 * v2 * g4) * s2 + v2 * g5 * y * s3;
    f.dv_tau2.Psi[i] = (g3 + 3 * v2 * g5) * y * s1 + v2 * g6 * y * y * s2;
    f.dv_tau2.Pi[i] = -3 * v * g5 * s1 - (v * g6 + 2 * v * g4 + 4 * v3 * g6) * y * s2 - v3 * g7 * y * y * s3;
    f.dy_tau1.Psi[i] = -g2 * s2;
    f.dy_tau1.Pi[i] = v * g3 * s3;
    f.dy_tau2.Psi[i] = v * g3 * s1 + v * g4 * y * s2;
    f.dy_tau2.Pi[i] = -g4 * (1 + v2) * s2 - v2 * g5 * y * s3;
  }
  f.omega12 = omega(f.tau1, f.tau2);
  if (std::abs(f.omega12) < 1e-12) throw DomainError("tangent frame: degenerate Gram value");
  f.p = {{{0.0, -1.0 / f.omega12}, {1.0 / f.omega12, 0.0}}};
  return f;
}

Split projector_split(const PerturbationState& X, const TangentFrame& f) {
  if (std::abs(f.omega12) < 1e-12) throw DomainError("projector_split: degenerate Gram value");
  const double o1 = omega(f.tau1, X), o2 = omega(f.tau2, X);
  const double c1 = f.p[0][0] * o1 + f.p[0][1] * o2;
  const double c2 = f.p[1][0] * o1 + f.p[1][1] * o2;
  Split s;
  s.Xd = c1 * f.tau1;
  s.Xd.axpy(c2, f.tau2);
  s.Xc = X - s.Xd;
  return s;
}

ProjectionResult project(const FieldState& Y, const KinkProfile& profile, const SolitonParams& guess,
                         const ProjectOptions& opt) {
  ProjectionResult r;
  double b = guess.b, v = guess.v;
  if (!(std::abs(v) < opt.v_cap)) throw ProjectionError("project: initial guess outside the velocity cap");

  auto residuals = [&](double bb, double vv, PerturbationState& X, TangentFrame& f, double F[2]) {
    const Grid gy = Y.grid.shifted(bb);
    f = tangent_frame(profile, vv, gy);
    X = soliton_moving(profile, vv, gy);
    for (std::size_t i = 0; i < gy.n; ++i) {
      X.Psi[i] = Y.psi[i] - X.Psi[i];
      X.Pi[i] = Y.pi[i] - X.Pi[i];
    }
    F[0] = omega(X, f.tau1);
    F[1] = omega(X, f.tau2);
  };

  PerturbationState X;
  TangentFrame f;
  double F[2];
  residuals(b, v, X, f, F);
  auto converged = [&] {
    const double nx = l2(X);
    r.scale1 = opt.rel_tol * nx * l2(f.tau1) + 1e-15 * l2(f.tau1) * l2(f.tau1);
    r.scale2 = opt.rel_tol * nx * l2(f.tau2) + 1e-15 * l2(f.tau2) * l2(f.tau2);
    return std::abs(F[0]) <= r.scale1 && std::abs(F[1]) <= r.scale2;
  };
  int it = 0;
  bool ok = converged();
  while (!ok && it < opt.max_iterations) {
    ++it;
    // dF_j/db = -Omega(tau1,tau_j) - Omega(X, tau_j'),  dF_j/dv = -Omega(tau2,tau_j) + Omega(X, d_v tau_j)
    const double J00 = -omega(f.tau1, f.tau1) - omega(X, f.dy_tau1);
    const double J01 = -omega(f.tau2, f.tau1) + omega(X, f.dv_tau1);
    const double J10 = -omega(f.tau1, f.tau2) - omega(X, f.dy_tau2);
    const double J11 = -omega(f.tau2, f.tau2) + omega(X, f.dv_tau2);
    const double det = J00 * J11 - J01 * J10;
    if (!(std::abs(det) > 0)) throw ProjectionError("project: singular Jacobian");
    const double db = -(J11 * F[0] - J01 * F[1]) / det;
    const double dv = -(-J10 * F[0] + J00 * F[1]) / det;
    const double r0 = std::hypot(F[0] / l2(f.tau1), F[1] / l2(f.tau2));
    double lam = 1.0;
    PerturbationState Xn;
    TangentFrame fn;
    double Fn[2] = {0, 0};
    for (int h = 0; h < 30; ++h) {
      const double vn = v + lam * dv;
      if (std::abs(vn) < opt.v_cap) {
        residuals(b + lam * db, vn, Xn, fn, Fn);
        const double r1 = std::hypot(Fn[0] / l2(fn.tau1), Fn[1] / l2(fn.tau2));
        if (r1 <= r0 || h == 29) break;
      }
      lam *= 0.5;
    }
    if (!(std::abs(v + lam * dv) < opt.v_cap)) {
      std::ostringstream os;
      os << "project: velocity left the cap |v| < " << opt.v_cap;
      throw ProjectionError(os.str());
    }
    b += lam * db;
    v += lam * dv;
    X = std::move(Xn);
    f = std::move(fn);
    F[0] = Fn[0];
    F[1] = Fn[1];
    ok = converged();
    // steps at rounding level cannot improve further
    if (!ok && std::abs(lam * db) < 1e-15 * std::max(1.0, std::abs(b)) && std::abs(lam * dv) < 1e-16) break;
  }
  r.sigma = {b, v};
  r.X = std::move(X);
  r.residual1 = F[0];
  r.residual2 = F[1];
  r.iterations = it;
  if (!ok && !(std::abs(F[0]) <= 100 * r.scale1 && std::abs(F[1]) <= 100 * r.scale2)) {
    std::ostringstream os;
    os << "project: Newton did not converge in " << it << " iterations (residuals " << F[0] << ", "
       << F[1] << ")";
    throw ProjectionError(os.str());
  }
  return r;
}

std::vector<double> nonlinearity_N(double v, const std::vector<double>& Psi, const KinkProfile& profile,
                                   const Grid& grid) {
  const double g = SolitonParams{0, v}.gamma();
  const Potential& p = profile.potential();
  std::vector<double> N(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) N[i] = p.force_remainder(profile.s_at(g * grid.x(i)), Psi[i]);
  return N;
}

ModulationRates modulation_rhs(const PerturbationState& X, const TangentFrame& f, const KinkProfile& profile) {
  const auto N = nonlinearity_N(f.v, X.Psi, profile, X.grid);
  PerturbationState NN(X.grid);
  NN.Pi = N;
  const double w = f.omega12;
  const double n1 = omega(NN, f.tau1), n2 = omega(NN, f.tau2);
  const double a1 = omega(X, f.dv_tau1), a2 = omega(X, f.dv_tau2);
  const double d1 = omega(X, f.dy_tau1), d2 = omega(X, f.dy_tau2);
  ModulationRates r;
  r.D = d1 * a2 + (w + a1) * (w + d2);
  if (std::abs(r.D) < 1e-3 * w * w) throw ProjectionError("modulation_rhs: degenerate frame determinant");
  r.cdot = (w * n2 + a1 * n2 - a2 * n1) / r.D;
  r.vdot = (-w * n1 - d2 * n1 - d1 * n2) / r.D;
  return r;
}

}  // namespace kinklab
