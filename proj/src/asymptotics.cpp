#include "kinklab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kinklab/errors.hpp"
#include "kinklab/evolve.hpp"
#include "kinklab/symplectic.hpp"

namespace kinklab {

namespace {

// v(t) = v+ + A (1+t)^p: profile out (v+, A) by linear least squares, scan p
struct TailModel {
  double v_plus = 0, A = 0, p = 0, rms = 0;
  bool ok = false;
};

TailModel fit_tail_model(const std::vector<double>& t, const std::vector<double>& v) {
  TailModel best;
  best.rms = INFINITY;
  const std::size_t n = t.size();
  auto solve = [&](double p, TailModel& m) {
    double s1 = 0, sg = 0, sgg = 0, sv = 0, sgv = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = std::pow(1 + t[i], p);
      s1 += 1;
      sg += g;
      sgg += g * g;
      sv += v[i];
      sgv += g * v[i];
    }
    const double det = s1 * sgg - sg * sg;
    if (!(std::abs(det) > 1e-300)) return false;
    m.v_plus = (sgg * sv - sg * sgv) / det;
    m.A = (s1 * sgv - sg * sv) / det;
    m.p = p;
    double r = 0;
    for (std::size_t i = 0; i < n; ++i) r += std::pow(v[i] - m.v_plus - m.A * std::pow(1 + t[i], p), 2);
    m.rms = std::sqrt(r / double(n));
    return true;
  };
  for (double p = -6.0; p <= -0.1 + 1e-12; p += 0.01) {
    TailModel m;
    if (solve(p, m) && m.rms < best.rms) best = m;
  }
  // golden-section polish
  double lo = best.p - 0.01, hi = best.p + 0.01;
  for (int k = 0; k < 60; ++k) {
    const double a = hi - 0.618033988749895 * (hi - lo), b = lo + 0.618033988749895 * (hi - lo);
    TailModel ma, mb;
    solve(a, ma);
    solve(b, mb);
    if (ma.rms < mb.rms) hi = b;
    else lo = a;
  }
  TailModel m;
  if (solve(0.5 * (lo + hi), m) && m.rms <= best.rms) best = m;
  best.ok = std::isfinite(best.rms);
  return best;
}

PerturbationState transversal_lab(const FieldState& Y, const KinkProfile& profile, double b, double v) {
  const FieldState S = soliton_state(profile, {b, v}, Y.grid);
  PerturbationState Z(Y.grid);
  for (std::size_t i = 0; i < Y.grid.n; ++i) {
    Z.Psi[i] = Y.psi[i] - S.psi[i];
    Z.Pi[i] = Y.pi[i] - S.pi[i];
  }
  return Z;
}

}  // namespace

AsymptoticsResult extract_asymptotics(const RunHistory& run, const KinkProfile& profile) {
  const std::size_t n = run.t.size();
  if (run.field_snapshots.size() != n || run.b.size() != n || run.v.size() != n || run.cdot.size() != n ||
      run.vdot.size() != n)
    throw DomainError("extract_asymptotics: need a tracked run with lab snapshots at every sample");
  if (n < 16) throw DomainError("extract_asymptotics: insufficient snapshot density (fewer than 16 samples)");
  for (std::size_t k = 0; k + 1 < n; ++k)
    if (!(run.t[k + 1] - run.t[k] <= 1.0 + 1e-12))
      throw DomainError("extract_asymptotics: insufficient snapshot density (gap above 1)");

  AsymptoticsResult r;
  const double T = run.t.back();
  const Grid& g = run.field_snapshots.front().grid;
  const Potential& p = profile.potential();
  const double m2 = p.m2();

  // soliton parameters
  std::vector<double> tw, vw, bw;
  for (std::size_t k = 0; k < n; ++k)
    if (run.t[k] >= T / 4 - 1e-12) {
      tw.push_back(run.t[k]);
      vw.push_back(run.v[k]);
      bw.push_back(run.b[k]);
    }
  const double vspread = *std::max_element(vw.begin(), vw.end()) - *std::min_element(vw.begin(), vw.end());
  r.v_tail.t1 = T / 4;
  r.v_tail.t2 = T;
  r.v_tail.samples = int(tw.size());
  if (vspread <= 1e-14) {
    r.v_plus = vw.back();
    r.v_tail.exponent = NAN;
    r.warnings.push_back("v(t) constant on the tail window; no decay to fit");
  } else {
    const TailModel m = fit_tail_model(tw, vw);
    r.v_plus = m.v_plus;
    r.v_tail.exponent = m.p;
    r.v_tail.intercept = std::log(std::abs(m.A));
    r.v_tail.residual = m.rms / vspread;
    if (m.p >= -0.1 + 1e-6) r.warnings.push_back("v(t) tail fit hit the edge of the exponent range");
  }
  {
    double s = 0;
    for (std::size_t k = 0; k < tw.size(); ++k) s += bw[k] - r.v_plus * tw[k];
    r.q_plus = s / double(tw.size());
    double e = 0;
    for (std::size_t k = 0; k < tw.size(); ++k) e += std::pow(bw[k] - r.q_plus - r.v_plus * tw[k], 2);
    r.b_fit_residual = std::sqrt(e / double(tw.size()));
    if (r.b_fit_residual > 1e-4) {
      std::ostringstream os;
      os << "b(t) tail fit residual " << r.b_fit_residual << " above 1e-4";
      r.warnings.push_back(os.str());
    }
  }

  // Phi^t = W0(-t) Z(t) and the Duhamel integrand W0(-s) R(s)
  const FreeKG W0(g, p.m());
  std::vector<PerturbationState> phi;
  phi.reserve(n);
  // composite Simpson weights (trapezoid on a leftover or uneven interval)
  std::vector<double> wq(n, 0.0);
  {
    std::size_t k = 0;
    while (k + 2 < n) {
      const double h1 = run.t[k + 1] - run.t[k], h2 = run.t[k + 2] - run.t[k + 1];
      if (std::abs(h1 - h2) > 1e-9 * h1) break;
      wq[k] += h1 / 3;
      wq[k + 1] += 4 * h1 / 3;
      wq[k + 2] += h1 / 3;
      k += 2;
    }
    for (; k + 1 < n; ++k) {
      const double h = run.t[k + 1] - run.t[k];
      wq[k] += 0.5 * h;
      wq[k + 1] += 0.5 * h;
    }
  }
  PerturbationState Q;
  for (std::size_t k = 0; k < n; ++k) {
    const FieldState& Y = run.field_snapshots[k];
    const double b = run.b[k], v = run.v[k];
    PerturbationState Z = transversal_lab(Y, profile, b, v);
    if (k == 0) Q = Z;
    // R = -cdot tau1 - vdot tau2 + (0, F(psi_S + Z1) - F(psi_S) + m^2 Z1)
    const TangentFrame f = tangent_frame(profile, v, g.shifted(b));
    PerturbationState R(g);
    const double gam = f.gamma;
    for (std::size_t i = 0; i < g.n; ++i) {
      const double s = profile.s_at(gam * (g.x(i) - b));
      const double dF = p.force(s + Z.Psi[i]) - p.force(s);
      R.Psi[i] = -run.cdot[k] * f.tau1.Psi[i] - run.vdot[k] * f.tau2.Psi[i];
      R.Pi[i] = -run.cdot[k] * f.tau1.Pi[i] - run.vdot[k] * f.tau2.Pi[i] + dF + m2 * Z.Psi[i];
    }
    Q.axpy(wq[k], W0.apply(R, -run.t[k], 0.0));
    phi.push_back(W0.apply(Z, -run.t[k], 0.0));
  }

  r.phi = phi.back();
  r.phi_norm = norm_E(r.phi);
  r.quadrature_mismatch = r.phi_norm > 0 ? norm_E(Q - r.phi) / r.phi_norm : norm_E(Q);

  r.t = run.t;
  r.increment.assign(n, NAN);
  for (std::size_t k = 0; k < n; ++k) {
    const double t2 = 2 * run.t[k];
    if (run.t[k] <= 0 || t2 > T + 1e-9) continue;
    const auto it = std::lower_bound(run.t.begin(), run.t.end(), t2 - 1e-9);
    if (it == run.t.end()) continue;
    const std::size_t j = std::size_t(it - run.t.begin());
    if (std::abs(run.t[j] - t2) > 1e-9 * std::max(1.0, t2)) continue;
    r.increment[k] = norm_E(phi[j] - phi[k]);
  }

  if (r.phi_norm <= 1e-12) {
    r.remainder.assign(n, 0.0);
    r.remainder_fit.t1 = T / 4;
    r.remainder_fit.t2 = T;
    r.remainder_fit.exponent = NAN;
    r.increment_fit.t1 = T / 8;
    r.increment_fit.t2 = T / 2;
    r.increment_fit.exponent = NAN;
    r.warnings.push_back("zero transversal component; remainder identically zero");
    return r;
  }
  r.increment_fit = fit_power_law(run.t, r.increment, T / 8, T / 2);
  const double q = r.increment_fit.exponent;
  double dlast = NAN;
  for (std::size_t k = 0; k < n; ++k)
    if (std::abs(2 * run.t[k] - T) <= 1e-9 * T) dlast = r.increment[k];
  if (!std::isfinite(dlast)) dlast = std::exp(r.increment_fit.intercept + q * std::log1p(T / 2));
  if (q < 0) {
    const double rho = std::pow(2.0, q);
    r.tail_estimate = dlast * rho / (1 - rho);
  } else {
    r.tail_estimate = INFINITY;
    r.warnings.push_back("remainder increments do not decay; tail estimate unbounded");
  }
  r.tail_ratio = r.tail_estimate / r.phi_norm;
  r.remainder.resize(n);
  for (std::size_t k = 0; k < n; ++k) r.remainder[k] = norm_E(phi.back() - phi[k]) + r.tail_estimate;
  if (std::isfinite(r.tail_estimate)) r.remainder_fit = fit_power_law(run.t, r.remainder, T / 4, T);
  else r.remainder_fit.exponent = NAN;
  return r;
}

}  // namespace kinklab
