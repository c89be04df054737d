#include "kinklab/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kinklab/errors.hpp"
#include "kinklab/evolve.hpp"
#include "kinklab/symplectic.hpp"

namespace kinklab {

namespace {

Grid interior_of(const Grid& g) {
  if (g.n < 3) throw DomainError("assemble_Hv: grid too small");
  Grid in = g;
  in.x0 = g.x0 + g.h;
  in.n = g.n - 2;
  in.order = 2;
  return in;
}

double V_at(const KinkProfile& profile, double gamma, double x) {
  const Potential& p = profile.potential();
  return p.derivative(profile.s_at(gamma * x), 2) - p.m2();
}

// list cut: box states just above the edge are kept and flagged
constexpr double list_margin = 0.1;

}  // namespace

SymTridiagonal assemble_H(const std::vector<double>& V, double m2, double v, const Grid& interior) {
  if (!(std::abs(v) < 1)) throw DomainError("assemble_H: |v| must be < 1");
  if (V.size() != interior.n) throw DomainError("assemble_H: potential size mismatch");
  SymTridiagonal H;
  H.grid = interior;
  H.v = v;
  H.m2 = m2;
  const double c = (1 - v * v) / (interior.h * interior.h);
  H.diag.resize(interior.n);
  H.off.assign(interior.n > 0 ? interior.n - 1 : 0, -c);
  for (std::size_t i = 0; i < interior.n; ++i) H.diag[i] = 2 * c + m2 + V[i];
  return H;
}

SymTridiagonal assemble_Hv(const KinkProfile& profile, double v, const Grid& grid) {
  const double g = SolitonParams{0, v}.gamma();
  const Grid in = interior_of(grid);
  std::vector<double> V(in.n);
  for (std::size_t i = 0; i < in.n; ++i) V[i] = V_at(profile, g, in.x(i));
  return assemble_H(V, profile.potential().m2(), v, in);
}

Eigenpairs discrete_spectrum(const SymTridiagonal& H, int count) {
  const lapack_int n = lapack_int(H.diag.size());
  if (count < 1 || count > n) throw DomainError("discrete_spectrum: bad eigenpair count");
  std::vector<double> d = H.diag, e = H.off;
  e.push_back(0.0);  // dstevr wants length n workspace
  std::vector<double> w(n), z(std::size_t(n) * count);
  std::vector<lapack_int> supp(2 * std::size_t(count));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, 1,
                                         count, 0.0, &found, w.data(), z.data(), n, supp.data());
  if (info != 0 || found != count) {
    std::ostringstream os;
    os << "discrete_spectrum: dstevr failed (info " << info << ", found " << found << ")";
    throw IntegrationError(os.str(), 0.0);
  }
  Eigenpairs r;
  const double h = H.grid.h;
  for (int j = 0; j < count; ++j) {
    r.values.push_back(w[j]);
    std::vector<double> u(z.begin() + std::ptrdiff_t(j) * n, z.begin() + std::ptrdiff_t(j + 1) * n);
    double ss = 0, sum = 0;
    for (double x : u) {
      ss += x * x;
      sum += x;
    }
    const double sc = (sum < 0 ? -1.0 : 1.0) / std::sqrt(ss * h);
    for (double& x : u) x *= sc;
    r.vectors.push_back(std::move(u));
  }
  return r;
}

std::string to_string(Resonance r) {
  switch (r) {
    case Resonance::resonance: return "resonance";
    case Resonance::none: return "none";
    default: return "inconclusive";
  }
}

ResonanceResult resonance_test(const std::function<double(double)>& V, double v, double x_inf,
                               double threshold, double step) {
  if (!(std::abs(v) < 1)) throw DomainError("resonance_test: |v| must be < 1");
  if (!(step > 0) || !(threshold > 0)) throw DomainError("resonance_test: bad step or threshold");
  const double half = std::round(0.5 / step);
  if (std::abs(half * step - 0.5) > 1e-12) throw DomainError("resonance_test: 1/(2 step) must be an integer");
  const long K = std::max(long(std::ceil(std::max(x_inf, 0.5) / step - 1e-9)), long(half));
  const double X = double(K) * step;
  const double c = 1.0 / (1 - v * v);

  // psi'' = c V psi, from x = dir*X toward -dir*1/2; returns (psi, psi') at 0 and
  // the L2 norm over the unit window, all on a common scale
  struct Shot {
    double psi0, dpsi0, norm;
  };
  auto shoot = [&](int dir) {
    double y = 1, dy = 0;
    double acc = 0;  // sum of psi^2 on the window, at the current scale
    Shot s{0, 0, 0};
    const long end = K + long(half);
    auto f = [&](double x, double yy) { return c * V(x) * yy; };
    for (long k = 0; k <= end; ++k) {
      const double x = -dir * (X - double(k) * step);
      const bool in_window = std::abs(x) <= 0.5 + 1e-12;
      if (in_window) {
        const bool edge = (k == K - long(half)) || (k == end);
        acc += (edge ? 0.5 : 1.0) * y * y * step;
      }
      if (k == K) {
        s.psi0 = y;
        s.dpsi0 = dy;
      }
      if (k == end) break;
      // RK4 on (y, dy) moving by dir*step
      const double hh = dir * step;
      const double k1y = dy, k1d = f(x, y);
      const double k2y = dy + 0.5 * hh * k1d, k2d = f(x + 0.5 * hh, y + 0.5 * hh * k1y);
      const double k3y = dy + 0.5 * hh * k2d, k3d = f(x + 0.5 * hh, y + 0.5 * hh * k2y);
      const double k4y = dy + hh * k3d, k4d = f(x + hh, y + hh * k3y);
      y += hh / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
      dy += hh / 6 * (k1d + 2 * k2d + 2 * k3d + k4d);
      if (!std::isfinite(y) || !std::isfinite(dy)) throw IntegrationError("resonance_test: overflow", x);
      const double mag = std::max(std::abs(y), std::abs(dy));
      if (mag > 1e100) {
        y /= mag;
        dy /= mag;
        acc /= mag * mag;
        if (k >= K) {
          s.psi0 /= mag;
          s.dpsi0 /= mag;
        }
      }
    }
    s.norm = std::sqrt(acc);
    return s;
  };
  // shoot(+1) starts at -X and runs right; shoot(-1) starts at +X and runs left
  const Shot L = shoot(+1), R = shoot(-1);
  ResonanceResult r;
  r.x_inf = X;
  r.threshold = threshold;
  const double den = L.norm * R.norm;
  if (!(den > 0) || !std::isfinite(den)) throw IntegrationError("resonance_test: degenerate normalization", 0.0);
  r.wronskian = (L.psi0 * R.dpsi0 - L.dpsi0 * R.psi0) / den;
  const double aw = std::abs(r.wronskian);
  r.verdict = aw < threshold ? Resonance::resonance : (aw > 10 * threshold ? Resonance::none : Resonance::inconclusive);
  return r;
}

double potential_support(const KinkProfile& profile, double v, double tol) {
  const double g = SolitonParams{0, v}.gamma();
  const Potential& p = profile.potential();
  double X = 0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double V = p.derivative(profile.s()[i], 2) - p.m2();
    if (std::abs(V) > tol) X = std::max(X, std::abs(profile.x(i)));
  }
  if (X >= profile.L() - profile.h())
    throw DomainError("potential_support: profile too short for the requested tail tolerance");
  return (X + profile.h()) / g;
}

ResonanceResult resonance_test(const KinkProfile& profile, double v, double threshold, double step) {
  const double g = SolitonParams{0, v}.gamma();
  const double X = potential_support(profile, v);
  return resonance_test([&](double x) { return V_at(profile, g, x); }, v, X, threshold, step);
}

SpectralReport spectral_report(const KinkProfile& profile, double v, const SpectralOptions& opt) {
  SpectralReport rep;
  rep.v = v;
  const double m2 = profile.potential().m2();
  rep.m2 = m2;
  const double g = SolitonParams{0, v}.gamma();
  const Grid gc = Grid::centered(opt.L, opt.h, 2);
  const Grid gf = Grid::centered(opt.L, opt.h / 2, 2);
  const Eigenpairs ec = discrete_spectrum(assemble_Hv(profile, v, gc), opt.count);
  const SymTridiagonal Hf = assemble_Hv(profile, v, gf);
  Eigenpairs ef = discrete_spectrum(Hf, opt.count);
  const double edge = m2 - opt.edge_gap;
  for (int j = 0; j < opt.count; ++j) {
    const double lr = (4 * ef.values[j] - ec.values[j]) / 3;
    if (lr > m2 + list_margin) break;
    rep.eigenvalues.push_back(lr);
    rep.eigenvalues_coarse.push_back(ec.values[j]);
    rep.eigenvalues_fine.push_back(ef.values[j]);
    rep.discrete.push_back(lr < edge);
  }
  for (double l : ec.values)
    if (l > opt.zero_tol && l < edge) ++rep.internal_modes_coarse;
  for (double l : ef.values)
    if (l > opt.zero_tol && l < edge) ++rep.internal_modes_fine;
  rep.zero_present = !rep.eigenvalues.empty() && std::abs(rep.eigenvalues.front()) <= opt.zero_tol;

  // ground state against psi_v' = gamma s'(gamma x)
  {
    const auto& u = ef.vectors[0];
    double dot = 0, nn = 0;
    for (std::size_t i = 0; i < Hf.grid.n; ++i) {
      const double d = g * profile.eval(g * Hf.grid.x(i)).s1;
      dot += u[i] * d;
      nn += d * d;
    }
    rep.groundstate_overlap = std::abs(dot) * Hf.grid.h / std::sqrt(nn * Hf.grid.h);
  }

  rep.resonance = resonance_test(profile, v, opt.resonance_threshold, 1e-3);
  const ResonanceResult r2 = resonance_test(profile, v, opt.resonance_threshold, 5e-4);

  bool ok = true;
  if (!rep.zero_present) {
    ok = false;
    rep.diagnostics.push_back("no eigenvalue within zero_tol of 0");
  }
  if (rep.internal_modes_coarse != rep.internal_modes_fine)
    rep.diagnostics.push_back("internal mode count differs between h and h/2");
  for (std::size_t j = 0; j < rep.eigenvalues.size(); ++j)
    if (rep.discrete[j] && rep.eigenvalues[j] > opt.zero_tol) {
      ok = false;
      std::ostringstream os;
      os << "internal mode at " << rep.eigenvalues[j];
      rep.diagnostics.push_back(os.str());
    }
  if (rep.internal_modes_coarse || rep.internal_modes_fine) ok = false;
  if (rep.resonance.verdict != r2.verdict) {
    ok = false;
    rep.resonance.verdict = Resonance::inconclusive;
    rep.diagnostics.push_back("resonance verdict changes with the shooting step");
  }
  if (rep.resonance.verdict != Resonance::none) {
    ok = false;
    std::ostringstream os;
    os << "threshold: " << to_string(rep.resonance.verdict) << " (normalized Wronskian " << rep.resonance.wronskian
       << ")";
    rep.diagnostics.push_back(os.str());
  }
  rep.u2 = ok;
  rep.fine_pairs = std::move(ef);
  rep.fine_grid = Hf.grid;
  return rep;
}

U2Certificate certify_U2(const Potential& p, const std::vector<double>& v_list, const SpectralOptions& opt) {
  U2Certificate c;
  const KinkProfile profile = build_profile(p, 30, 0.005);
  c.base = spectral_report(profile, 0.0, opt);
  bool ok = c.base.u2;
  if (c.base.internal_modes_coarse != c.base.internal_modes_fine ||
      c.base.resonance.verdict == Resonance::inconclusive)
    c.inconclusive = true;
  for (const auto& d : c.base.diagnostics) c.diagnostics.push_back("v=0: " + d);
  for (double v : v_list) {
    SpectralReport r = spectral_report(profile, v, opt);
    double worst = 0;
    std::size_t nd0 = 0, nd = 0;
    for (std::size_t j = 0; j < c.base.eigenvalues.size(); ++j)
      if (c.base.discrete[j]) {
        ++nd0;
        if (j < r.eigenvalues.size()) worst = std::max(worst, std::abs(r.eigenvalues[j] - c.base.eigenvalues[j]));
        else worst = INFINITY;
      }
    for (std::size_t j = 0; j < r.eigenvalues.size(); ++j) nd += r.discrete[j] ? 1 : 0;
    if (nd != nd0) worst = INFINITY;
    c.discrepancy.push_back(worst);
    if (!(worst <= 1e-4)) {
      ok = false;
      std::ostringstream os;
      os << "v=" << v << ": spectrum differs from v=0 by " << worst;
      c.diagnostics.push_back(os.str());
    }
    if (r.resonance.verdict != c.base.resonance.verdict) {
      ok = false;
      std::ostringstream os;
      os << "v=" << v << ": resonance verdict " << to_string(r.resonance.verdict) << " differs from v=0";
      c.diagnostics.push_back(os.str());
    }
    c.boosted.push_back(std::move(r));
  }
  c.pass = ok && !c.inconclusive;
  return c;
}

RootSpaceReport root_space_check(const KinkProfile& profile, double v, const Grid& grid,
                                 const SpectralOptions& opt, double tol) {
  RootSpaceReport r;
  r.v = v;
  const TangentFrame f = tangent_frame(profile, v, grid);
  const LinearOperator A(profile, v, v, grid);
  r.residual_tau1 = norm_E(A.apply(f.tau1));
  r.residual_tau2 = norm_E(A.apply(f.tau2) - f.tau1);
  r.tangent_ok = r.residual_tau1 <= tol && r.residual_tau2 <= tol;

  std::vector<double> d(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) d[i] = f.tau1.Psi[i];  // -psi_v'
  std::vector<double> d2(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) d2[i] = d[i] * d[i];
  r.kernel_norm = trapezoid(d2, grid.h);
  r.fredholm_ok = r.kernel_norm > 1e-6;

  const SpectralReport s = spectral_report(profile, v, opt);
  const double g = f.gamma;
  for (std::size_t j = 0; j < s.eigenvalues.size(); ++j)
    if (s.discrete[j] && s.eigenvalues[j] > opt.zero_tol) {
      r.internal_modes.push_back(s.eigenvalues[j]);
      r.obstruction.push_back(std::sqrt(s.eigenvalues[j]) / g);
    }
  r.no_modes = r.internal_modes.empty();
  return r;
}

TuningResult tune_flat_well(double a, double m, double delta, const std::vector<double>& heights,
                            const std::vector<double>& v_list, const SpectralOptions& opt) {
  TuningResult res;
  int best = -1;
  for (double hb : heights) {
    TuningCandidate c;
    c.barrier_height = hb;
    try {
      const Potential p = make_flat_well(a, m, delta, hb);
      if (!check_U1(p, 1e-10).pass()) {
        c.note = "check_U1 fails";
        res.candidates.push_back(c);
        continue;
      }
      c.constructed = true;
      const U2Certificate cert = certify_U2(p, v_list, opt);
      c.certified = cert.pass;
      c.wronskian = cert.base.resonance.wronskian;
      c.internal_modes = cert.base.internal_modes_fine;
      const KinkProfile prof = build_profile(p, 30, 0.005);
      for (double s : prof.s()) c.v_depth = std::max(c.v_depth, std::abs(p.derivative(s, 2) - p.m2()));
      if (!cert.diagnostics.empty()) c.note = cert.diagnostics.front();
    } catch (const std::exception& e) {
      c.note = e.what();
    }
    res.candidates.push_back(c);
    if (c.certified && (best < 0 || std::abs(c.wronskian) > std::abs(res.candidates[best].wronskian)))
      best = int(res.candidates.size()) - 1;
  }
  if (best < 0) return res;
  res.barrier_height = res.candidates[best].barrier_height;
  const Potential p = make_flat_well(a, m, delta, res.barrier_height);
  res.coarse = certify_U2(p, v_list, opt);
  SpectralOptions fine = opt;
  fine.h = opt.h / 2;
  res.fine = certify_U2(p, v_list, fine);
  res.found = res.coarse.pass && res.fine.pass;
  return res;
}

}  // namespace kinklab
