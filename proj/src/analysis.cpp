#include "kinklab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "kinklab/errors.hpp"

namespace kinklab {

DecayFit fit_power_law(const std::vector<double>& t, const std::vector<double>& y, double t1, double t2) {
  if (t.size() != y.size()) throw DomainError("fit_power_law: t and y differ in length");
  DecayFit f;
  f.t1 = t1;
  f.t2 = t2;
  const double eps = 1e-9 * std::max(1.0, std::abs(t2));
  std::vector<double> X, Y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t1 - eps || t[i] > t2 + eps) continue;
    if (!(y[i] > 0) || !std::isfinite(y[i])) {
      std::ostringstream os;
      os << "fit_power_law: nonpositive value " << y[i] << " at sample " << i << " (t=" << t[i] << ")";
      throw DomainError(os.str());
    }
    X.push_back(std::log1p(t[i]));
    Y.push_back(std::log(y[i]));
  }
  const std::size_t n = X.size();
  if (n < 10) {
    std::ostringstream os;
    os << "fit_power_law: " << n << " samples in [" << t1 << ", " << t2 << "], need at least 10";
    throw DomainError(os.str());
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += X[i];
    my += Y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
  }
  if (!(sxx > 0)) throw DomainError("fit_power_law: window has a single time value");
  f.exponent = sxy / sxx;
  f.intercept = my - f.exponent * mx;
  double r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = Y[i] - f.intercept - f.exponent * X[i];
    r += e * e;
  }
  f.residual = std::sqrt(r / double(n));
  f.samples = int(n);
  return f;
}

double final_decade_growth(const std::vector<double>& t, const std::vector<double>& m) {
  if (t.empty()) return 0;
  const double T = t.back();
  double early = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] <= T / 10 + 1e-12) early = m[i];
  const double last = m.back();
  if (early == 0) return last == 0 ? 0.0 : INFINITY;
  return last / early - 1;
}

Majorants majorants(const RunHistory& h) {
  if (h.E_minus_beta.size() != h.t.size() || h.Linf.size() != h.t.size())
    throw DomainError("majorants: history lacks the E_-beta or Linf series");
  Majorants M;
  M.t = h.t;
  double a = 0, b = 0;
  for (std::size_t i = 0; i < h.t.size(); ++i) {
    a = std::max(a, std::pow(1 + h.t[i], 1.5) * h.E_minus_beta[i]);
    b = std::max(b, std::pow(1 + h.t[i], 0.5) * h.Linf[i]);
    M.m1.push_back(a);
    M.m2.push_back(b);
  }
  M.growth1 = final_decade_growth(M.t, M.m1);
  M.growth2 = final_decade_growth(M.t, M.m2);
  return M;
}

VirialResult virial_check(const std::vector<double>& t, const std::vector<double>& w, double nu) {
  VirialResult r;
  r.bound = 4 + nu + 0.5;
  if (t.empty()) throw DomainError("virial_check: empty series");
  const double T = t.back();
  r.fit.t1 = T / 4;
  r.fit.t2 = T;
  const double peak = *std::max_element(w.begin(), w.end());
  if (peak <= 0) {
    // no perturbation: nothing grows
    r.pass = true;
    return r;
  }
  r.fit = fit_power_law(t, w, T / 4, T);
  r.pass = r.fit.exponent <= r.bound;
  return r;
}

VirialResult virial_check(const RunHistory& h, double nu) {
  if (h.L2_weighted.size() != h.t.size()) throw DomainError("virial_check: history lacks the weighted L2 series");
  return virial_check(h.t, h.L2_weighted, nu);
}

double integrate_between(const std::vector<double>& f, const Grid& g, double x1, double x2) {
  if (x2 < x1) std::swap(x1, x2);
  const double lo = g.x(0), hi = g.x(g.n - 1);
  x1 = std::clamp(x1, lo, hi);
  x2 = std::clamp(x2, lo, hi);
  if (x2 <= x1) return 0;
  auto at = [&](double x) {
    const double u = (x - lo) / g.h;
    std::size_t i = std::min(std::size_t(std::floor(u)), g.n - 2);
    const double th = u - double(i);
    return (1 - th) * f[i] + th * f[i + 1];
  };
  const double u1 = (x1 - lo) / g.h, u2 = (x2 - lo) / g.h;
  const std::size_t i1 = std::size_t(std::ceil(u1 - 1e-12)), i2 = std::size_t(std::floor(u2 + 1e-12));
  if (i1 > i2) return 0.5 * (at(x1) + at(x2)) * (x2 - x1);
  double s = 0;
  for (std::size_t i = i1; i < i2; ++i) s += 0.5 * (f[i] + f[i + 1]) * g.h;
  s += 0.5 * (at(x1) + f[i1]) * (g.x(i1) - x1);
  s += 0.5 * (f[i2] + at(x2)) * (x2 - g.x(i2));
  return s;
}

WeightedEnergyResult weighted_energy_check(const std::vector<double>& t,
                                           const std::vector<std::vector<double>>& e, const Grid& g,
                                           const std::vector<double>& b, double sigma) {
  if (t.size() != e.size() || t.size() != b.size() || t.empty())
    throw DomainError("weighted_energy_check: series lengths differ");
  if (t.size() < 2) throw DomainError("weighted_energy_check: need at least two samples");
  WeightedEnergyResult r;
  r.sigma = sigma;
  r.t = t;
  std::vector<double> w(g.n);
  for (std::size_t i = 0; i < g.n; ++i) w[i] = (1 + std::pow(std::abs(g.x(i)), sigma)) * e[0][i];
  const double rhs = trapezoid(w, g.h);
  if (!(rhs > 0)) throw DomainError("weighted_energy_check: zero initial weighted energy");
  for (std::size_t k = 0; k < t.size(); ++k) {
    for (std::size_t i = 0; i < g.n; ++i) w[i] = (1 + std::pow(std::abs(g.x(i) - b[k]), sigma)) * e[k][i];
    const double lhs = trapezoid(w, g.h);
    r.ratio.push_back(lhs / (std::pow(1 + t[k] + std::abs(b[k]), sigma + 1) * rhs));
  }
  r.initial = r.ratio.front();
  const double T = t.back();
  for (std::size_t k = 0; k < t.size(); ++k) {
    double& m = t[k] >= T / 2 - 1e-12 ? r.late_max : r.early_max;
    m = std::max(m, r.ratio[k]);
  }
  r.pass = std::isfinite(r.late_max) && std::max(r.early_max, r.late_max) <= 10 * r.initial &&
           r.late_max <= 2 * r.early_max;
  return r;
}

WeightedEnergyResult weighted_energy_check(const std::vector<FieldState>& snaps, const std::vector<double>& b,
                                           const Potential& p, double sigma) {
  if (snaps.empty()) throw DomainError("weighted_energy_check: no snapshots");
  std::vector<double> t;
  std::vector<std::vector<double>> e;
  for (const auto& Y : snaps) {
    t.push_back(Y.t);
    e.push_back(energy_density(Y, p));
  }
  return weighted_energy_check(t, e, snaps.front().grid, b, sigma);
}

LocalEnergyResult local_energy_check(const std::vector<FieldState>& snaps, const Potential& p, int count,
                                     unsigned long long seed, double slack) {
  if (snaps.size() < 2) throw DomainError("local_energy_check: need the initial state and later snapshots");
  if (std::abs(snaps.front().t) > 1e-12) throw DomainError("local_energy_check: first snapshot must be t=0");
  const Grid& g = snaps.front().grid;
  const std::vector<double> e0 = energy_density(snaps.front(), p);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(1, snaps.size() - 1);
  // intervals around the light cone of the initial disturbance
  const double L = g.L(), c = g.x(0) + L;
  const double R = std::min(0.9 * L, snaps.back().t + 10);
  std::uniform_real_distribution<double> where(c - R, c + R);
  std::uniform_real_distribution<double> width(0.5, 20.0);
  LocalEnergyResult r;
  r.worst_excess = -INFINITY;
  r.pass = true;
  for (int k = 0; k < count; ++k) {
    const FieldState& Y = snaps[pick(rng)];
    LocalEnergySample s;
    s.t = Y.t;
    s.a1 = where(rng);
    s.a2 = s.a1 + width(rng);
    s.lhs = integrate_between(energy_density(Y, p), g, s.a1, s.a2);
    s.rhs = integrate_between(e0, g, s.a1 - s.t, s.a2 + s.t);
    s.pass = s.lhs <= s.rhs + slack;
    r.worst_excess = std::max(r.worst_excess, s.lhs - s.rhs);
    r.pass = r.pass && s.pass;
    r.samples.push_back(s);
  }
  return r;
}

namespace {

struct TrackState {
  SolitonParams sigma;
  double vint = 0, last_t = 0, last_v = 0;
  bool first = true;
};

}  // namespace

Observer make_tracker(const KinkProfile& profile, const SolitonParams& seed, const TrackerOptions& opt) {
  auto st = std::make_shared<TrackState>();
  st->sigma = seed;
  const KinkProfile* prof = &profile;
  return [st, prof, opt](const FieldState& Y, RunHistory& H) {
    const ProjectionResult r = project(Y, *prof, st->sigma, opt.projection);
    st->sigma = r.sigma;
    const TangentFrame f = tangent_frame(*prof, r.sigma.v, r.X.grid);
    const ModulationRates m = modulation_rhs(r.X, f, *prof);
    if (st->first) {
      st->first = false;
    } else {
      st->vint += 0.5 * (st->last_v + r.sigma.v) * (Y.t - st->last_t);
    }
    st->last_t = Y.t;
    st->last_v = r.sigma.v;
    H.beta = opt.beta;
    H.nu = opt.nu;
    H.b.push_back(r.sigma.b);
    H.v.push_back(r.sigma.v);
    H.c.push_back(r.sigma.b - st->vint);
    H.cdot.push_back(m.cdot);
    H.vdot.push_back(m.vdot);
    H.residual1.push_back(r.residual1);
    H.residual2.push_back(r.residual2);
    H.E_minus_beta.push_back(norm_E_alpha(r.X, -opt.beta));
    H.Linf.push_back(norm_Linf(r.X.Psi));
    H.W.push_back(norm_W(r.X));
    H.L2_weighted.push_back(norm_L2_alpha(r.X.Psi, r.X.grid, 2.5 + opt.nu));
    if (opt.keep_fields || opt.keep_X) H.snapshot_t.push_back(Y.t);
    if (opt.keep_fields) H.field_snapshots.push_back(Y);
    if (opt.keep_X) H.snapshots.push_back(r.X);
  };
}

ModulationCheck modulation_crosscheck(const RunHistory& h, double t1, double t2, double factor,
                                      const RunHistory* refined) {
  const std::size_t n = h.t.size();
  if (h.b.size() != n || h.v.size() != n || h.cdot.size() != n || h.vdot.size() != n)
    throw DomainError("modulation_crosscheck: history lacks tracked series");
  if (n < 5) throw DomainError("modulation_crosscheck: too few samples");
  if (refined) {
    if (refined->t.size() != n || refined->b.size() != n || refined->v.size() != n)
      throw DomainError("modulation_crosscheck: refined run has different samples");
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(refined->t[i] - h.t[i]) > 1e-9 * std::max(1.0, h.t[i]))
        throw DomainError("modulation_crosscheck: refined run has different sample times");
  }
  ModulationCheck r;
  r.t1 = t1;
  r.t2 = t2;
  const double dt = h.t[1] - h.t[0];
  double mc = 0, mv = 0, ec = 0, ev = 0;
  int used = 0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    if (h.t[i] < t1 || h.t[i] > t2) continue;
    // stride must be uniform across the stencil
    bool uniform = true;
    for (std::size_t k = i - 2; k < i + 2; ++k)
      if (std::abs(h.t[k + 1] - h.t[k] - dt) > 1e-9 * dt) uniform = false;
    if (!uniform) continue;
    // cdot = bdot - v. Differencing c itself would drag in the trapezoid error of
    // its integral of v, which does not scale like the stencil.
    const double fc1 = (h.b[i + 1] - h.b[i - 1]) / (2 * dt) - h.v[i], fc2 = (h.b[i + 2] - h.b[i - 2]) / (4 * dt) - h.v[i];
    const double fv1 = (h.v[i + 1] - h.v[i - 1]) / (2 * dt), fv2 = (h.v[i + 2] - h.v[i - 2]) / (4 * dt);
    // stride error (Richardson in the stride), plus time-step error from the refined run
    double erc = std::abs(fc2 - fc1) / 3, erv = std::abs(fv2 - fv1) / 3;
    if (refined) {
      const RunHistory& q = *refined;
      erc += 4.0 / 3 * std::abs(fc1 - ((q.b[i + 1] - q.b[i - 1]) / (2 * dt) - q.v[i]));
      erv += 4.0 / 3 * std::abs(fv1 - (q.v[i + 1] - q.v[i - 1]) / (2 * dt));
    }
    mc += std::pow(fc1 - h.cdot[i], 2);
    mv += std::pow(fv1 - h.vdot[i], 2);
    ec += erc * erc;
    ev += erv * erv;
    ++used;
  }
  if (used < 10) throw DomainError("modulation_crosscheck: fewer than 10 usable samples in the window");
  r.mismatch_c = std::sqrt(mc / used);
  r.mismatch_v = std::sqrt(mv / used);
  r.error_c = std::sqrt(ec / used);
  r.error_v = std::sqrt(ev / used);
  // c and v come from a projection solved to ~1e-10 relative; differencing amplifies that by 1/dt
  double res = 0;
  for (std::size_t i = 0; i < n; ++i) res = std::max({res, std::abs(h.residual1[i]), std::abs(h.residual2[i])});
  r.floor = 2 * res / dt;
  r.ratio = std::max(r.mismatch_c / (r.error_c + r.floor), r.mismatch_v / (r.error_v + r.floor));
  r.pass = r.ratio <= factor;
  return r;
}

HalvingResult halving_test(const PerturbationState& X, const TangentFrame& frame, const KinkProfile& profile,
                           double tol) {
  HalvingResult r;
  const ModulationRates a = modulation_rhs(X, frame, profile);
  const ModulationRates b = modulation_rhs(0.5 * X, frame, profile);
  r.full = std::abs(a.cdot) + std::abs(a.vdot);
  r.half = std::abs(b.cdot) + std::abs(b.vdot);
  r.ratio = r.half > 0 ? r.full / r.half : INFINITY;
  r.pass = std::abs(r.ratio / 4 - 1) <= tol;
  return r;
}

}  // namespace kinklab
