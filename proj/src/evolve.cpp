#include "kinklab/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kinklab/errors.hpp"

namespace kinklab {

std::string to_string(Scheme s) { return s == Scheme::leapfrog ? "leapfrog" : "strang"; }
std::string to_string(Boundary b) { return b == Boundary::clamped_vacuum ? "clamped_vacuum" : "periodic"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "leapfrog") return Scheme::leapfrog;
  if (s == "strang") return Scheme::strang;
  throw ConfigError("unknown scheme '" + s + "'");
}

Boundary boundary_from_string(const std::string& s) {
  if (s == "clamped_vacuum") return Boundary::clamped_vacuum;
  if (s == "periodic") return Boundary::periodic;
  throw ConfigError("unknown boundary '" + s + "'");
}

std::size_t EvolveConfig::steps() const { return std::size_t(std::llround(T / dt)); }

void EvolveConfig::validate(const Grid& g, double max_rate) const {
  std::ostringstream os;
  if (!(dt > 0) || !(T >= 0)) os << "dt must be positive and T non-negative; ";
  else {
    const double r = T / dt;
    if (std::abs(r - std::round(r)) > 1e-9 * std::max(1.0, r)) os << "T/dt=" << r << " is not an integer; ";
  }
  if (dt > 0.9 * g.h * (1 + 1e-12)) os << "CFL violated: dt=" << dt << " > 0.9 h=" << 0.9 * g.h << "; ";
  if (max_rate > 0 && dt * max_rate >= 2.0)
    os << "dt=" << dt << " exceeds the stability limit " << 2.0 / max_rate << " of the stencil; ";
  if (snapshot_stride < 1) os << "snapshot_stride must be >= 1; ";
  const std::string msg = os.str();
  if (!msg.empty()) throw ConfigError("evolve config: " + msg);
}

namespace {

double max_curvature(const Potential& p) {
  double c = p.m2();
  const int n = 4000;
  for (int i = 0; i <= n; ++i) c = std::max(c, p.derivative(-p.a() + 2 * p.a() * i / n, 2));
  return c;
}

}  // namespace

NonlinearStepper::NonlinearStepper(const Potential& p, Scheme scheme) : p_(p), scheme_(scheme) {}

void NonlinearStepper::kick(FieldState& Y, double dt) {
  diff2(Y.psi, Y.grid, Ghost::constant, acc_);
  const std::size_t n = Y.psi.size();
  for (std::size_t i = 1; i + 1 < n; ++i) Y.pi[i] += dt * (acc_[i] + p_.force(Y.psi[i]));
  Y.pi[0] = 0;
  Y.pi[n - 1] = 0;
}

void NonlinearStepper::step(FieldState& Y, double dt) {
  const std::size_t n = Y.psi.size();
  auto drift = [&](double tau) {
    for (std::size_t i = 1; i + 1 < n; ++i) Y.psi[i] += tau * Y.pi[i];
  };
  if (scheme_ == Scheme::leapfrog) {
    kick(Y, 0.5 * dt);
    drift(dt);
    kick(Y, 0.5 * dt);
  } else {
    drift(0.5 * dt);
    kick(Y, dt);
    drift(0.5 * dt);
  }
  Y.t += dt;
}

FieldState step_nonlinear(const FieldState& Y, const Potential& p, double dt, Scheme scheme) {
  FieldState out = Y;
  NonlinearStepper(p, scheme).step(out, dt);
  if (!out.finite()) throw IntegrationError("non-finite field after step", out.t);
  return out;
}

RunHistory evolve_nonlinear(const FieldState& Y0, const Potential& p, const EvolveConfig& cfg,
                            const std::vector<Observer>& observers, FieldState* final_state) {
  if (cfg.boundary != Boundary::clamped_vacuum)
    throw ConfigError("nonlinear runs need clamped_vacuum boundaries (periodic is for the free group)");
  const double rate = std::sqrt(laplacian_spectral_radius(Y0.grid) + max_curvature(p));
  cfg.validate(Y0.grid, rate);

  RunHistory hist;
  FieldState Y = Y0;
  NonlinearStepper stepper(p, cfg.scheme);
  const double t0 = Y0.t;
  const std::size_t steps = cfg.steps();
  auto observe = [&] {
    hist.t.push_back(Y.t);
    hist.energy.push_back(energy(Y, p));
    for (const auto& o : observers) o(Y, hist);
  };
  observe();
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.step(Y, cfg.dt);
    Y.t = t0 + double(k) * cfg.dt;
    if (k % std::size_t(cfg.snapshot_stride) == 0 || k == steps) {
      if (!Y.finite()) throw IntegrationError("non-finite field in nonlinear run", Y.t);
      observe();
    }
  }
  if (final_state) *final_state = Y;
  return hist;
}

LinearOperator::LinearOperator(const KinkProfile& profile, double v, double w, const Grid& grid)
    : grid_(grid), v_(v), w_(w), m2_(profile.potential().m2()) {
  const double g = SolitonParams{0, v}.gamma();
  V_.resize(grid.n);
  const Potential& p = profile.potential();
  for (std::size_t i = 0; i < grid.n; ++i) V_[i] = p.derivative(profile.s_at(g * grid.x(i)), 2) - m2_;
}

void LinearOperator::apply(const PerturbationState& X, PerturbationState& out) const {
  if (!X.grid.same_nodes(grid_)) throw DomainError("apply_A: grid mismatch");
  out.grid = X.grid;
  const std::size_t n = grid_.n;
  out.Psi.resize(n);
  out.Pi.resize(n);
  diff1(X.Psi, grid_, Ghost::zero, d1_);
  diff2(X.Psi, grid_, Ghost::zero, d2_);
  if (w_ != 0) diff1(X.Pi, grid_, Ghost::zero, dp_);
  for (std::size_t i = 0; i < n; ++i) {
    const double dpi = w_ != 0 ? w_ * dp_[i] : 0.0;
    out.Psi[i] = w_ * d1_[i] + X.Pi[i];
    out.Pi[i] = d2_[i] - (m2_ + V_[i]) * X.Psi[i] + dpi;
  }
}

PerturbationState LinearOperator::apply(const PerturbationState& X) const {
  PerturbationState out;
  apply(X, out);
  return out;
}

double LinearOperator::hamiltonian(const PerturbationState& X) const {
  diff1(X.Psi, grid_, Ghost::zero, d1_);
  diff2(X.Psi, grid_, Ghost::zero, d2_);
  double s = 0;
  for (std::size_t i = 0; i < grid_.n; ++i) {
    s += 0.5 * X.Pi[i] * X.Pi[i];
    s += 0.5 * X.Psi[i] * (-d2_[i] + (m2_ + V_[i]) * X.Psi[i]);
    s += w_ * X.Pi[i] * d1_[i];
  }
  return s * grid_.h;
}

double LinearOperator::max_rate() const {
  double vmax = 0;
  for (double x : V_) vmax = std::max(vmax, x);
  // first-derivative symbol is bounded by 1.6/h for every supported order
  return std::sqrt(laplacian_spectral_radius(grid_) + m2_ + vmax) + std::abs(w_) * 1.6 / grid_.h;
}

PerturbationState apply_A(const PerturbationState& X, double v, double w, const KinkProfile& profile) {
  return LinearOperator(profile, v, w, X.grid).apply(X);
}

RunHistory evolve_linearized(const PerturbationState& X0, double v, const KinkProfile& profile,
                             const EvolveConfig& cfg, double beta, bool keep_snapshots,
                             const std::vector<LinearObserver>& observers,
                             PerturbationState* final_state) {
  if (cfg.boundary != Boundary::clamped_vacuum)
    throw ConfigError("linearized runs use zero (clamped) boundaries");
  const LinearOperator A(profile, v, v, X0.grid);
  // RK4 is stable on the imaginary axis up to |lambda dt| = 2 sqrt 2
  cfg.validate(X0.grid, A.max_rate() * 2.0 / 2.8);

  RunHistory hist;
  hist.beta = beta;
  PerturbationState X = X0, k1, k2, k3, k4, tmp;
  const std::size_t steps = cfg.steps();
  const double dt = cfg.dt;
  double t = 0;
  auto observe = [&] {
    hist.t.push_back(t);
    hist.E_minus_beta.push_back(norm_E_alpha(X, -beta));
    hist.Linf.push_back(norm_Linf(X.Psi));
    hist.W.push_back(norm_W(X));
    hist.hamiltonian.push_back(A.hamiltonian(X));
    if (keep_snapshots) {
      hist.snapshot_t.push_back(t);
      hist.snapshots.push_back(X);
    }
    for (const auto& o : observers) o(t, X, hist);
  };
  observe();
  for (std::size_t k = 1; k <= steps; ++k) {
    A.apply(X, k1);
    tmp = X;
    tmp.axpy(0.5 * dt, k1);
    A.apply(tmp, k2);
    tmp = X;
    tmp.axpy(0.5 * dt, k2);
    A.apply(tmp, k3);
    tmp = X;
    tmp.axpy(dt, k3);
    A.apply(tmp, k4);
    for (std::size_t i = 0; i < X.Psi.size(); ++i) {
      X.Psi[i] += dt / 6 * (k1.Psi[i] + 2 * k2.Psi[i] + 2 * k3.Psi[i] + k4.Psi[i]);
      X.Pi[i] += dt / 6 * (k1.Pi[i] + 2 * k2.Pi[i] + 2 * k3.Pi[i] + k4.Pi[i]);
    }
    t = double(k) * dt;
    if (k % std::size_t(cfg.snapshot_stride) == 0 || k == steps) {
      if (!X.finite()) throw IntegrationError("non-finite perturbation in linearized run", t);
      observe();
    }
  }
  if (final_state) *final_state = X;
  return hist;
}

}  // namespace kinklab
