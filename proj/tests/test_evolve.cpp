#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "kinklab/analysis.hpp"
#include "kinklab/errors.hpp"
#include "kinklab/evolve.hpp"
#include "kinklab/symplectic.hpp"

using namespace kinklab;

namespace {

const double sqrt2 = std::sqrt(2.0);

const KinkProfile& quartic_profile() {
  static const KinkProfile k = build_profile(make_quartic(1), 30, 0.005);
  return k;
}
const KinkProfile& flat_profile() {
  static const KinkProfile k = build_profile(make_flat_well(1, sqrt2, 0.1, 0.65), 30, 0.005);
  return k;
}

PerturbationState bump(const Grid& g, double c1, double c2) {
  PerturbationState X(g);
  for (std::size_t i = 0; i < g.n; ++i) {
    X.Psi[i] = std::exp(-(g.x(i) - c1) * (g.x(i) - c1));
    X.Pi[i] = 0.5 * std::exp(-0.5 * (g.x(i) - c2) * (g.x(i) - c2));
  }
  return X;
}

// max |psi - tanh(gamma (x - vt)/sqrt2)| over the grid
double traveling_error(double h, double dt, double v, double T) {
  const Potential p = make_quartic(1);
  const Grid g = Grid::centered(30, h, 2);
  const FieldState Y0 = soliton_state(quartic_profile(), {0, v}, g);
  EvolveConfig cfg;
  cfg.dt = dt;
  cfg.T = T;
  cfg.snapshot_stride = int(std::round(T / dt));
  FieldState Y;
  evolve_nonlinear(Y0, p, cfg, {}, &Y);
  const double gam = 1 / std::sqrt(1 - v * v);
  double e = 0;
  for (std::size_t i = 0; i < g.n; ++i) e = std::max(e, std::abs(Y.psi[i] - std::tanh(gam * (g.x(i) - v * T) / sqrt2)));
  return e;
}

}  // namespace

TEST_CASE("vacuum stays put") {
  const Potential p = make_quartic(1);
  const Grid g = Grid::centered(10, 0.1, 6);
  FieldState Y(g);
  for (auto& x : Y.psi) x = 1;
  EvolveConfig cfg;
  cfg.dt = 0.05;
  cfg.T = 10;
  cfg.snapshot_stride = 20;
  FieldState out;
  const RunHistory H = evolve_nonlinear(Y, p, cfg, {}, &out);
  CHECK(H.t.size() == 11);
  for (double e : H.energy) CHECK(std::abs(e) <= 1e-20);
  for (double x : out.psi) CHECK(std::abs(x - 1) <= 1e-12);  // stencil weights sum to 0 only up to rounding
}

TEST_CASE("static kink conserves energy") {
  const Potential p = make_quartic(1);
  const Grid g = Grid::centered(40, 0.05, 6);
  EvolveConfig cfg;
  cfg.dt = 0.02;
  cfg.T = 20;
  cfg.snapshot_stride = 50;
  const RunHistory H = evolve_nonlinear(soliton_state(quartic_profile(), {0, 0}, g), p, cfg);
  for (double e : H.energy) CHECK(std::abs(e / H.energy.front() - 1) <= 1e-8);
}

TEST_CASE("second order against the traveling kink") {
  const double e1 = traveling_error(0.1, 0.05, 0.4, 5);
  const double e2 = traveling_error(0.05, 0.025, 0.4, 5);
  CAPTURE(e1);
  CAPTURE(e2);
  CHECK(e1 / e2 == doctest::Approx(4).epsilon(0.15));
}

TEST_CASE("config validation") {
  const Potential p = make_quartic(1);
  const Grid g = Grid::centered(10, 0.1, 6);
  const FieldState Y = soliton_state(quartic_profile(), {0, 0}, g);
  EvolveConfig cfg;
  cfg.dt = 0.2;  // CFL
  cfg.T = 1;
  CHECK_THROWS_AS(evolve_nonlinear(Y, p, cfg), ConfigError);
  cfg.dt = 0.03;  // T/dt not integral
  CHECK_THROWS_AS(evolve_nonlinear(Y, p, cfg), ConfigError);
  cfg.dt = 0.05;
  cfg.boundary = Boundary::periodic;
  CHECK_THROWS_AS(evolve_nonlinear(Y, p, cfg), ConfigError);
  cfg.boundary = Boundary::clamped_vacuum;
  FieldState bad = Y;
  bad.psi[50] = NAN;
  CHECK_THROWS_AS(evolve_nonlinear(bad, p, cfg), IntegrationError);
  CHECK(scheme_from_string(to_string(Scheme::strang)) == Scheme::strang);
}

TEST_CASE("A_v on the tangent vectors") {
  const Grid g = Grid::centered(30, 0.025, 0);
  for (double v : {0.0, 0.3, 0.6}) {
    const TangentFrame f = tangent_frame(flat_profile(), v, g);
    CAPTURE(v);
    CHECK(norm_E(apply_A(f.tau1, v, v, flat_profile())) <= 1e-6);
    CHECK(norm_E(apply_A(f.tau2, v, v, flat_profile()) - f.tau1) <= 1e-6);
    // w != v: A_{v,w} = A_{v,v} + (w - v) d/dy, so A_{v,w} tau1 = (w - v) tau1'
    const double w = v - 0.2;
    CHECK(norm_E(apply_A(f.tau1, v, w, flat_profile()) - (w - v) * f.dy_tau1) <= 1e-6);
    CHECK(norm_E(apply_A(f.tau2, v, w, flat_profile()) - (w - v) * f.dy_tau2 - f.tau1) <= 1e-6);
  }
}

TEST_CASE("linearized flow: zero mode and secular solution") {
  const double v = 0.3;
  const Grid g = Grid::centered(30, 0.05, 0);
  const TangentFrame f = tangent_frame(flat_profile(), v, g);
  EvolveConfig cfg;
  cfg.dt = 0.02;
  cfg.T = 20;
  cfg.snapshot_stride = 50;
  PerturbationState X;
  evolve_linearized(f.tau1, v, flat_profile(), cfg, 2.6, false, {}, &X);
  CHECK(norm_E(X - f.tau1) <= 1e-5);
  cfg.T = 10;
  evolve_linearized(f.tau2, v, flat_profile(), cfg, 2.6, false, {}, &X);
  PerturbationState secular = f.tau2;
  secular.axpy(10, f.tau1);
  CHECK(norm_E(X - secular) <= 1e-4);
}

TEST_CASE("linearized Hamiltonian is conserved") {
  const double v = 0.3;
  const Grid g = Grid::centered(40, 0.05, 0);
  EvolveConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 10;
  cfg.snapshot_stride = 100;
  const RunHistory H = evolve_linearized(bump(g, 1, -1.5), v, flat_profile(), cfg);
  for (double e : H.hamiltonian) CHECK(std::abs(e / H.hamiltonian.front() - 1) <= 1e-6);
}

TEST_CASE("skew symmetry of A_{v,w}") {
  const Grid g = Grid::centered(40, 0.05, 0);
  const LinearOperator A(flat_profile(), 0.3, 0.1, g);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> c(-10, 10), wd(0.5, 3), amp(-1, 1);
  double worst = 0;
  for (int k = 0; k < 20; ++k) {
    PerturbationState X1(g), X2(g);
    for (PerturbationState* X : {&X1, &X2}) {
      const double c1 = c(rng), c2 = c(rng), w1 = wd(rng), w2 = wd(rng), a1 = amp(rng), a2 = amp(rng);
      for (std::size_t i = 0; i < g.n; ++i) {
        X->Psi[i] = a1 * std::exp(-std::pow((g.x(i) - c1) / w1, 2));
        X->Pi[i] = a2 * std::exp(-std::pow((g.x(i) - c2) / w2, 2));
      }
    }
    const double r = omega(A.apply(X1), X2) + omega(X1, A.apply(X2));
    worst = std::max(worst, std::abs(r) / (norm_E(X1) * norm_E(X2)));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("free Klein-Gordon group") {
  const Grid g = Grid::centered(40, 0.05, 0);
  const FreeKG W(g, sqrt2);
  CHECK(W.padded_size() >= 2 * g.n);
  const PerturbationState X = bump(g, 1, -1);
  SUBCASE("identity at t = 0") {
    const PerturbationState Y = W.apply(X, 0, 0.3);
    CHECK(Y.Psi == X.Psi);
    CHECK(Y.Pi == X.Pi);
  }
  SUBCASE("inverse and group law") {
    CHECK(norm_E(W.apply(W.apply(X, 7.5, 0), -7.5, 0) - X) <= 1e-10);
    CHECK(norm_E(W.apply(W.apply(X, 3, 0), 4, 0) - W.apply(X, 7, 0)) <= 1e-10);
    CHECK(norm_E(W.apply(W.apply(X, 5, 0.4), -5, 0.4) - X) <= 1e-10);
  }
  SUBCASE("free energy is conserved") {
    auto e = [&](const PerturbationState& Y) {
      const auto d = diff1(Y.Psi, g, Ghost::zero);
      std::vector<double> q(g.n);
      for (std::size_t i = 0; i < g.n; ++i) q[i] = Y.Pi[i] * Y.Pi[i] + d[i] * d[i] + 2 * Y.Psi[i] * Y.Psi[i];
      return trapezoid(q, g.h);
    };
    CHECK(e(W.apply(X, 15, 0)) == doctest::Approx(e(X)).epsilon(1e-10));
  }
  SUBCASE("moving frame is a shift by vt") {
    // v t = 1 = 20 nodes
    const PerturbationState A = W.apply(X, 2, 0.5), B = W.apply(X, 2, 0);
    double e = 0;
    for (std::size_t i = 100; i + 120 < g.n; ++i) e = std::max(e, std::abs(A.Psi[i] - B.Psi[i + 20]));
    CHECK(e <= 1e-10);
  }
  SUBCASE("dispersive decay of a Gaussian") {
    const Grid G = Grid::centered(80, 0.05, 0);
    const FreeKG W2(G, sqrt2);
    PerturbationState Z(G);
    for (std::size_t i = 0; i < G.n; ++i) Z.Psi[i] = std::exp(-G.x(i) * G.x(i));
    std::vector<double> t, l;
    for (int k = 0; k <= 80; ++k) {
      t.push_back(k);
      l.push_back(norm_Linf(W2.apply(Z, k, 0).Psi));
    }
    const double p = fit_power_law(t, l, 10, 80).exponent;
    CHECK(p >= -0.6);
    CHECK(p <= -0.4);
  }
  CHECK_THROWS_AS(W.apply(X, 1, 1.0), DomainError);
  CHECK_THROWS_AS(FreeKG(g, 0), DomainError);
}
