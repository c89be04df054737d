#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "kinklab/analysis.hpp"
#include "kinklab/errors.hpp"
#include "kinklab/symplectic.hpp"

using namespace kinklab;

namespace {

const double sqrt2 = std::sqrt(2.0);
const double E0 = 2 * sqrt2 / 3;  // int s'^2 for the quartic kink, a = 1

const KinkProfile& quartic() {
  static const KinkProfile k = build_profile(make_quartic(1), 30, 0.005);
  return k;
}
const KinkProfile& flat() {
  static const KinkProfile k = build_profile(make_flat_well(1, sqrt2, 0.1, 0.65), 30, 0.005);
  return k;
}

PerturbationState random_state(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-8, 8), w(0.5, 2.5), a(-1, 1);
  PerturbationState X(g);
  for (int k = 0; k < 3; ++k) {
    const double c1 = c(rng), w1 = w(rng), a1 = a(rng), c2 = c(rng), w2 = w(rng), a2 = a(rng);
    for (std::size_t i = 0; i < g.n; ++i) {
      X.Psi[i] += a1 * std::exp(-std::pow((g.x(i) - c1) / w1, 2));
      X.Pi[i] += a2 * std::exp(-std::pow((g.x(i) - c2) / w2, 2));
    }
  }
  return X;
}

}  // namespace

TEST_CASE("omega is antisymmetric and bilinear") {
  const Grid g = Grid::centered(20, 0.05, 0);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const PerturbationState A = random_state(g, rng), B = random_state(g, rng), C = random_state(g, rng);
    CHECK(std::abs(omega(A, A)) <= 1e-14);
    CHECK(omega(A, B) == doctest::Approx(-omega(B, A)).epsilon(1e-13));
    CHECK(std::abs(omega(A + 2.0 * C, B) - omega(A, B) - 2 * omega(C, B)) <= 1e-12 * (std::abs(omega(A, B)) + std::abs(omega(C, B)) + 1));
  }
}

TEST_CASE("tangent frame closed forms") {
  const Grid g = Grid::centered(30, 0.01, 8);
  SUBCASE("v = 0") {
    const TangentFrame f = tangent_frame(quartic(), 0, g);
    CHECK(f.omega12 == doctest::Approx(E0).epsilon(1e-4));
    CHECK(omega(f.tau1, f.tau2) == doctest::Approx(f.omega12).epsilon(1e-12));
    // tau2 = (0, -s')
    double e = 0;
    for (std::size_t i = 0; i < g.n; ++i) {
      const double sp = (1 - std::pow(std::tanh(g.x(i) / sqrt2), 2)) / sqrt2;
      e = std::max(e, std::abs(f.tau2.Psi[i]) + std::abs(f.tau2.Pi[i] + sp));
    }
    CHECK(e <= 1e-9);
  }
  SUBCASE("any v: omega12 = gamma^3 int s'^2") {
    for (double v : {0.3, 0.5, 0.8}) {
      const double gam = 1 / std::sqrt(1 - v * v);
      CHECK(tangent_frame(quartic(), v, g).omega12 == doctest::Approx(gam * gam * gam * E0).epsilon(1e-4));
    }
  }
  SUBCASE("v = 0.5 against finite differences in b and v") {
    const double v = 0.5, dv = 1e-4;
    const TangentFrame f = tangent_frame(flat(), v, g);
    const PerturbationState up = soliton_moving(flat(), v + dv, g), dn = soliton_moving(flat(), v - dv, g);
    const PerturbationState d2 = (1 / (2 * dv)) * (up - dn);
    double e2 = 0;
    for (std::size_t i = 0; i < g.n; ++i)
      e2 = std::max({e2, std::abs(d2.Psi[i] - f.tau2.Psi[i]), std::abs(d2.Pi[i] - f.tau2.Pi[i])});
    CHECK(e2 <= 1e-5);
    // tau1 = -d/dy of the soliton
    const PerturbationState S = soliton_moving(flat(), v, g);
    const auto dpsi = diff1(S.Psi, g, Ghost::constant), dpi = diff1(S.Pi, g, Ghost::zero);
    double e1 = 0;
    for (std::size_t i = 0; i < g.n; ++i)
      e1 = std::max({e1, std::abs(f.tau1.Psi[i] + dpsi[i]), std::abs(f.tau1.Pi[i] + dpi[i])});
    CHECK(e1 <= 1e-8);
  }
  SUBCASE("Fredholm obstruction: <psi_v', psi_v'> > 0") {
    for (double v : {0.0, 0.3, 0.6}) {
      const TangentFrame f = tangent_frame(flat(), v, g);
      double ip = 0;
      for (std::size_t i = 0; i < g.n; ++i) ip += f.tau1.Psi[i] * f.tau1.Psi[i] * g.h;
      CHECK(ip > 1e-6);
    }
  }
}

TEST_CASE("projection") {
  const Grid g = Grid::centered(40, 0.05, 0);
  SUBCASE("fixed point on the manifold") {
    const ProjectionResult r = project(soliton_state(flat(), {0.7, -0.2}, g), flat(), {0.7, -0.2});
    CHECK(r.sigma.b == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(r.sigma.v == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(norm_E(r.X) <= 1e-10);
  }
  SUBCASE("recovers a planted sigma from a distant guess") {
    const FieldState Y = soliton_state(flat(), {0.3, 0.2}, g);
    const ProjectionResult r = project(Y, flat(), {0, 0});
    CHECK(std::abs(r.sigma.b - 0.3) <= 1e-8);
    CHECK(std::abs(r.sigma.v - 0.2) <= 1e-8);
    // brute force: the distance to the manifold over a coarse (b, v) grid is smallest at the plant
    double best = INFINITY, bb = 0, bv = 0;
    for (double b = 0; b <= 0.6 + 1e-9; b += 0.05)
      for (double v = 0; v <= 0.4 + 1e-9; v += 0.05) {
        const FieldState S = soliton_state(flat(), {b, v}, g);
        double d = 0;
        for (std::size_t i = 0; i < g.n; ++i) d += std::pow(S.psi[i] - Y.psi[i], 2) + std::pow(S.pi[i] - Y.pi[i], 2);
        if (d < best) best = d, bb = b, bv = v;
      }
    CHECK(std::abs(bb - 0.3) <= 1e-9);
    CHECK(std::abs(bv - 0.2) <= 1e-9);
  }
  SUBCASE("orthogonality of the remainder") {
    FieldState Y = soliton_state(flat(), {0.1, 0.3}, g);
    for (std::size_t i = 0; i < g.n; ++i) Y.psi[i] += 1e-3 * std::exp(-std::pow(g.x(i) - 1, 2));
    const ProjectionResult r = project(Y, flat(), {0, 0.3});
    CHECK(r.residual1 <= r.scale1);
    CHECK(r.residual2 <= r.scale2);
    const TangentFrame f = tangent_frame(flat(), r.sigma.v, r.X.grid);
    CHECK(std::abs(omega(r.X, f.tau1)) <= 1e-10 * norm_E(r.X) * norm_E(f.tau1) + 1e-15);
    CHECK(std::abs(omega(r.X, f.tau2)) <= 1e-10 * norm_E(r.X) * norm_E(f.tau2) + 1e-15);
  }
  SUBCASE("translation covariance") {
    FieldState Y = soliton_state(flat(), {0.1, 0.3}, g);
    for (std::size_t i = 0; i < g.n; ++i) Y.pi[i] += 1e-3 * std::exp(-std::pow(g.x(i) + 2, 2));
    // shift by 20 nodes, keeping the data on the grid
    const std::size_t q = 20;
    FieldState Z = Y;
    for (std::size_t i = 0; i < g.n; ++i) {
      Z.psi[i] = i >= q ? Y.psi[i - q] : -1.0;
      Z.pi[i] = i >= q ? Y.pi[i - q] : 0.0;
    }
    const ProjectionResult a = project(Y, flat(), {0.1, 0.3}), b = project(Z, flat(), {1.1, 0.3});
    CHECK(b.sigma.b - a.sigma.b == doctest::Approx(q * g.h).epsilon(1e-12));
    CHECK(b.sigma.v == doctest::Approx(a.sigma.v).epsilon(1e-12));
  }
  SUBCASE("velocity cap") {
    ProjectOptions o;
    o.v_cap = 0.5;
    CHECK_THROWS_AS(project(soliton_state(flat(), {0, 0.7}, g), flat(), {0, 0.7}, o), ProjectionError);
  }
}

TEST_CASE("discrete and continuous projectors") {
  const Grid g = Grid::centered(30, 0.05, 0);
  const TangentFrame f = tangent_frame(flat(), 0.4, g);
  const Split s1 = projector_split(f.tau1, f);
  CHECK(norm_E(s1.Xd - f.tau1) <= 1e-12);
  CHECK(norm_E(s1.Xc) <= 1e-12);
  std::mt19937_64 rng(9);
  for (int k = 0; k < 5; ++k) {
    const PerturbationState X = random_state(g, rng);
    const Split s = projector_split(X, f);
    CHECK(std::abs(omega(s.Xc, f.tau1)) <= 1e-10 * norm_E(X) * norm_E(f.tau1));
    CHECK(std::abs(omega(s.Xc, f.tau2)) <= 1e-10 * norm_E(X) * norm_E(f.tau2));
    CHECK(norm_E(projector_split(s.Xc, f).Xd) <= 1e-10 * norm_E(X));
    CHECK(norm_E(projector_split(s.Xd, f).Xd - s.Xd) <= 1e-10 * norm_E(X));
  }
}

TEST_CASE("nonlinearity N") {
  const Grid g = Grid::centered(20, 0.05, 0);
  const double v = 0.3, gam = 1 / std::sqrt(1 - v * v);
  std::vector<double> Psi(g.n, 0.0);
  for (double x : nonlinearity_N(v, Psi, quartic(), g)) CHECK(x == 0);
  for (std::size_t i = 0; i < g.n; ++i) Psi[i] = 0.1 * std::exp(-g.x(i) * g.x(i));
  const auto N = nonlinearity_N(v, Psi, quartic(), g);
  // quartic: F(s+P) - F(s) - F'(s) P = -(3 s P^2 + P^3)
  double e = 0;
  for (std::size_t i = 0; i < g.n; ++i) {
    const double s = std::tanh(gam * g.x(i) / sqrt2);
    e = std::max(e, std::abs(N[i] + 3 * s * Psi[i] * Psi[i] + Psi[i] * Psi[i] * Psi[i]));
  }
  CHECK(e <= 1e-12);
  std::vector<double> half(Psi);
  for (auto& x : half) x *= 0.5;
  auto l2 = [&](const std::vector<double>& f) { return norm_L2_alpha(f, g, 0); };
  const auto Nf = nonlinearity_N(v, Psi, flat(), g), Nh = nonlinearity_N(v, half, flat(), g);
  CHECK(l2(Nf) / l2(Nh) == doctest::Approx(4).epsilon(0.05));
}

TEST_CASE("modulation rates are quadratic in X") {
  const Grid g = Grid::centered(30, 0.05, 0);
  const TangentFrame f = tangent_frame(flat(), 0.3, g);
  const ModulationRates z = modulation_rhs(PerturbationState(g), f, flat());
  CHECK(z.cdot == 0);
  CHECK(z.vdot == 0);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 5; ++k) {
    PerturbationState X = projector_split(random_state(g, rng), f).Xc;
    X *= 1e-2 / norm_E(X);
    const HalvingResult h = halving_test(X, f, flat());
    CHECK(h.ratio == doctest::Approx(4).epsilon(0.1));
  }
}
