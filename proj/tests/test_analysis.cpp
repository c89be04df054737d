#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>

#include "kinklab/analysis.hpp"
#include "kinklab/asymptotics.hpp"
#include "kinklab/errors.hpp"

using namespace kinklab;

namespace {

std::vector<double> times(double T, double dt) {
  std::vector<double> t;
  for (int k = 0; k * dt <= T + 1e-12; ++k) t.push_back(k * dt);
  return t;
}

template <class F>
std::vector<double> map(const std::vector<double>& t, F f) {
  std::vector<double> y;
  for (double s : t) y.push_back(f(s));
  return y;
}

}  // namespace

TEST_CASE("power-law fits") {
  const auto t = times(50, 0.5);
  const DecayFit a = fit_power_law(t, map(t, [](double s) { return 3 * std::pow(1 + s, -1.5); }), 5, 50);
  CHECK(a.exponent == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(std::exp(a.intercept) == doctest::Approx(3).epsilon(1e-10));
  CHECK(a.residual <= 1e-12);
  CHECK(a.samples == 91);
  // a 5% ripple moves the exponent by little
  const DecayFit r = fit_power_law(t, map(t, [](double s) { return std::pow(1 + s, -0.5) * (1 + 0.05 * std::sin(3 * s)); }), 5, 50);
  CHECK(std::abs(r.exponent - (-0.5)) <= 0.02);
  CHECK(std::abs(fit_power_law(t, std::vector<double>(t.size(), 2.0), 5, 50).exponent) <= 1e-12);

  auto y = map(t, [](double s) { return 1 / (1 + s); });
  y[20] = 0;  // t = 10
  try {
    fit_power_law(t, y, 5, 50);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("10") != std::string::npos);
  }
  CHECK_NOTHROW(fit_power_law(t, y, 11, 50));  // outside the window
  CHECK_THROWS_AS(fit_power_law(t, y, 48, 50), DomainError);  // too few samples
}

TEST_CASE("majorants") {
  RunHistory h;
  h.t = times(100, 0.5);
  h.E_minus_beta = map(h.t, [](double s) { return 0.01 * std::pow(1 + s, -1.5); });
  h.Linf = map(h.t, [](double s) { return 0.02 * std::pow(1 + s, -0.5); });
  const Majorants m = majorants(h);
  CHECK(m.m1.back() == doctest::Approx(0.01));
  CHECK(m.m2.back() == doctest::Approx(0.02));
  CHECK(std::abs(m.growth1) <= 1e-12);
  CHECK(std::abs(m.growth2) <= 1e-12);
  // a slower decay keeps growing over the last decade
  h.E_minus_beta = map(h.t, [](double s) { return 0.01 / (1 + s); });
  CHECK(majorants(h).growth1 == doctest::Approx(std::sqrt(101.0 / 11) - 1).epsilon(1e-9));
  h.E_minus_beta.assign(h.t.size(), 0.0);
  h.Linf.assign(h.t.size(), 0.0);
  CHECK(majorants(h).growth1 == 0);
  h.Linf.clear();
  CHECK_THROWS_AS(majorants(h), DomainError);
}

TEST_CASE("virial bound") {
  const auto t = times(100, 1);
  CHECK(virial_check(t, std::vector<double>(t.size(), 0.0), 0.25).pass);
  const VirialResult a = virial_check(t, map(t, [](double s) { return std::pow(1 + s, 2.0); }), 0.25);
  CHECK(a.pass);
  CHECK(a.bound == 4.75);
  CHECK(a.fit.exponent == doctest::Approx(2));
  CHECK_FALSE(virial_check(t, map(t, [](double s) { return std::pow(1 + s, 5.0); }), 0.25).pass);
}

TEST_CASE("integrate_between") {
  const Grid g = Grid::centered(5, 0.1);
  std::vector<double> f(g.n);
  for (std::size_t i = 0; i < g.n; ++i) f[i] = 2 * g.x(i) + 1;
  // linear integrand: trapezoid with linear end interpolation is exact
  CHECK(integrate_between(f, g, -1.234, 2.071) == doctest::Approx(2.071 * 2.071 + 2.071 - 1.234 * 1.234 + 1.234));
  CHECK(integrate_between(f, g, 0.01, 0.07) == doctest::Approx(0.07 * 0.07 + 0.07 - 0.0001 - 0.01));
  CHECK(integrate_between(f, g, -100, 100) == doctest::Approx(10));
  CHECK(integrate_between(f, g, 7, 9) == 0);
}

TEST_CASE("weighted energy") {
  const Grid g = Grid::centered(40, 0.1);
  const auto t = times(50, 1);
  std::vector<double> b(t.size(), 0.0);
  std::vector<double> e(g.n);
  for (std::size_t i = 0; i < g.n; ++i) e[i] = std::exp(-g.x(i) * g.x(i));
  // a static density: R falls like (1+t)^-(s+1)
  const WeightedEnergyResult s = weighted_energy_check(t, std::vector<std::vector<double>>(t.size(), e), g, b, 1);
  CHECK(s.pass);
  CHECK(s.ratio.front() == doctest::Approx(1));
  CHECK(s.ratio.back() == doctest::Approx(1.0 / (51 * 51)));
  // energy piling up faster than the weight allows
  std::vector<std::vector<double>> grow;
  for (double u : t) {
    std::vector<double> d(e);
    for (auto& x : d) x *= std::pow(1 + u, 4);
    grow.push_back(d);
  }
  CHECK_FALSE(weighted_energy_check(t, grow, g, b, 1).pass);
  CHECK_THROWS_AS(weighted_energy_check(t, grow, g, std::vector<double>(3, 0.0), 1), DomainError);
}

TEST_CASE("local energy estimate") {
  const Potential p = make_quartic(1);
  const Grid g = Grid::centered(30, 0.1);
  std::vector<FieldState> snaps;
  for (int k = 0; k <= 10; ++k) {
    FieldState Y(g);
    Y.t = k;
    for (std::size_t i = 0; i < g.n; ++i) Y.psi[i] = std::tanh(g.x(i) / std::sqrt(2.0));
    snaps.push_back(Y);
  }
  const LocalEnergyResult a = local_energy_check(snaps, p, 20, 7);
  CHECK(a.pass);
  CHECK(a.samples.size() == 20);
  CHECK(a.worst_excess <= 1e-14);
  // uniform kinetic energy growing like (1+t)^2 beats the widening window
  for (auto& Y : snaps)
    for (auto& x : Y.pi) x = 0.1 * (1 + Y.t);
  const LocalEnergyResult b = local_energy_check(snaps, p, 20, 7);
  CHECK_FALSE(b.pass);
  CHECK(b.worst_excess > 1e-3);
}

TEST_CASE("modulation cross-check on synthetic rates") {
  RunHistory h;
  h.t = times(20, 0.1);
  h.b = map(h.t, [](double s) { return std::sin(s) - 0.9 * std::cos(s / 3); });
  h.cdot = map(h.t, [](double s) { return std::cos(s); });
  h.v = map(h.t, [](double s) { return 0.3 * std::sin(s / 3); });
  h.vdot = map(h.t, [](double s) { return 0.1 * std::cos(s / 3); });
  h.residual1.assign(h.t.size(), 0.0);
  h.residual2.assign(h.t.size(), 0.0);
  // centered-difference error is h^2 f'''/6, which the Richardson estimate reproduces
  const ModulationCheck a = modulation_crosscheck(h, 2, 18);
  CHECK(a.pass);
  CHECK(a.ratio == doctest::Approx(1).epsilon(0.05));
  h.cdot = map(h.t, [](double s) { return std::cos(s) + 0.05; });
  CHECK_FALSE(modulation_crosscheck(h, 2, 18).pass);
  CHECK_THROWS_AS(modulation_crosscheck(h, 2, 2.5), DomainError);
  h.b.clear();
  CHECK_THROWS_AS(modulation_crosscheck(h, 2, 18), DomainError);
}

TEST_CASE("asymptotic state of an unperturbed soliton") {
  const KinkProfile prof = build_profile(make_flat_well(1, std::sqrt(2.0), 0.1, 0.65), 30, 0.005);
  const Grid g = Grid::centered(60, 0.05, 0);
  EvolveConfig cfg;
  cfg.dt = 0.02;
  cfg.T = 20;
  cfg.snapshot_stride = 10;
  TrackerOptions to;
  to.keep_fields = true;
  const RunHistory H =
      evolve_nonlinear(soliton_state(prof, {0, 0.3}, g), prof.potential(), cfg, {make_tracker(prof, {0, 0.3}, to)});
  REQUIRE(H.field_snapshots.size() == H.t.size());
  for (double v : H.v) CHECK(v == doctest::Approx(0.3).epsilon(1e-6));
  const AsymptoticsResult A = extract_asymptotics(H, prof);
  CHECK(A.v_plus == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(std::abs(A.q_plus) <= 1e-4);
  // only the stepper's error is left to scatter
  CHECK(A.phi_norm <= 1e-4);
}
