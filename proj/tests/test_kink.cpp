#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "kinklab/errors.hpp"
#include "kinklab/kink.hpp"

using namespace kinklab;

namespace {
const double sqrt2 = std::sqrt(2.0);
double sech2(double x) { return 1 - std::tanh(x) * std::tanh(x); }
}  // namespace

TEST_CASE("quartic kink is a tanh(x/sqrt2)") {
  for (double a : {1.0, 2.0}) {
    const KinkProfile k = build_profile(make_quartic(a), 20, 0.01);
    double err = 0;
    for (std::size_t i = 0; i < k.size(); ++i) err = std::max(err, std::abs(k.s()[i] - a * std::tanh(k.x(i) / sqrt2)));
    CHECK(err <= 1e-6);
    CHECK(std::abs(k.psi_star()) <= 1e-9);
    // interpolation between the nodes
    double ierr = 0;
    for (double x = -10.005; x < 10; x += 0.37)
      ierr = std::max(ierr, std::abs(k.s_at(x) - a * std::tanh(x / sqrt2)));
    CHECK(ierr <= 1e-9);
    const KinkPoint p = k.eval(0.123);
    CHECK(p.s1 == doctest::Approx(a / sqrt2 * sech2(0.123 / sqrt2)).epsilon(1e-9));
  }
}

TEST_CASE("first integral from the samples") {
  CHECK(build_profile(make_quartic(1), 20, 0.01).first_integral_residual() <= 1e-10);
  CHECK(build_profile(make_flat_well(1, sqrt2, 0.1, 0.65), 30, 0.005).first_integral_residual() <= 1e-10);
  CHECK(build_profile(make_flat_well(1, sqrt2, 0.3, 0.5), 30, 0.005).first_integral_residual() <= 1e-10);
}

TEST_CASE("profile is monotone and reaches the vacua") {
  const KinkProfile k = build_profile(make_flat_well(1, sqrt2, 0.1, 0.65), 30, 0.005);
  for (std::size_t i = 0; i + 1 < k.size(); ++i) CHECK_LE(k.s()[i], k.s()[i + 1]);
  CHECK(std::abs(k.s().front() + 1) <= 1e-12);
  CHECK(std::abs(k.s().back() - 1) <= 1e-12);
}

TEST_CASE("tail rate is m") {
  const TailFit q = tail_rate(build_profile(make_quartic(1), 30, 0.005));
  CHECK(q.lambda_plus == doctest::Approx(sqrt2).epsilon(1e-4));
  CHECK(q.lambda_minus == doctest::Approx(sqrt2).epsilon(1e-4));
  CHECK_FALSE(q.flagged);
  // the flat well is exactly exponential once inside the collar
  const TailFit f = tail_rate(build_profile(make_flat_well(1, 1.5, 0.1, 0.65), 30, 0.005));
  CHECK(f.lambda_plus == doctest::Approx(1.5).epsilon(1e-6));
  CHECK_FALSE(f.flagged);
  // quartic tail window cut short: still fits, but the curvature of log|s-a| shows
  const TailFit t = tail_rate(build_profile(make_quartic(1), 30, 0.005).truncated(5));
  CHECK(t.flagged);
}

TEST_CASE("build_profile rejects bad domains") {
  CHECK_THROWS_AS(build_profile(make_quartic(1), 5, 0.01), DomainError);  // exp(-m L) too large
  CHECK_THROWS_AS(build_profile(make_quartic(1), 20, 0.003), DomainError);  // L/h not an integer
  CHECK_THROWS_AS(build_profile(make_quartic(1), 20, -0.01), DomainError);
}

TEST_CASE("soliton state is the boosted kink") {
  const KinkProfile k = build_profile(make_quartic(1), 30, 0.005);
  const Grid g = Grid::centered(20, 0.05);
  const SolitonParams sg{1.3, 0.6};
  const double gam = 1 / std::sqrt(1 - 0.36);
  CHECK(sg.gamma() == doctest::Approx(gam));
  const FieldState Y = soliton_state(k, sg, g);
  double e1 = 0, e2 = 0;
  for (std::size_t i = 0; i < g.n; ++i) {
    const double z = gam * (g.x(i) - 1.3);
    e1 = std::max(e1, std::abs(Y.psi[i] - std::tanh(z / sqrt2)));
    e2 = std::max(e2, std::abs(Y.pi[i] + 0.6 * gam * sech2(z / sqrt2) / sqrt2));
  }
  CHECK(e1 <= 1e-9);
  CHECK(e2 <= 1e-9);
}

TEST_CASE("kink energy and its Lorentz factor") {
  // quartic a = 1: E = int s'^2 = 2 sqrt2 / 3
  const KinkProfile k = build_profile(make_quartic(1), 30, 0.005);
  const Grid g = Grid::centered(30, 0.02, 8);
  const double E0 = energy(soliton_state(k, {0, 0}, g), k.potential());
  CHECK(E0 == doctest::Approx(2 * sqrt2 / 3).epsilon(1e-9));
  const double v = 0.5, gam = 1 / std::sqrt(1 - v * v);
  CHECK(energy(soliton_state(k, {0, v}, g), k.potential()) == doctest::Approx(gam * E0).epsilon(1e-9));
}
