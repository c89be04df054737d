#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "kinklab/errors.hpp"
#include "kinklab/potential.hpp"

using namespace kinklab;

namespace {
// 4th-order central difference of the (order-1)th derivative
double fd(const Potential& p, double x, int order) {
  const double h = 1e-3;
  auto f = [&](double y) { return p.derivative(y, order - 1); };
  return (8 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12 * h);
}
const double sqrt2 = std::sqrt(2.0);
}  // namespace

TEST_CASE("quartic closed forms") {
  for (double a : {0.5, 1.0, 2.0}) {
    const Potential p = make_quartic(a);
    CHECK(p.value(0) == doctest::Approx(a * a / 4).epsilon(1e-15));
    CHECK(p.value(a) == 0);
    CHECK(p.value(-a) == 0);
    CHECK(p.derivative(a, 1) == 0);
    // m^2 = U''(a) = 2 for every a with this normalization
    CHECK(p.derivative(a, 2) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(p.force(0.3 * a) == doctest::Approx(-p.derivative(0.3 * a, 1)));
  }
  CHECK_THROWS_AS(make_quartic(0), DomainError);
}

TEST_CASE("derivatives agree with finite differences") {
  const Potential q = make_quartic(1);
  const Potential f = make_flat_well(1, sqrt2, 0.1, 0.65);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.85, 0.85);
  for (int k = 0; k < 50; ++k) {
    const double x = u(rng);
    for (int order = 1; order <= 4; ++order) {
      const double scale = 1 + std::abs(q.derivative(x, order));
      CHECK(std::abs(fd(q, x, order) - q.derivative(x, order)) <= 1e-8 * scale);
      const double fs = 1 + std::abs(f.derivative(x, order));
      CHECK(std::abs(fd(f, x, order) - f.derivative(x, order)) <= 1e-6 * fs);
    }
  }
}

TEST_CASE("flat well collars are exactly quadratic") {
  const double a = 1, m = sqrt2, d = 0.1;
  const Potential p = make_flat_well(a, m, d, 0.65);
  for (double e : {0.0, 1e-6, 0.03, 0.0999}) {
    CHECK(p.value(a - e) == doctest::Approx(0.5 * m * m * e * e).epsilon(1e-14));
    CHECK(p.value(-a + e) == doctest::Approx(0.5 * m * m * e * e).epsilon(1e-14));
    CHECK(p.derivative(a - e, 3) == 0);
  }
  CHECK(p.piece(a - 0.05) == Piece::right_collar);
  CHECK(p.piece(0) == Piece::bridge);
  // the bump is sized so that U(0) is the requested barrier
  CHECK(p.value(0) == doctest::Approx(0.65).epsilon(1e-12));
}

TEST_CASE("bridge joins the collars to order 14") {
  const double a = 1, m = sqrt2, d = 0.1;
  const Potential p = make_flat_well(a, m, d, 0.65);
  const double m2 = m * m;
  // left joint psi = -a + d: collar derivatives m2 d^2/2, m2 d, m2, then 0
  const double left[3] = {0.5 * m2 * d * d, m2 * d, m2};
  const double right[3] = {0.5 * m2 * d * d, -m2 * d, m2};
  for (int k = 0; k <= 14; ++k) {
    // natural size of the k-th derivative on the bridge; Bernstein differentiation
    // loses about that much times machine precision
    double scale = 0;
    for (int i = 0; i <= 200; ++i) scale = std::max(scale, std::abs(p.bridge_derivative(i / 200.0, k)));
    const double want_l = k < 3 ? left[k] : 0.0, want_r = k < 3 ? right[k] : 0.0;
    CHECK(std::abs(p.bridge_derivative(0, k) - want_l) <= 1e-11 * scale);
    CHECK(std::abs(p.bridge_derivative(1, k) - want_r) <= 1e-11 * scale);
  }
  // order 15 is where the joint stops being smooth
  double s15 = 0;
  for (int i = 0; i <= 200; ++i) s15 = std::max(s15, std::abs(p.bridge_derivative(i / 200.0, 15)));
  CHECK(std::abs(p.bridge_derivative(0, 15)) > 1e-3 * s15);
}

TEST_CASE("force remainder is second order and matches direct evaluation") {
  const Potential q = make_quartic(1);
  const Potential f = make_flat_well(1, sqrt2, 0.1, 0.65);
  for (const Potential* p : {&q, &f})
    for (double x : {-0.5, 0.0, 0.4})
      for (double d : {1e-2, 1e-3, 1e-4}) {
        const double direct = p->force(x + d) - p->force(x) + p->derivative(x, 2) * d;
        // the direct difference itself carries ~1e-16 absolute cancellation error
        CHECK(std::abs(p->force_remainder(x, d) - direct) <= 1e-14 + 1e-6 * std::abs(direct));
        // |R| ~ |U'''| d^2 / 2
        CHECK(std::abs(p->force_remainder(x, d)) <= (std::abs(p->derivative(x, 3)) + 1) * d * d);
      }
  CHECK(f.force_remainder(0.95, 0.01) == 0);  // both in the collar
}

TEST_CASE("make_flat_well validates its parameters") {
  CHECK_THROWS_AS(make_flat_well(1, sqrt2, 0.6, 0.65), DomainError);
  CHECK_THROWS_AS(make_flat_well(1, sqrt2, 0.1, 0.005), DomainError);  // not above the joint value m^2 d^2/2 = 0.01
  CHECK_THROWS_AS(make_flat_well(1, -1, 0.1, 0.65), DomainError);
  CHECK_NOTHROW(make_flat_well_unchecked(1, sqrt2, 0.1, 0.005));
}

TEST_CASE("check_U1") {
  const ConditionReport f = check_U1(make_flat_well(1, sqrt2, 0.1, 0.65), 1e-10);
  CHECK(f.pass());
  CHECK(f.clause("flatness").pass);
  const ConditionReport q = check_U1(make_quartic(1), 1e-10);
  CHECK_FALSE(q.pass());
  CHECK(q.clause("wells").pass);
  CHECK(q.clause("interior_positive").pass);
  CHECK_FALSE(q.clause("flatness").pass);
  CHECK_THROWS(q.clause("no such clause"));
}

TEST_CASE("barrier argmax") {
  CHECK(std::abs(barrier_argmax(make_quartic(1))) <= 1e-6);
  // symmetric bridge with a single hump
  CHECK(std::abs(barrier_argmax(make_flat_well(1, sqrt2, 0.1, 0.65))) <= 1e-6);
}

TEST_CASE("kind strings round trip") {
  for (auto k : {PotentialKind::quartic, PotentialKind::flat_well}) CHECK(potential_kind_from_string(to_string(k)) == k);
  CHECK_THROWS(potential_kind_from_string("sextic"));
}
