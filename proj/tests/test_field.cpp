#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "kinklab/field.hpp"

using namespace kinklab;

namespace {

std::vector<double> sample(const Grid& g, double (*f)(double)) {
  std::vector<double> v(g.n);
  for (std::size_t i = 0; i < g.n; ++i) v[i] = f(g.x(i));
  return v;
}

double gauss(double x) { return std::exp(-x * x); }
double gauss1(double x) { return -2 * x * std::exp(-x * x); }
double gauss2(double x) { return (4 * x * x - 2) * std::exp(-x * x); }
double tanh_(double x) { return std::tanh(x); }
double tanh1(double x) { return 1 - std::tanh(x) * std::tanh(x); }

double max_err(const std::vector<double>& a, const Grid& g, double (*f)(double)) {
  double e = 0;
  for (std::size_t i = 0; i < g.n; ++i) e = std::max(e, std::abs(a[i] - f(g.x(i))));
  return e;
}

}  // namespace

TEST_CASE("centered grid") {
  const Grid g = Grid::centered(10, 0.05);
  CHECK(g.n == 401);
  CHECK(std::abs(g.x(200)) <= 1e-14);
  CHECK(g.L() == doctest::Approx(10));
  const Grid s = g.shifted(0.3);
  CHECK(s.x(200) == doctest::Approx(-0.3));
  CHECK_FALSE(s.same_nodes(g));
  CHECK(g.same_nodes(Grid::centered(10, 0.05)));
}

TEST_CASE("finite difference orders converge at their nominal rate") {
  for (int order : {2, 4, 6, 8}) {
    const Grid a = Grid::centered(10, 0.1, order), b = Grid::centered(10, 0.05, order);
    const double e1a = max_err(diff1(sample(a, gauss), a, Ghost::zero), a, gauss1);
    const double e1b = max_err(diff1(sample(b, gauss), b, Ghost::zero), b, gauss1);
    const double e2a = max_err(diff2(sample(a, gauss), a, Ghost::zero), a, gauss2);
    const double e2b = max_err(diff2(sample(b, gauss), b, Ghost::zero), b, gauss2);
    CAPTURE(order);
    CHECK(std::log2(e1a / e1b) == doctest::Approx(order).epsilon(0.1));
    CHECK(std::log2(e2a / e2b) == doctest::Approx(order).epsilon(0.1));
  }
}

TEST_CASE("Fourier differentiation is spectrally accurate") {
  const Grid g = Grid::centered(12, 0.1, 0);
  CHECK(max_err(diff1(sample(g, gauss), g, Ghost::zero), g, gauss1) <= 1e-10);
  CHECK(max_err(diff2(sample(g, gauss), g, Ghost::zero), g, gauss2) <= 1e-10);
  // a clamped step: the end values differ, the derivative still converges
  const Grid k = Grid::centered(25, 0.05, 0);
  CHECK(max_err(diff1(sample(k, tanh_), k, Ghost::constant), k, tanh1) <= 1e-10);
}

TEST_CASE("clamped ghosts on a finite-difference grid") {
  const Grid g = Grid::centered(25, 0.05, 6);
  CHECK(max_err(diff1(sample(g, tanh_), g, Ghost::constant), g, tanh1) <= 1e-7);
}

TEST_CASE("spectral radius of the Laplacian") {
  CHECK(laplacian_spectral_radius(Grid::centered(10, 0.1, 2)) == doctest::Approx(4 / 0.01).epsilon(1e-3));
  CHECK(laplacian_spectral_radius(Grid::centered(10, 0.1, 0)) == doctest::Approx(M_PI * M_PI / 0.01).epsilon(1e-2));
}

TEST_CASE("quadrature and norms against closed forms") {
  const Grid g = Grid::centered(12, 0.01, 8);
  CHECK(trapezoid(sample(g, gauss), g.h) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
  PerturbationState X(g);
  X.Psi = sample(g, gauss);
  // ||f||_2 = ||f'||_2 = (pi/2)^{1/4} for f = exp(-x^2)
  const double q = std::pow(M_PI / 2, 0.25);
  CHECK(norm_E(X) == doctest::Approx(2 * q).epsilon(1e-9));
  CHECK(norm_E_alpha(X, 0) == doctest::Approx(2 * q).epsilon(1e-9));
  CHECK(norm_L2_alpha(X.Psi, g, 0) == doctest::Approx(q).epsilon(1e-9));
  CHECK(norm_E_alpha(X, -2) < norm_E(X));
  CHECK(norm_E_alpha(X, 1) > norm_E(X));
  // W: L1 of f, f', f''. |f'| integrates to the total variation 2; |f''| to
  // twice the jump of f' between its extremes at -+1/sqrt2
  const double l1f2 = 2 * (2 * std::sqrt(2.0) * std::exp(-0.5));
  CHECK(norm_W(X) == doctest::Approx(std::sqrt(M_PI) + 2 + l1f2).epsilon(1e-6));
  CHECK(norm_Linf(X.Psi) == doctest::Approx(1));
}

TEST_CASE("perturbation arithmetic") {
  const Grid g = Grid::centered(1, 0.5);
  PerturbationState a(g), b(g);
  a.Psi = {1, 2, 3, 4, 5};
  b.Pi = {1, 1, 1, 1, 1};
  const PerturbationState c = a + 2.0 * b;
  CHECK(c.Psi[2] == 3);
  CHECK(c.Pi[4] == 2);
  PerturbationState d = c - a;
  CHECK(d.Psi[0] == 0);
  d.axpy(-2, b);
  CHECK(d.Pi[1] == 0);
  CHECK(d.finite());
  d.Pi[0] = NAN;
  CHECK_FALSE(d.finite());
}

TEST_CASE("vacuum has no energy, a kink has its mass") {
  const Potential p = make_quartic(1);
  const Grid g = Grid::centered(20, 0.05, 6);
  FieldState vac(g);
  for (auto& x : vac.psi) x = 1;
  CHECK(energy(vac, p) == 0);
  FieldState k(g);
  for (std::size_t i = 0; i < g.n; ++i) k.psi[i] = std::tanh(g.x(i) / std::sqrt(2.0));
  CHECK(energy(k, p) == doctest::Approx(2 * std::sqrt(2.0) / 3).epsilon(1e-7));
  const auto e = energy_density(k, p);
  CHECK(e[g.n / 2] == doctest::Approx(0.5).epsilon(1e-7));  // s'(0)^2/2 + U(0) = 1/4 + 1/4
}
