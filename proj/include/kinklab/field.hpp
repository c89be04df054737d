#pragma once

#include <cstddef>
#include <vector>

#include "kinklab/potential.hpp"

namespace kinklab {

// Uniform grid x_i = x0 + i h. `order` is the accuracy of the centered
// difference stencils used on this grid (2, 4, 6 or 8), or 0 for Fourier
// differentiation over the periodic box of n nodes.
struct Grid {
  double x0 = 0;
  double h = 1;
  std::size_t n = 1;
  int order = 6;

  // nodes -L..L, n = 2L/h + 1 odd so that x = 0 is a node
  static Grid centered(double L, double h, int order = 6);

  double x(std::size_t i) const { return x0 + double(i) * h; }
  double L() const { return 0.5 * double(n - 1) * h; }
  Grid shifted(double b) const;  // same nodes relabelled y = x - b
  bool same_nodes(const Grid& o, double tol = 1e-12) const;
};

struct FieldState {
  Grid grid;
  std::vector<double> psi, pi;
  double t = 0;

  FieldState() = default;
  explicit FieldState(const Grid& g) : grid(g), psi(g.n, 0.0), pi(g.n, 0.0) {}
  bool finite() const;
};

// transversal component in the moving frame y = x - b
struct PerturbationState {
  Grid grid;
  std::vector<double> Psi, Pi;

  PerturbationState() = default;
  explicit PerturbationState(const Grid& g) : grid(g), Psi(g.n, 0.0), Pi(g.n, 0.0) {}
  bool finite() const;

  PerturbationState& operator+=(const PerturbationState& o);
  PerturbationState& operator-=(const PerturbationState& o);
  PerturbationState& operator*=(double s);
  // this += s * o
  void axpy(double s, const PerturbationState& o);
};

PerturbationState operator+(PerturbationState a, const PerturbationState& b);
PerturbationState operator-(PerturbationState a, const PerturbationState& b);
PerturbationState operator*(double s, PerturbationState a);

// How the stencils see past the grid ends.
//  zero:      ghost values 0 (perturbations, Dirichlet)
//  constant:  ghost values repeat the end value (clamped fields)
//  one_sided: reduced-order centered near the ends, one-sided at the ends (diagnostics)
// On spectral grids (order 0) one_sided behaves like constant: a smooth step
// between the end values is subtracted before the transform.
enum class Ghost { zero, constant, one_sided };

void diff1(const std::vector<double>& f, const Grid& g, Ghost ghost, std::vector<double>& out);
void diff2(const std::vector<double>& f, const Grid& g, Ghost ghost, std::vector<double>& out);
std::vector<double> diff1(const std::vector<double>& f, const Grid& g, Ghost ghost);
std::vector<double> diff2(const std::vector<double>& f, const Grid& g, Ghost ghost);

// largest eigenvalue of -D2 on this grid's stencil (for stability bounds)
double laplacian_spectral_radius(const Grid& g);

double trapezoid(const std::vector<double>& f, double h);
double trapezoid(const std::vector<double>& f, double h, std::size_t i0, std::size_t i1);

double energy(const FieldState& Y, const Potential& p);
std::vector<double> energy_density(const FieldState& Y, const Potential& p);

double norm_E_alpha(const PerturbationState& X, double alpha);
double norm_E(const PerturbationState& X);  // unweighted
double norm_W(const PerturbationState& X);
double norm_Linf(const std::vector<double>& f);
double norm_L2_alpha(const std::vector<double>& f, const Grid& g, double alpha);

}  // namespace kinklab
