#pragma once

#include <array>
#include <utility>
#include <vector>

#include "kinklab/field.hpp"
#include "kinklab/kink.hpp"

namespace kinklab {

// <Psi1, Pi2> - <Pi1, Psi2>, trapezoid
double omega(const PerturbationState& X1, const PerturbationState& X2);

struct TangentFrame {
  double v = 0, gamma = 1;
  PerturbationState tau1, tau2;
  PerturbationState dv_tau1, dv_tau2;  // analytic d/dv
  PerturbationState dy_tau1, dy_tau2;  // d/dy
  double omega12 = 0;                  // Omega(tau1, tau2)
  // P^d X = sum_jl p[j][l] tau_j Omega(tau_l, X)
  std::array<std::array<double, 2>, 2> p{};
};

// samples on `grid`, read as moving-frame coordinates y
TangentFrame tangent_frame(const KinkProfile& profile, double v, const Grid& grid);

// (psi_v(y), pi_v(y)) on the moving-frame grid
PerturbationState soliton_moving(const KinkProfile& profile, double v, const Grid& grid);

struct ProjectionResult {
  SolitonParams sigma;
  PerturbationState X;  // on Y.grid.shifted(b)
  double residual1 = 0, residual2 = 0;
  double scale1 = 0, scale2 = 0;  // |Omega(X,tau_j)| must stay below these
  int iterations = 0;
};

struct ProjectOptions {
  double v_cap = 0.9;
  int max_iterations = 50;
  double rel_tol = 1e-10;
};

ProjectionResult project(const FieldState& Y, const KinkProfile& profile, const SolitonParams& guess,
                         const ProjectOptions& opt = {});

struct Split {
  PerturbationState Xd, Xc;
};
Split projector_split(const PerturbationState& X, const TangentFrame& frame);

// N(v, Psi) = F(psi_v + Psi) - F(psi_v) - F'(psi_v) Psi on X's grid
std::vector<double> nonlinearity_N(double v, const std::vector<double>& Psi, const KinkProfile& profile,
                                   const Grid& grid);

struct ModulationRates {
  double cdot = 0, vdot = 0, D = 0;
};

ModulationRates modulation_rhs(const PerturbationState& X, const TangentFrame& frame,
                               const KinkProfile& profile);

}  // namespace kinklab
