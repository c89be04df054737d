#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kinklab/field.hpp"
#include "kinklab/history.hpp"
#include "kinklab/kink.hpp"
#include "kinklab/potential.hpp"

namespace kinklab {

enum class Scheme { leapfrog, strang };
enum class Boundary { clamped_vacuum, periodic };

std::string to_string(Scheme s);
std::string to_string(Boundary b);
Scheme scheme_from_string(const std::string& s);
Boundary boundary_from_string(const std::string& s);

struct EvolveConfig {
  double dt = 0.025;
  double T = 10;
  Scheme scheme = Scheme::leapfrog;
  Boundary boundary = Boundary::clamped_vacuum;
  int snapshot_stride = 40;  // steps between observer calls

  std::size_t steps() const;
  // CFL dt <= 0.9 h, T/dt integral, plus the actual stability limit of the stencil
  void validate(const Grid& g, double max_rate) const;
};

// Leapfrog / Strang stepper for psi_t = pi, pi_t = psi'' + F(psi) with the end
// nodes held fixed. Keeps its scratch buffers between calls.
class NonlinearStepper {
 public:
  NonlinearStepper(const Potential& p, Scheme scheme = Scheme::leapfrog);
  void step(FieldState& Y, double dt);

 private:
  void kick(FieldState& Y, double dt);
  const Potential& p_;
  Scheme scheme_;
  std::vector<double> acc_;
};

FieldState step_nonlinear(const FieldState& Y, const Potential& p, double dt,
                          Scheme scheme = Scheme::leapfrog);

// observers see the state at t = 0 and every snapshot_stride steps
using Observer = std::function<void(const FieldState&, RunHistory&)>;

// records t and energy at every stride; throws IntegrationError on NaN
RunHistory evolve_nonlinear(const FieldState& Y0, const Potential& p, const EvolveConfig& cfg,
                            const std::vector<Observer>& observers = {},
                            FieldState* final_state = nullptr);

// A_{v,w} on a fixed grid, V_v(y) = U''(s(gamma y)) - m^2 sampled at the nodes
class LinearOperator {
 public:
  LinearOperator(const KinkProfile& profile, double v, double w, const Grid& grid);
  void apply(const PerturbationState& X, PerturbationState& out) const;
  PerturbationState apply(const PerturbationState& X) const;
  // 1/2<Pi,Pi> + 1/2<Psi,(-D2+m^2+V)Psi> + w<Pi,D Psi>
  double hamiltonian(const PerturbationState& X) const;
  const std::vector<double>& V() const { return V_; }
  double v() const { return v_; }
  double w() const { return w_; }
  const Grid& grid() const { return grid_; }
  // bound on the spectral radius of the discrete operator
  double max_rate() const;

 private:
  Grid grid_;
  double v_, w_, m2_;
  std::vector<double> V_;
  mutable std::vector<double> d1_, d2_, dp_;
};

PerturbationState apply_A(const PerturbationState& X, double v, double w, const KinkProfile& profile);

using LinearObserver = std::function<void(double t, const PerturbationState&, RunHistory&)>;

// RK4 for X' = A_v X (w = v). Records t, E_{-beta}, Linf, W and the frozen
// Hamiltonian at every stride; snapshots if keep_snapshots.
RunHistory evolve_linearized(const PerturbationState& X0, double v, const KinkProfile& profile,
                             const EvolveConfig& cfg, double beta = 2.6, bool keep_snapshots = false,
                             const std::vector<LinearObserver>& observers = {},
                             PerturbationState* final_state = nullptr);

// Free Klein-Gordon group in the frame moving with velocity v, via FFT on the
// zero-padded periodic extension. Exact dispersion omega(k) = sqrt(k^2 + m^2).
class FreeKG {
 public:
  FreeKG(const Grid& g, double m);
  ~FreeKG();
  FreeKG(const FreeKG&) = delete;
  FreeKG& operator=(const FreeKG&) = delete;
  PerturbationState apply(const PerturbationState& X, double t, double v) const;
  std::size_t padded_size() const { return nfft_; }

 private:
  Grid grid_;
  double m_;
  std::size_t nfft_;
  struct Plans;
  Plans* plans_;
};

PerturbationState free_kg(const PerturbationState& X, double t, double v, double m);

}  // namespace kinklab
