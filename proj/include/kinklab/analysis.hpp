#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "kinklab/evolve.hpp"
#include "kinklab/history.hpp"
#include "kinklab/kink.hpp"
#include "kinklab/symplectic.hpp"

namespace kinklab {

struct DecayFit {
  double t1 = 0, t2 = 0;
  double exponent = 0, intercept = 0;
  double residual = 0;  // rms of log y about the fit
  int samples = 0;
};

// least squares of log y against log(1+t) over samples with t in [t1, t2]
DecayFit fit_power_law(const std::vector<double>& t, const std::vector<double>& y, double t1, double t2);

struct Majorants {
  std::vector<double> t, m1, m2;
  // relative growth over the last decade [T/10, T]
  double growth1 = 0, growth2 = 0;
};

// m1 = sup (1+s)^{3/2} ||X||_{E_-beta},  m2 = sup (1+s)^{1/2} ||Psi||_inf
Majorants majorants(const RunHistory& h);
double final_decade_growth(const std::vector<double>& t, const std::vector<double>& m);

struct VirialResult {
  DecayFit fit;
  double bound = 0;  // 4 + nu + 1/2
  bool pass = false;
};

// growth of ||Psi||_{L^2_{5/2+nu}} on [T/4, T]
VirialResult virial_check(const RunHistory& h, double nu);
VirialResult virial_check(const std::vector<double>& t, const std::vector<double>& weighted, double nu);

// trapezoid of f over [x1, x2], linear interpolation at non-node ends; the
// range is clipped to the grid
double integrate_between(const std::vector<double>& f, const Grid& g, double x1, double x2);

struct WeightedEnergyResult {
  double sigma = 0;
  std::vector<double> t, ratio;
  double initial = 0, early_max = 0, late_max = 0;  // R(0), max on [0, T/2), max on [T/2, T]
  bool pass = false;
};

// R(t) = int (1+|x-b|^s) e(x,t) / [(1+t+|b|)^{s+1} int (1+|x|^s) e(x,0)].
// Bounded means: sup R <= 10 R(0), and the second half sets no new high beyond
// twice the first half's (a growing R fails even when still small).
WeightedEnergyResult weighted_energy_check(const std::vector<FieldState>& snapshots,
                                           const std::vector<double>& b, const Potential& p, double sigma);
WeightedEnergyResult weighted_energy_check(const std::vector<double>& t,
                                           const std::vector<std::vector<double>>& densities,
                                           const Grid& grid, const std::vector<double>& b, double sigma);

struct LocalEnergySample {
  double t = 0, a1 = 0, a2 = 0;
  double lhs = 0, rhs = 0;  // int_{a1}^{a2} e(t)  vs  int_{a1-t}^{a2+t} e(0)
  bool pass = false;
};

struct LocalEnergyResult {
  std::vector<LocalEnergySample> samples;
  double worst_excess = 0;  // max lhs - rhs
  bool pass = false;
};

// random intervals (centres within T+10 of the grid centre) at random snapshot times
LocalEnergyResult local_energy_check(const std::vector<FieldState>& snapshots, const Potential& p, int count,
                                     unsigned long long seed, double slack = 1e-6);

struct TrackerOptions {
  double beta = 2.6;
  double nu = 0.25;
  bool keep_fields = false;  // lab-frame Y at every sample
  bool keep_X = false;       // moving-frame X at every sample
  ProjectOptions projection;
};

// Observer for evolve_nonlinear: projects every sample (seeded by the previous
// sigma) and records sigma, c, the modulation rates and the norms of X.
Observer make_tracker(const KinkProfile& profile, const SolitonParams& seed, const TrackerOptions& opt = {});

struct ModulationCheck {
  double t1 = 0, t2 = 0;
  double mismatch_c = 0, mismatch_v = 0;  // rms of finite difference minus rhs
  double error_c = 0, error_v = 0;        // rms discretization error estimate
  double floor = 0;                       // noise floor from the projection tolerance
  double ratio = 0;                       // worst mismatch / (error + floor)
  bool pass = false;
};

// Centered differences of b (minus v) and v at the sample stride, against the recorded
// rates. Error estimate: Richardson difference against twice the stride, plus,
// given a rerun at half the time step with the same samples, 4/3 of the gap
// between the two runs' differences (second-order stepper).
ModulationCheck modulation_crosscheck(const RunHistory& h, double t1, double t2, double factor = 10,
                                      const RunHistory* refined = nullptr);

struct HalvingResult {
  double full = 0, half = 0;  // |cdot| + |vdot|
  double ratio = 0;           // full / half, 4 for a quadratic law
  bool pass = false;
};

HalvingResult halving_test(const PerturbationState& X, const TangentFrame& frame, const KinkProfile& profile,
                           double tol = 0.1);

}  // namespace kinklab
