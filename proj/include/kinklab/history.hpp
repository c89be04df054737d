#pragma once

#include <string>
#include <vector>

#include "kinklab/field.hpp"

namespace kinklab {

// Sampled record of a run. Series that a run does not produce stay empty.
struct RunHistory {
  std::vector<double> t;

  // modulation coordinates (tracked nonlinear runs)
  std::vector<double> b, v, c, cdot, vdot, residual1, residual2;

  // norms of the transversal component
  std::vector<double> E_minus_beta, Linf, W, L2_weighted;
  std::vector<double> energy;       // nonlinear Hamiltonian
  std::vector<double> hamiltonian;  // frozen linear Hamiltonian

  // optional snapshots
  std::vector<double> snapshot_t;
  std::vector<PerturbationState> snapshots;  // moving frame X
  std::vector<FieldState> field_snapshots;   // lab frame Y

  double beta = 2.6;
  double nu = 0.25;
  std::string config_echo;  // JSON text of the scenario that produced the run
};

}  // namespace kinklab
