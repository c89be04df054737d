#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kinklab/field.hpp"
#include "kinklab/kink.hpp"
#include "kinklab/potential.hpp"

namespace kinklab {

// H = -(1-v^2) D2 + m^2 + V on the interior nodes of `grid` (Dirichlet ends),
// second-order Laplacian
struct SymTridiagonal {
  Grid grid;  // interior nodes only
  double v = 0, m2 = 0;
  std::vector<double> diag, off;
};

SymTridiagonal assemble_Hv(const KinkProfile& profile, double v, const Grid& grid);
SymTridiagonal assemble_H(const std::vector<double>& V_interior, double m2, double v, const Grid& interior);

struct Eigenpairs {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;  // h sum u^2 = 1, sign fixed so that sum u > 0
};

// lowest `count` eigenpairs (LAPACK dstevr)
Eigenpairs discrete_spectrum(const SymTridiagonal& H, int count);

enum class Resonance { resonance, none, inconclusive };
std::string to_string(Resonance r);

struct ResonanceResult {
  Resonance verdict = Resonance::inconclusive;
  double wronskian = 0;  // normalized
  double x_inf = 0;
  double threshold = 1e-3;
};

// shoot (H_v - m^2) psi = 0 from both ends with (psi, psi') = (1, 0)
ResonanceResult resonance_test(const std::function<double(double)>& V, double v, double x_inf,
                               double threshold = 1e-3, double step = 1e-3);
ResonanceResult resonance_test(const KinkProfile& profile, double v, double threshold = 1e-3,
                               double step = 1e-3);

// where |V_v| stays below tol for good
double potential_support(const KinkProfile& profile, double v, double tol = 1e-12);

struct SpectralOptions {
  double L = 20;         // box half-length for the eigenproblem
  double h = 0.01;       // coarse spacing; h/2 is the fine one
  int count = 8;         // eigenpairs requested
  double zero_tol = 1e-3;
  double edge_gap = 1e-3;  // eigenvalues within this of m^2 count as continuum edge
  double resonance_threshold = 1e-3;
};

struct SpectralReport {
  double v = 0;
  double m2 = 0;
  std::vector<double> eigenvalues;         // Richardson extrapolated, ascending, <= m^2 + margin
  std::vector<double> eigenvalues_coarse;  // at h
  std::vector<double> eigenvalues_fine;    // at h/2
  std::vector<bool> discrete;              // below the continuum edge
  int internal_modes_coarse = 0, internal_modes_fine = 0;
  double groundstate_overlap = 0;
  ResonanceResult resonance;
  bool zero_present = false;
  bool u2 = false;
  std::vector<std::string> diagnostics;
  Eigenpairs fine_pairs;  // eigenfunctions at h/2 (interior grid below)
  Grid fine_grid;
};

SpectralReport spectral_report(const KinkProfile& profile, double v, const SpectralOptions& opt = {});

struct U2Certificate {
  bool pass = false;
  bool inconclusive = false;
  SpectralReport base;                  // v = 0
  std::vector<SpectralReport> boosted;  // one per requested v
  std::vector<double> discrepancy;      // max eigenvalue mismatch vs v = 0
  std::vector<std::string> diagnostics;
};

U2Certificate certify_U2(const Potential& p, const std::vector<double>& v_list,
                         const SpectralOptions& opt = {});

struct RootSpaceReport {
  double v = 0;
  double residual_tau1 = 0, residual_tau2 = 0;  // E-norms of A tau1, A tau2 - tau1
  double kernel_norm = 0;                       // <psi_v', psi_v'>
  std::vector<double> internal_modes;           // eigenvalues of H_v in (0, m^2)
  std::vector<double> obstruction;              // matching +-i sqrt(mu)/gamma eigenvalues of A_v
  bool tangent_ok = false, fredholm_ok = false, no_modes = false;
  bool pass() const { return tangent_ok && fredholm_ok && no_modes; }
};

RootSpaceReport root_space_check(const KinkProfile& profile, double v, const Grid& grid,
                                 const SpectralOptions& opt = {}, double tol = 1e-6);

struct TuningCandidate {
  double barrier_height = 0;
  bool constructed = false;
  bool certified = false;
  double wronskian = 0;
  double v_depth = 0;  // max |V_0|
  int internal_modes = 0;
  std::string note;
};

struct TuningResult {
  bool found = false;
  double barrier_height = 0;
  std::vector<TuningCandidate> candidates;
  U2Certificate coarse, fine;  // the winner, at the base and at doubled resolution
};

// Scans barrier heights for a flat well with no internal modes and no threshold
// resonance, keeping the certified one farthest from resonance (largest
// normalized Wronskian). The winner is re-certified at doubled resolution.
TuningResult tune_flat_well(double a, double m, double delta, const std::vector<double>& heights,
                            const std::vector<double>& v_list = {0.5},
                            const SpectralOptions& opt = {});

}  // namespace kinklab
