#pragma once

#include <string>
#include <vector>

#include "kinklab/analysis.hpp"
#include "kinklab/history.hpp"
#include "kinklab/kink.hpp"

namespace kinklab {

struct AsymptoticsResult {
  double v_plus = 0, q_plus = 0;
  // |v(t) - v_plus| ~ A (1+t)^p on [T/4, T]; exponent = p
  DecayFit v_tail;
  double b_fit_residual = 0;  // rms of b - (q_plus + v_plus t) on [T/4, T]

  std::vector<double> t;
  // ||Phi^T - Phi^t||_E + tail: estimate of ||r_+(t)||_E
  std::vector<double> remainder;
  // ||Phi^{2t} - Phi^t||_E where 2t <= T, NaN elsewhere
  std::vector<double> increment;
  DecayFit remainder_fit;  // remainder on [T/4, T]
  DecayFit increment_fit;  // dyadic increments on [T/8, T/2]; sets the tail estimate

  PerturbationState phi;  // Phi_+ truncated at T, lab frame
  double phi_norm = 0;
  double tail_estimate = 0;  // ||Phi_+ - Phi^T||_E bound from the fitted rate
  double tail_ratio = 0;     // tail_estimate / phi_norm
  // relative gap between Phi^T from the Duhamel quadrature and from W0(-T) Z(T)
  double quadrature_mismatch = 0;
  std::vector<std::string> warnings;
};

// Needs a tracked run with lab-frame snapshots at every sample (TrackerOptions::keep_fields).
// Phi^t = W0(-t) Z(t) with Z = Y - S(sigma(t)); the Duhamel quadrature
// Z(0) + int_0^T W0(-s) R(s) ds is evaluated alongside as a cross-check.
AsymptoticsResult extract_asymptotics(const RunHistory& run, const KinkProfile& profile);

}  // namespace kinklab
