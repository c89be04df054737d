#pragma once

#include <vector>

#include "kinklab/field.hpp"
#include "kinklab/potential.hpp"

namespace kinklab {

struct SolitonParams {
  double b = 0;
  double v = 0;
  double gamma() const;
};

// s and its first three derivatives at one point
struct KinkPoint {
  double s, s1, s2, s3;
};

class KinkProfile {
 public:
  const Potential& potential() const { return pot_; }
  double a() const { return pot_.a(); }
  double m() const { return pot_.m(); }
  double psi_star() const { return psi_star_; }
  double x0() const { return x0_; }
  double h() const { return h_; }
  std::size_t size() const { return s_.size(); }
  double x(std::size_t i) const { return x0_ + double(i) * h_; }
  double L() const { return x(size() - 1); }
  const std::vector<double>& s() const { return s_; }
  const std::vector<double>& s_prime() const { return sp_; }

  // quintic Hermite interpolation of s; derivatives through the first integral
  KinkPoint eval(double x) const;
  double s_at(double x) const { return eval(x).s; }

  // max |s'^2/2 - U(s)| over interior samples, s' from 8th-order differences of s
  // (the stored s_prime is sqrt(2U(s)) and satisfies it trivially)
  double first_integral_residual() const;

  // the same samples restricted to |x| <= L
  KinkProfile truncated(double L) const;

  friend KinkProfile build_profile(const Potential& p, double L, double h);

 private:
  Potential pot_;
  double psi_star_ = 0;
  double x0_ = 0, h_ = 1;
  std::vector<double> s_, sp_;
};

KinkProfile build_profile(const Potential& p, double L, double h);

struct TailFit {
  double lambda_minus = 0, lambda_plus = 0;
  double residual = 0;  // rms log-residual, worst side
  double threshold = 1e-6;
  bool flagged = false;
  int samples_minus = 0, samples_plus = 0;
};

TailFit tail_rate(const KinkProfile& profile);

// psi = s(gamma(x-b)), pi = -v gamma s'(gamma(x-b))
FieldState soliton_state(const KinkProfile& profile, const SolitonParams& sigma, const Grid& grid);

}  // namespace kinklab
