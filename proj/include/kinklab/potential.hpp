#pragma once

#include <string>
#include <vector>

namespace kinklab {

enum class PotentialKind { quartic, flat_well };

std::string to_string(PotentialKind k);
PotentialKind potential_kind_from_string(const std::string& s);

// Which branch of the piecewise definition a field value falls in.
enum class Piece { left_collar, bridge, right_collar, smooth };

class Potential {
 public:
  // derivatives above this order are not evaluated
  static constexpr int max_order = 16;

  PotentialKind kind() const { return kind_; }
  double a() const { return a_; }
  double m() const { return m_; }
  double m2() const { return m_ * m_; }
  double delta() const { return delta_; }
  double barrier_height() const { return barrier_; }

  double value(double psi) const { return derivative(psi, 0); }
  double derivative(double psi, int order) const;
  // F = -U'
  double force(double psi) const { return -derivative(psi, 1); }
  // F(psi + d) - F(psi) - F'(psi) d, evaluated without catastrophic cancellation
  double force_remainder(double psi, double d) const;

  Piece piece(double psi) const;
  // bridge endpoints (-a+delta, a-delta); quartic returns (-a, a)
  double bridge_lo() const;
  double bridge_hi() const;

  // d^order U / dpsi^order of the bridge polynomial at t = (psi - lo)/(hi - lo),
  // valid on all of [0, 1] including the joints
  double bridge_derivative(double t, int order) const;

  // Bernstein coefficients of the bridge in t = (psi - lo)/(hi - lo)
  const std::vector<double>& bridge_coefficients() const { return bern_[0]; }

  friend Potential make_quartic(double a);
  friend Potential make_flat_well_unchecked(double a, double m, double delta,
                                            double barrier_height);

 private:
  PotentialKind kind_ = PotentialKind::quartic;
  double a_ = 1, m_ = 1, delta_ = 0, barrier_ = 0;
  // bern_[k] = Bernstein coefficients of d^k/dt^k of the bridge
  std::vector<std::vector<double>> bern_;
};

Potential make_quartic(double a);
// validates and checks bridge positivity
Potential make_flat_well(double a, double m, double delta, double barrier_height);
// same construction, no checks beyond parameter sanity; for counterexamples
Potential make_flat_well_unchecked(double a, double m, double delta,
                                   double barrier_height);

// base value of the bridge at its midpoint with no bump; a flat_well with
// barrier_height below this has a double-humped barrier
double flat_well_base_center(double a, double m, double delta);

struct ClauseResult {
  std::string name;
  bool pass = false;
  double value = 0;  // the measured quantity
  std::string detail;
};

struct ConditionReport {
  std::vector<ClauseResult> clauses;
  bool pass() const;
  const ClauseResult& clause(const std::string& name) const;
};

ConditionReport check_U1(const Potential& p, double tol);

// argmax of U on (-a, a), leftmost on ties
double barrier_argmax(const Potential& p);

}  // namespace kinklab
