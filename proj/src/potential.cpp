#include "kinklab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kinklab/errors.hpp"

namespace kinklab {

namespace {

// smoothstep order: w' ~ t^(K-1) (1-t)^(K-1), bump (4t(1-t))^K
constexpr int K = 15;

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

using Bern = std::vector<double>;

Bern bmul(const Bern& f, const Bern& g) {
  const int p = int(f.size()) - 1, q = int(g.size()) - 1;
  Bern r(p + q + 1, 0.0);
  for (int i = 0; i <= p; ++i)
    for (int j = 0; j <= q; ++j)
      r[i + j] += binom(p, i) * binom(q, j) / binom(p + q, i + j) * f[i] * g[j];
  return r;
}

Bern elevate(Bern c, int degree) {
  while (int(c.size()) - 1 < degree) {
    const int n = int(c.size()) - 1;
    Bern e(n + 2);
    e[0] = c[0];
    e[n + 1] = c[n];
    for (int i = 1; i <= n; ++i) {
      const double s = double(i) / (n + 1);
      e[i] = s * c[i - 1] + (1 - s) * c[i];
    }
    c = std::move(e);
  }
  return c;
}

Bern badd(const Bern& f, const Bern& g) {
  const int n = int(std::max(f.size(), g.size())) - 1;
  Bern a = elevate(f, n), b = elevate(g, n);
  for (int i = 0; i <= n; ++i) a[i] += b[i];
  return a;
}

Bern bscale(Bern f, double s) {
  for (auto& x : f) x *= s;
  return f;
}

Bern bderiv(const Bern& c) {
  const int n = int(c.size()) - 1;
  if (n == 0) return Bern{0.0};
  Bern d(n);
  for (int i = 0; i < n; ++i) d[i] = n * (c[i + 1] - c[i]);
  return d;
}

// de Casteljau
double beval(const Bern& c, double t) {
  thread_local std::vector<double> b;
  b.assign(c.begin(), c.end());
  const double s = 1.0 - t;
  for (std::size_t r = 1; r < b.size(); ++r)
    for (std::size_t i = 0; i + r < b.size(); ++i) b[i] = s * b[i] + t * b[i + 1];
  return b[0];
}

double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

std::string to_string(PotentialKind k) {
  return k == PotentialKind::quartic ? "quartic" : "flat_well";
}

PotentialKind potential_kind_from_string(const std::string& s) {
  if (s == "quartic") return PotentialKind::quartic;
  if (s == "flat_well") return PotentialKind::flat_well;
  throw ConfigError("unknown potential kind '" + s + "'");
}

double Potential::bridge_lo() const {
  return kind_ == PotentialKind::quartic ? -a_ : -a_ + delta_;
}
double Potential::bridge_hi() const {
  return kind_ == PotentialKind::quartic ? a_ : a_ - delta_;
}

Piece Potential::piece(double psi) const {
  if (kind_ == PotentialKind::quartic) return Piece::smooth;
  if (psi >= a_ - delta_) return Piece::right_collar;
  if (psi <= -a_ + delta_) return Piece::left_collar;
  return Piece::bridge;
}

double Potential::derivative(double psi, int order) const {
  if (order < 0 || order > max_order) throw DomainError("derivative order out of range");
  if (kind_ == PotentialKind::quartic) {
    const double a2 = a_ * a_;
    switch (order) {
      case 0: {
        const double q = psi * psi - a2;
        return q * q / (4 * a2);
      }
      case 1: return psi * (psi * psi - a2) / a2;
      case 2: return (3 * psi * psi - a2) / a2;
      case 3: return 6 * psi / a2;
      case 4: return 6 / a2;
      default: return 0.0;
    }
  }
  const double m2 = m_ * m_;
  const Piece pc = piece(psi);
  if (pc != Piece::bridge) {
    const double d = pc == Piece::right_collar ? psi - a_ : psi + a_;
    switch (order) {
      case 0: return 0.5 * m2 * d * d;
      case 1: return m2 * d;
      case 2: return m2;
      default: return 0.0;
    }
  }
  return bridge_derivative((psi - bridge_lo()) / (bridge_hi() - bridge_lo()), order);
}

double Potential::bridge_derivative(double t, int order) const {
  if (bern_.empty()) throw DomainError("potential has no bridge polynomial");
  const double W = bridge_hi() - bridge_lo();
  return beval(bern_[order], t) / std::pow(W, order);
}

double Potential::force_remainder(double psi, double d) const {
  if (kind_ == PotentialKind::quartic) {
    // U'(p+d) - U'(p) - U''(p) d = (3 p d^2 + d^3)/a^2
    return -(3 * psi * d * d + d * d * d) / (a_ * a_);
  }
  const Piece p0 = piece(psi), p1 = piece(psi + d);
  if (p0 == p1 && p0 != Piece::bridge) return 0.0;
  if (p0 == p1 && std::abs(d) < 1e-3) {
    double sum = 0, dj = d;
    for (int j = 2; j + 1 <= max_order; ++j) {
      dj *= d;
      sum += derivative(psi, j + 1) * dj / factorial(j);
    }
    return -sum;
  }
  return -(derivative(psi + d, 1) - derivative(psi, 1) - derivative(psi, 2) * d);
}

Potential make_quartic(double a) {
  if (!(a > 0)) throw DomainError("make_quartic: a must be positive");
  Potential p;
  p.kind_ = PotentialKind::quartic;
  p.a_ = a;
  p.m_ = std::sqrt(2.0);
  return p;
}

double flat_well_base_center(double a, double m, double delta) {
  (void)delta;
  // both collar parabolas meet symmetric weights at psi = 0
  return 0.5 * m * m * a * a;
}

Potential make_flat_well_unchecked(double a, double m, double delta, double barrier_height) {
  if (!(a > 0) || !(m > 0)) throw DomainError("make_flat_well: a and m must be positive");
  if (!(delta > 0) || !(delta < a)) throw DomainError("make_flat_well: need 0 < delta < a");
  if (!std::isfinite(barrier_height)) throw DomainError("make_flat_well: barrier_height not finite");
  Potential p;
  p.kind_ = PotentialKind::flat_well;
  p.a_ = a;
  p.m_ = m;
  p.delta_ = delta;
  p.barrier_ = barrier_height;

  const double m2 = m * m;
  const double far = 2 * a - delta;
  // collar parabolas continued over the bridge, as quadratics in t
  Bern left = bscale(bmul(Bern{delta, far}, Bern{delta, far}), 0.5 * m2);
  Bern right = bscale(bmul(Bern{-far, -delta}, Bern{-far, -delta}), 0.5 * m2);
  // w = regularized incomplete beta I_t(K,K)
  const int nw = 2 * K - 1;
  Bern w(nw + 1), one_minus_w(nw + 1);
  for (int i = 0; i <= nw; ++i) {
    w[i] = i >= K ? 1.0 : 0.0;
    one_minus_w[i] = 1.0 - w[i];
  }
  Bern base = badd(bmul(one_minus_w, left), bmul(w, right));
  const double c = barrier_height - beval(base, 0.5);
  Bern bump(2 * K + 1, 0.0);
  bump[K] = std::pow(4.0, K) / binom(2 * K, K);
  Bern bridge = badd(base, bscale(bump, c));

  p.bern_.clear();
  p.bern_.push_back(bridge);
  for (int k = 1; k <= Potential::max_order; ++k) p.bern_.push_back(bderiv(p.bern_.back()));
  return p;
}

Potential make_flat_well(double a, double m, double delta, double barrier_height) {
  if (!(a > 0) || !(m > 0)) throw DomainError("make_flat_well: a and m must be positive");
  if (!(delta > 0) || !(delta < a / 2)) throw DomainError("make_flat_well: need 0 < delta < a/2");
  const double joint = 0.5 * m * m * delta * delta;
  if (!(barrier_height > joint)) {
    std::ostringstream os;
    os << "make_flat_well: barrier_height " << barrier_height
       << " must exceed the collar value " << joint << " at the joints";
    throw DomainError(os.str());
  }
  Potential p = make_flat_well_unchecked(a, m, delta, barrier_height);
  const double lo = p.bridge_lo(), hi = p.bridge_hi();
  const int n = 20000;
  double umin = INFINITY, at = lo;
  for (int i = 0; i <= n; ++i) {
    const double psi = lo + (hi - lo) * i / n;
    const double u = p.value(psi);
    if (u < umin) {
      umin = u;
      at = psi;
    }
  }
  if (!(umin > 0)) {
    std::ostringstream os;
    os << "make_flat_well: bridge dips to " << umin << " at psi=" << at
       << " (a=" << a << ", m=" << m << ", delta=" << delta << ", barrier_height="
       << barrier_height << ")";
    throw ConstructionError(os.str());
  }
  return p;
}

double barrier_argmax(const Potential& p) {
  const double a = p.a();
  const int n = 20000;  // even, so psi = 0 is a sample for symmetric ranges
  std::vector<double> u(n + 1);
  double umax = -INFINITY;
  for (int i = 0; i <= n; ++i) {
    u[i] = p.value(-a + 2 * a * i / n);
    umax = std::max(umax, u[i]);
  }
  int best = 0;
  for (int i = 0; i <= n; ++i)
    if (u[i] >= umax * (1 - 1e-12)) {
      best = i;
      break;
    }
  double psi = -a + 2 * a * best / n;
  // polish on U' = 0; keep the sample if Newton misbehaves
  const double step = 2 * a / n;
  double x = psi;
  for (int it = 0; it < 50; ++it) {
    const double d2 = p.derivative(x, 2);
    if (!(d2 < 0)) break;
    const double dx = -p.derivative(x, 1) / d2;
    x += dx;
    if (std::abs(x - psi) > step) {
      x = psi;
      break;
    }
    if (std::abs(dx) < 1e-16) break;
  }
  return p.value(x) >= p.value(psi) ? x : psi;
}

bool ConditionReport::pass() const {
  return std::all_of(clauses.begin(), clauses.end(), [](const ClauseResult& c) { return c.pass; });
}

const ClauseResult& ConditionReport::clause(const std::string& name) const {
  for (const auto& c : clauses)
    if (c.name == name) return c;
  throw std::out_of_range("no clause " + name);
}

ConditionReport check_U1(const Potential& p, double tol) {
  ConditionReport rep;
  const double a = p.a(), m2 = p.m2();
  auto fmt = [](auto... xs) {
    std::ostringstream os;
    os.precision(6);
    (os << ... << xs);
    return os.str();
  };

  {
    const double v = std::max({std::abs(p.value(a)), std::abs(p.value(-a)),
                               std::abs(p.derivative(a, 1)), std::abs(p.derivative(-a, 1))});
    rep.clauses.push_back({"wells", v <= tol, v, fmt("max |U|,|U'| at +-a = ", v)});
  }
  {
    const double up = p.derivative(a, 2), um = p.derivative(-a, 2);
    const double v = std::max(std::abs(up - m2), std::abs(um - m2));
    const bool ok = m2 > 0 && v <= tol * std::max(1.0, m2);
    rep.clauses.push_back({"curvature", ok, v, fmt("U''(-a)=", um, " U''(a)=", up, " m^2=", m2)});
  }
  {
    const int n = 10000;
    double umin = INFINITY, at = 0;
    for (int i = 1; i <= n; ++i) {
      const double psi = -a + 2 * a * i / (n + 1);
      const double u = p.value(psi);
      if (u < umin) umin = u, at = psi;
    }
    rep.clauses.push_back({"interior_positive", umin > 0, umin,
                           fmt("min U on (-a,a) = ", umin, " at psi=", at)});
  }
  {
    const int n = 30000;
    double umin = INFINITY, at = 0;
    for (int i = 0; i <= n; ++i) {
      const double psi = -3 * a + 6 * a * i / n;
      const double u = p.value(psi);
      if (u < umin) umin = u, at = psi;
    }
    rep.clauses.push_back({"lower_bounded", umin >= -tol, umin,
                           fmt("min U on [-3a,3a] = ", umin, " at psi=", at)});
  }
  {
    const double rmax = p.kind() == PotentialKind::flat_well ? p.delta() / 2 : a / 4;
    const double rmin = 1e-3;
    const int n = 40;
    double worst_slope = INFINITY, max_rem = 0;
    for (double side : {-1.0, 1.0}) {
      std::vector<double> lx, ly;
      for (int i = 0; i < n; ++i) {
        const double r = rmin * std::pow(rmax / rmin, double(i) / (n - 1));
        const double psi = side * a - side * r;  // approach the well from inside
        const double d = psi - side * a;
        const double rem = std::abs(p.value(psi) - 0.5 * m2 * d * d);
        max_rem = std::max(max_rem, rem);
        if (rem > 0) {
          lx.push_back(std::log(r));
          ly.push_back(std::log(rem));
        }
      }
      if (lx.size() >= 3) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
        mx /= lx.size();
        my /= lx.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
          sxy += (lx[i] - mx) * (ly[i] - my);
          sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        worst_slope = std::min(worst_slope, sxy / sxx);
      }
    }
    ClauseResult c{"flatness", false, 0, ""};
    if (max_rem <= tol) {
      c.pass = true;
      c.value = 0;
      c.detail = fmt("remainder identically below tolerance (max ", max_rem, ")");
    } else {
      c.value = worst_slope;
      c.pass = worst_slope >= 13.5;
      c.detail = fmt("log-log slope of remainder = ", worst_slope, " (need >= 13.5)");
    }
    rep.clauses.push_back(c);
  }
  {
    // derivative jumps at the collar joints, relative to the bridge's own scale
    double worst = 0;
    std::string where = "no joints";
    if (p.kind() == PotentialKind::flat_well) {
      const double lo = p.bridge_lo(), hi = p.bridge_hi();
      for (int k = 0; k <= 14; ++k) {
        double scale = 1.0;
        for (int i = 0; i <= 200; ++i)
          scale = std::max(scale, std::abs(p.bridge_derivative((i + 0.5) / 201, k)));
        for (double j : {lo, hi}) {
          const double side = j == lo ? -1.0 : 1.0;
          const double d = j - side * a;
          const double collar = k == 0 ? 0.5 * m2 * d * d : k == 1 ? m2 * d : k == 2 ? m2 : 0.0;
          const double inside = p.bridge_derivative(j == lo ? 0.0 : 1.0, k);
          const double rel = std::abs(inside - collar) / scale;
          if (rel > worst) {
            worst = rel;
            where = fmt("order ", k, " at psi=", j);
          }
        }
      }
    }
    rep.clauses.push_back({"joint_smoothness", worst <= 1e-8, worst,
                           fmt("max relative derivative jump through order 14: ", worst, " (", where, ")")});
  }
  return rep;
}

}  // namespace kinklab
