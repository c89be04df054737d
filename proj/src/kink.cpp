#include "kinklab/kink.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kinklab/errors.hpp"

namespace kinklab {

double SolitonParams::gamma() const {
  if (!(std::abs(v) < 1)) throw DomainError("soliton velocity must satisfy |v| < 1");
  return 1.0 / std::sqrt(1.0 - v * v);
}

namespace {

// ds/dx along the kink, continued past +-a so that the wells attract
double slope_signed(const Potential& p, double s) {
  const double r = std::sqrt(2 * std::max(p.value(s), 0.0));
  if (s >= p.a()) return -r;
  if (s <= -p.a()) return -r;
  return r;
}

double rk4(const Potential& p, double s, double dx) {
  const double k1 = slope_signed(p, s);
  const double k2 = slope_signed(p, s + 0.5 * dx * k1);
  const double k3 = slope_signed(p, s + 0.5 * dx * k2);
  const double k4 = slope_signed(p, s + dx * k3);
  return s + dx / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace

KinkProfile build_profile(const Potential& p, double L, double h) {
  if (!(h > 0) || !(L > 0)) throw DomainError("build_profile: L and h must be positive");
  if (std::exp(-p.m() * L) >= 1e-12) {
    std::ostringstream os;
    os << "build_profile: L=" << L << " too short, need exp(-m L) < 1e-12";
    throw DomainError(os.str());
  }
  const double r = L / h;
  if (std::abs(r - std::round(r)) > 1e-9 * r) throw DomainError("build_profile: L/h must be an integer");
  const std::size_t half = std::size_t(std::round(r));
  const std::size_t n = 2 * half + 1;
  const double a = p.a(), m = p.m();

  {
    const int ns = 10000;
    for (int i = 1; i < ns; ++i) {
      const double psi = -a + 2 * a * i / ns;
      if (!(p.value(psi) > 0)) {
        std::ostringstream os;
        os << "build_profile: U <= 0 inside (-a,a) at psi=" << psi;
        throw ConstructionError(os.str());
      }
    }
  }

  KinkProfile k;
  k.pot_ = p;
  k.psi_star_ = barrier_argmax(p);
  k.h_ = h;
  k.x0_ = -double(half) * h;
  k.s_.assign(n, 0.0);
  k.sp_.assign(n, 0.0);
  k.s_[half] = k.psi_star_;

  const int sub = std::max(1, int(std::ceil(h / 1e-3)));
  const double dx = h / sub;
  const bool collars = p.kind() == PotentialKind::flat_well;

  // rightward
  {
    std::size_t anchor = n;  // first node inside the right collar
    for (std::size_t i = half; i + 1 < n; ++i) {
      if (collars && anchor == n && p.piece(k.s_[i]) == Piece::right_collar) anchor = i;
      if (anchor != n) {
        const double d0 = a - k.s_[anchor];
        k.s_[i + 1] = a - d0 * std::exp(-m * (double(i + 1 - anchor) * h));
        continue;
      }
      double s = k.s_[i];
      for (int j = 0; j < sub; ++j) s = rk4(p, s, dx);
      k.s_[i + 1] = s;
    }
  }
  // leftward
  {
    std::size_t anchor = n;
    for (std::size_t i = half; i > 0; --i) {
      if (collars && anchor == n && p.piece(k.s_[i]) == Piece::left_collar) anchor = i;
      if (anchor != n) {
        const double d0 = k.s_[anchor] + a;
        k.s_[i - 1] = -a + d0 * std::exp(-m * (double(anchor - (i - 1)) * h));
        continue;
      }
      double s = k.s_[i];
      for (int j = 0; j < sub; ++j) s = rk4(p, s, -dx);
      k.s_[i - 1] = s;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double s = k.s_[i];
    if (!(std::abs(s) <= a)) {
      std::ostringstream os;
      os << "build_profile: sample " << i << " left [-a,a]: s=" << s;
      throw ConstructionError(os.str());
    }
    k.sp_[i] = std::sqrt(2 * std::max(p.value(s), 0.0));
  }
  const double tol = std::exp(-m * L / 2);
  if (std::abs(k.s_.front() + a) > tol || std::abs(k.s_.back() - a) > tol) {
    std::ostringstream os;
    os << "build_profile: endpoints did not reach the vacua (s(-L)=" << k.s_.front()
       << ", s(L)=" << k.s_.back() << ")";
    throw ConstructionError(os.str());
  }
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(k.s_[i + 1] >= k.s_[i])) throw ConstructionError("build_profile: profile not monotone");
  return k;
}

KinkPoint KinkProfile::eval(double x) const {
  const double a = pot_.a();
  double s;
  const double lo = x0_, hi = L();
  if (x >= hi) {
    s = a - (a - s_.back()) * std::exp(-pot_.m() * (x - hi));
  } else if (x <= lo) {
    s = -a + (s_.front() + a) * std::exp(-pot_.m() * (lo - x));
  } else {
    const double u = (x - x0_) / h_;
    std::size_t i = std::size_t(u);
    if (i >= s_.size() - 1) i = s_.size() - 2;
    const double t = u - double(i);
    const double f0 = s_[i], f1 = s_[i + 1];
    const double d0 = sp_[i] * h_, d1 = sp_[i + 1] * h_;
    const double c0 = pot_.derivative(f0, 1) * h_ * h_, c1 = pot_.derivative(f1, 1) * h_ * h_;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    const double H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
    const double H1 = t - 6 * t3 + 8 * t4 - 3 * t5;
    const double H2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    const double H3 = 0.5 * t3 - t4 + 0.5 * t5;
    const double H4 = -4 * t3 + 7 * t4 - 3 * t5;
    const double H5 = 10 * t3 - 15 * t4 + 6 * t5;
    s = f0 * H0 + d0 * H1 + c0 * H2 + c1 * H3 + d1 * H4 + f1 * H5;
  }
  s = std::clamp(s, -a, a);
  KinkPoint k;
  k.s = s;
  k.s1 = std::sqrt(2 * std::max(pot_.value(s), 0.0));
  k.s2 = pot_.derivative(s, 1);
  k.s3 = pot_.derivative(s, 2) * k.s1;
  return k;
}

double KinkProfile::first_integral_residual() const {
  // sp_ satisfies the identity by construction, so differentiate the samples instead
  static const double c[4] = {4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
  double r = 0;
  for (std::size_t i = 4; i + 4 < s_.size(); ++i) {
    double d = 0;
    for (int k = 1; k <= 4; ++k) d += c[k - 1] * (s_[i + k] - s_[i - k]);
    d /= h_;
    r = std::max(r, std::abs(0.5 * d * d - pot_.value(s_[i])));
  }
  return r;
}

KinkProfile KinkProfile::truncated(double L) const {
  const std::size_t half = (s_.size() - 1) / 2;
  const std::size_t keep = std::min(half, std::size_t(std::floor(L / h_ + 1e-9)));
  KinkProfile k = *this;
  k.s_.assign(s_.begin() + (half - keep), s_.begin() + (half + keep + 1));
  k.sp_.assign(sp_.begin() + (half - keep), sp_.begin() + (half + keep + 1));
  k.x0_ = -double(keep) * h_;
  return k;
}

namespace {

// fit log|d| = c - lambda |x| over samples with |d| >= floor
bool fit_tail(const std::vector<double>& ax, const std::vector<double>& d, double& lambda,
              double& rms, int& used) {
  const double floor = 1e-9;
  std::vector<double> X, Yv;
  for (std::size_t i = 0; i < ax.size(); ++i)
    if (d[i] >= floor) {
      X.push_back(ax[i]);
      Yv.push_back(std::log(d[i]));
    }
  used = int(X.size());
  if (X.size() < 8) return false;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < X.size(); ++i) mx += X[i], my += Yv[i];
  mx /= X.size();
  my /= X.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Yv[i] - my);
  }
  const double slope = sxy / sxx;
  double ss = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double e = Yv[i] - (my + slope * (X[i] - mx));
    ss += e * e;
  }
  lambda = -slope;
  rms = std::sqrt(ss / X.size());
  return true;
}

}  // namespace

TailFit tail_rate(const KinkProfile& k) {
  const double a = k.a();
  const std::size_t n = k.size();
  const std::size_t half = (n - 1) / 2;
  TailFit out;
  for (int side : {-1, 1}) {
    // outer quarter first; slide inward if the tail has sunk below the floor
    std::size_t width = std::max<std::size_t>(half / 4, 8);
    std::size_t outer = half;
    double lambda = 0, rms = 0;
    int used = 0;
    bool ok = false;
    while (true) {
      std::vector<double> ax, d;
      for (std::size_t j = outer - std::min(width, outer); j <= outer; ++j) {
        const std::size_t i = side > 0 ? half + j : half - j;
        ax.push_back(double(j) * k.h());
        d.push_back(side > 0 ? a - k.s()[i] : k.s()[i] + a);
      }
      ok = fit_tail(ax, d, lambda, rms, used);
      if (ok && used >= int(width / 2)) break;
      if (outer <= width) break;
      outer -= width / 2;
    }
    if (!ok) throw ConstructionError("tail_rate: tail fit window degenerate");
    if (side < 0) {
      out.lambda_minus = lambda;
      out.samples_minus = used;
    } else {
      out.lambda_plus = lambda;
      out.samples_plus = used;
    }
    out.residual = std::max(out.residual, rms);
  }
  out.flagged = out.residual > out.threshold;
  return out;
}

FieldState soliton_state(const KinkProfile& k, const SolitonParams& sigma, const Grid& grid) {
  const double g = sigma.gamma();
  FieldState Y(grid);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const KinkPoint q = k.eval(g * (grid.x(i) - sigma.b));
    Y.psi[i] = q.s;
    Y.pi[i] = -sigma.v * g * q.s1;
  }
  return Y;
}

}  // namespace kinklab
