#include "kinklab/field.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <span>

#include <fftw3.h>

#include "fftw_lock.hpp"

#include "kinklab/errors.hpp"

namespace kinklab {

std::mutex& detail::fftw_planner_lock() {
  static std::mutex m;
  return m;
}

namespace {

// centered first-derivative weights c_1..c_r, f' ~ sum c_k (f_{i+k} - f_{i-k}) / h
std::span<const double> d1_weights(int order) {
  if (order == 0) return {};
  static const double w2[] = {0.5};
  static const double w4[] = {2.0 / 3, -1.0 / 12};
  static const double w6[] = {3.0 / 4, -3.0 / 20, 1.0 / 60};
  static const double w8[] = {4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
  switch (order) {
    case 2: return w2;
    case 4: return w4;
    case 6: return w6;
    case 8: return w8;
  }
  throw DomainError("stencil order must be 2, 4, 6 or 8");
}

// second derivative: c_0 f_i + sum c_k (f_{i+k} + f_{i-k})
std::span<const double> d2_weights(int order) {
  static const double w2[] = {-2.0, 1.0};
  static const double w4[] = {-5.0 / 2, 4.0 / 3, -1.0 / 12};
  static const double w6[] = {-49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90};
  static const double w8[] = {-205.0 / 72, 8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560};
  switch (order) {
    case 2: return w2;
    case 4: return w4;
    case 6: return w6;
    case 8: return w8;
  }
  throw DomainError("stencil order must be 2, 4, 6 or 8");
}

double ghost_left(const std::vector<double>& f, Ghost g) { return g == Ghost::zero ? 0.0 : f.front(); }
double ghost_right(const std::vector<double>& f, Ghost g) { return g == Ghost::zero ? 0.0 : f.back(); }

// Periodic Fourier differentiation over one period of n nodes. Plans are
// created under a lock (the FFTW planner is not thread safe) and cached per
// thread; FFTW_ESTIMATE keeps the arithmetic deterministic.

struct SpectralPlan {
  std::size_t n = 0;
  double* in = nullptr;
  fftw_complex* hat = nullptr;
  fftw_complex* work = nullptr;
  fftw_plan fwd = nullptr, bwd = nullptr;
  explicit SpectralPlan(std::size_t n_) : n(n_) {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_lock());
    in = fftw_alloc_real(n);
    hat = fftw_alloc_complex(n / 2 + 1);
    work = fftw_alloc_complex(n / 2 + 1);
    fwd = fftw_plan_dft_r2c_1d(int(n), in, hat, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_1d(int(n), work, in, FFTW_ESTIMATE);
  }
  ~SpectralPlan() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_lock());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(in);
    fftw_free(hat);
    fftw_free(work);
  }
  SpectralPlan(const SpectralPlan&) = delete;
  SpectralPlan& operator=(const SpectralPlan&) = delete;
};

SpectralPlan& spectral_plan(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<SpectralPlan>> cache;
  auto& p = cache[n];
  if (!p) p = std::make_unique<SpectralPlan>(n);
  return *p;
}

// smooth step joining the end values, removed before transforming so that the
// remainder is periodic; its derivatives are added back analytically
struct Background {
  double mid, half, x0, kappa;
  double value(double x) const { return mid + half * std::tanh(kappa * (x - x0)); }
  double d1(double x) const {
    const double c = 1 / std::cosh(kappa * (x - x0));
    return half * kappa * c * c;
  }
  double d2(double x) const {
    const double th = std::tanh(kappa * (x - x0)), c = 1 / std::cosh(kappa * (x - x0));
    return -2 * half * kappa * kappa * c * c * th;
  }
};

Background background(const std::vector<double>& f, const Grid& g, Ghost ghost) {
  Background b{0, 0, 0.5 * (g.x(0) + g.x(g.n - 1)), 1.0};
  if (ghost != Ghost::zero) {
    b.mid = 0.5 * (f.front() + f.back());
    b.half = 0.5 * (f.back() - f.front());
  }
  return b;
}

void spectral_diff(const std::vector<double>& f, const Grid& g, Ghost ghost, int order,
                   std::vector<double>& out) {
  const std::size_t n = f.size();
  SpectralPlan& P = spectral_plan(n);
  const Background bg = background(f, g, ghost);
  const bool has_bg = bg.half != 0 || bg.mid != 0;
  for (std::size_t i = 0; i < n; ++i) P.in[i] = has_bg ? f[i] - bg.value(g.x(i)) : f[i];
  fftw_execute(P.fwd);
  const double dk = 2 * M_PI / (double(n) * g.h);
  const std::size_t nk = n / 2 + 1;
  for (std::size_t j = 0; j < nk; ++j) {
    const double k = dk * double(j);
    const double re = P.hat[j][0], im = P.hat[j][1];
    if (order == 1) {
      // drop the unpaired Nyquist mode for the odd derivative
      const bool nyq = n % 2 == 0 && j == n / 2;
      P.work[j][0] = nyq ? 0.0 : -k * im;
      P.work[j][1] = nyq ? 0.0 : k * re;
    } else {
      P.work[j][0] = -k * k * re;
      P.work[j][1] = -k * k * im;
    }
  }
  fftw_execute(P.bwd);
  out.resize(n);
  const double inv = 1.0 / double(n);
  for (std::size_t i = 0; i < n; ++i) {
    double r = P.in[i] * inv;
    if (has_bg) r += order == 1 ? bg.d1(g.x(i)) : bg.d2(g.x(i));
    out[i] = r;
  }
}

}  // namespace

Grid Grid::centered(double L, double h, int order) {
  if (!(L > 0) || !(h > 0)) throw ConfigError("grid: L and h must be positive");
  const double r = 2 * L / h;
  const double rr = std::round(r);
  if (std::abs(r - rr) > 1e-9 * std::max(1.0, r)) throw ConfigError("grid: 2L/h must be an integer");
  if (order != 0) d1_weights(order);
  Grid g;
  g.h = h;
  g.n = std::size_t(rr) + 1;
  g.x0 = -0.5 * rr * h;
  g.order = order;
  return g;
}

Grid Grid::shifted(double b) const {
  Grid g = *this;
  g.x0 = x0 - b;
  return g;
}

bool Grid::same_nodes(const Grid& o, double tol) const {
  return n == o.n && std::abs(h - o.h) <= tol * h && std::abs(x0 - o.x0) <= tol * std::max(1.0, std::abs(x0));
}

bool FieldState::finite() const {
  for (std::size_t i = 0; i < psi.size(); ++i)
    if (!std::isfinite(psi[i]) || !std::isfinite(pi[i])) return false;
  return true;
}

bool PerturbationState::finite() const {
  for (std::size_t i = 0; i < Psi.size(); ++i)
    if (!std::isfinite(Psi[i]) || !std::isfinite(Pi[i])) return false;
  return true;
}

PerturbationState& PerturbationState::operator+=(const PerturbationState& o) {
  axpy(1.0, o);
  return *this;
}
PerturbationState& PerturbationState::operator-=(const PerturbationState& o) {
  axpy(-1.0, o);
  return *this;
}
PerturbationState& PerturbationState::operator*=(double s) {
  for (auto& x : Psi) x *= s;
  for (auto& x : Pi) x *= s;
  return *this;
}
void PerturbationState::axpy(double s, const PerturbationState& o) {
  if (o.Psi.size() != Psi.size()) throw DomainError("perturbation size mismatch");
  for (std::size_t i = 0; i < Psi.size(); ++i) {
    Psi[i] += s * o.Psi[i];
    Pi[i] += s * o.Pi[i];
  }
}
PerturbationState operator+(PerturbationState a, const PerturbationState& b) { return a += b; }
PerturbationState operator-(PerturbationState a, const PerturbationState& b) { return a -= b; }
PerturbationState operator*(double s, PerturbationState a) { return a *= s; }

void diff1(const std::vector<double>& f, const Grid& g, Ghost ghost, std::vector<double>& out) {
  const std::size_t n = f.size();
  out.assign(n, 0.0);
  if (n < 3) return;
  const double ih = 1.0 / g.h;
  if (g.order == 0) {
    spectral_diff(f, g, ghost == Ghost::zero ? Ghost::zero : Ghost::constant, 1, out);
    return;
  }
  if (ghost == Ghost::one_sided) {
    const auto w = d1_weights(g.order);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const std::size_t room = std::min(i, n - 1 - i);
      // highest order stencil that fits
      const int r = int(std::min<std::size_t>(room, w.size()));
      const auto wr = d1_weights(2 * r);
      double s = 0;
      for (int k = 1; k <= r; ++k) s += wr[k - 1] * (f[i + k] - f[i - k]);
      out[i] = s * ih;
    }
    out[0] = (-3 * f[0] + 4 * f[1] - f[2]) * 0.5 * ih;
    out[n - 1] = (3 * f[n - 1] - 4 * f[n - 2] + f[n - 3]) * 0.5 * ih;
    return;
  }
  const auto w = d1_weights(g.order);
  const std::size_t r = w.size();
  const double gl = ghost_left(f, ghost), gr = ghost_right(f, ghost);
  auto at = [&](std::ptrdiff_t j) -> double {
    if (j < 0) return gl;
    if (j >= std::ptrdiff_t(n)) return gr;
    return f[j];
  };
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    if (i >= r && i + r < n) {
      for (std::size_t k = 1; k <= r; ++k) s += w[k - 1] * (f[i + k] - f[i - k]);
    } else {
      for (std::size_t k = 1; k <= r; ++k)
        s += w[k - 1] * (at(std::ptrdiff_t(i + k)) - at(std::ptrdiff_t(i) - std::ptrdiff_t(k)));
    }
    out[i] = s * ih;
  }
}

void diff2(const std::vector<double>& f, const Grid& g, Ghost ghost, std::vector<double>& out) {
  const std::size_t n = f.size();
  out.assign(n, 0.0);
  if (n < 4) return;
  const double ih2 = 1.0 / (g.h * g.h);
  if (g.order == 0) {
    spectral_diff(f, g, ghost == Ghost::zero ? Ghost::zero : Ghost::constant, 2, out);
    return;
  }
  if (ghost == Ghost::one_sided) {
    const auto w = d2_weights(g.order);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const std::size_t room = std::min(i, n - 1 - i);
      const int r = int(std::min<std::size_t>(room, w.size() - 1));
      const auto wr = d2_weights(2 * r);
      double s = wr[0] * f[i];
      for (int k = 1; k <= r; ++k) s += wr[k] * (f[i + k] + f[i - k]);
      out[i] = s * ih2;
    }
    out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) * ih2;
    out[n - 1] = (2 * f[n - 1] - 5 * f[n - 2] + 4 * f[n - 3] - f[n - 4]) * ih2;
    return;
  }
  const auto w = d2_weights(g.order);
  const std::size_t r = w.size() - 1;
  const double gl = ghost_left(f, ghost), gr = ghost_right(f, ghost);
  auto at = [&](std::ptrdiff_t j) -> double {
    if (j < 0) return gl;
    if (j >= std::ptrdiff_t(n)) return gr;
    return f[j];
  };
  for (std::size_t i = 0; i < n; ++i) {
    double s = w[0] * f[i];
    if (i >= r && i + r < n) {
      for (std::size_t k = 1; k <= r; ++k) s += w[k] * (f[i + k] + f[i - k]);
    } else {
      for (std::size_t k = 1; k <= r; ++k)
        s += w[k] * (at(std::ptrdiff_t(i + k)) + at(std::ptrdiff_t(i) - std::ptrdiff_t(k)));
    }
    out[i] = s * ih2;
  }
}

std::vector<double> diff1(const std::vector<double>& f, const Grid& g, Ghost ghost) {
  std::vector<double> out;
  diff1(f, g, ghost, out);
  return out;
}
std::vector<double> diff2(const std::vector<double>& f, const Grid& g, Ghost ghost) {
  std::vector<double> out;
  diff2(f, g, ghost, out);
  return out;
}

double laplacian_spectral_radius(const Grid& g) {
  if (g.order == 0) return (M_PI / g.h) * (M_PI / g.h);
  // symbol of the stencil at k h = pi: -c0 - 2 sum c_k (-1)^k
  const auto w = d2_weights(g.order);
  double s = -w[0];
  for (std::size_t k = 1; k < w.size(); ++k) s -= 2 * w[k] * (k % 2 ? -1.0 : 1.0);
  return s / (g.h * g.h);
}

double trapezoid(const std::vector<double>& f, double h) {
  if (f.empty()) return 0.0;
  return trapezoid(f, h, 0, f.size() - 1);
}

double trapezoid(const std::vector<double>& f, double h, std::size_t i0, std::size_t i1) {
  if (i1 <= i0) return 0.0;
  double s = 0.5 * (f[i0] + f[i1]);
  for (std::size_t i = i0 + 1; i < i1; ++i) s += f[i];
  return s * h;
}

std::vector<double> energy_density(const FieldState& Y, const Potential& p) {
  const auto dpsi = diff1(Y.psi, Y.grid, Ghost::one_sided);
  std::vector<double> e(Y.psi.size());
  for (std::size_t i = 0; i < e.size(); ++i)
    e[i] = 0.5 * Y.pi[i] * Y.pi[i] + 0.5 * dpsi[i] * dpsi[i] + p.value(Y.psi[i]);
  return e;
}

double energy(const FieldState& Y, const Potential& p) {
  return trapezoid(energy_density(Y, p), Y.grid.h);
}

namespace {

double weighted_l2(const std::vector<double>& f, const Grid& g, const std::vector<double>& w2) {
  std::vector<double> q(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) q[i] = w2[i] * f[i] * f[i];
  return std::sqrt(trapezoid(q, g.h));
}

std::vector<double> weight_squared(const Grid& g, double alpha) {
  std::vector<double> w2(g.n);
  for (std::size_t i = 0; i < g.n; ++i) w2[i] = std::pow(1.0 + std::abs(g.x(i)), 2 * alpha);
  return w2;
}

}  // namespace

double norm_E_alpha(const PerturbationState& X, double alpha) {
  const auto w2 = weight_squared(X.grid, alpha);
  const auto d = diff1(X.Psi, X.grid, Ghost::one_sided);
  return weighted_l2(X.Psi, X.grid, w2) + weighted_l2(d, X.grid, w2) + weighted_l2(X.Pi, X.grid, w2);
}

double norm_E(const PerturbationState& X) {
  const auto d = diff1(X.Psi, X.grid, Ghost::one_sided);
  auto l2 = [&](const std::vector<double>& f) {
    double s = 0.5 * (f.front() * f.front() + f.back() * f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i] * f[i];
    return std::sqrt(s * X.grid.h);
  };
  return l2(X.Psi) + l2(d) + l2(X.Pi);
}

double norm_W(const PerturbationState& X) {
  const auto& g = X.grid;
  auto l1 = [&](const std::vector<double>& f) {
    std::vector<double> a(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) a[i] = std::abs(f[i]);
    return trapezoid(a, g.h);
  };
  return l1(X.Psi) + l1(diff1(X.Psi, g, Ghost::one_sided)) + l1(diff2(X.Psi, g, Ghost::one_sided)) +
         l1(X.Pi) + l1(diff1(X.Pi, g, Ghost::one_sided));
}

double norm_Linf(const std::vector<double>& f) {
  double m = 0;
  for (double x : f) m = std::max(m, std::abs(x));
  return m;
}

double norm_L2_alpha(const std::vector<double>& f, const Grid& g, double alpha) {
  return weighted_l2(f, g, weight_squared(g, alpha));
}

}  // namespace kinklab
