#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>

#include "fftw_lock.hpp"
#include "kinklab/errors.hpp"
#include "kinklab/evolve.hpp"

namespace kinklab {

struct FreeKG::Plans {
  std::size_t n = 0;
  double* re = nullptr;
  fftw_complex* psi = nullptr;
  fftw_complex* pi = nullptr;
  fftw_plan fwd_psi = nullptr, fwd_pi = nullptr, bwd_psi = nullptr, bwd_pi = nullptr;
  std::mutex use;  // buffers are shared by apply()
};

FreeKG::FreeKG(const Grid& g, double m) : grid_(g), m_(m), nfft_(1), plans_(nullptr) {
  if (!(m > 0)) throw DomainError("free_kg: m must be positive");
  while (nfft_ < 2 * g.n) nfft_ *= 2;
  plans_ = new Plans;
  Plans& P = *plans_;
  P.n = nfft_;
  std::lock_guard<std::mutex> lock(detail::fftw_planner_lock());
  P.re = fftw_alloc_real(nfft_);
  P.psi = fftw_alloc_complex(nfft_ / 2 + 1);
  P.pi = fftw_alloc_complex(nfft_ / 2 + 1);
  P.fwd_psi = fftw_plan_dft_r2c_1d(int(nfft_), P.re, P.psi, FFTW_ESTIMATE);
  P.fwd_pi = fftw_plan_dft_r2c_1d(int(nfft_), P.re, P.pi, FFTW_ESTIMATE);
  P.bwd_psi = fftw_plan_dft_c2r_1d(int(nfft_), P.psi, P.re, FFTW_ESTIMATE);
  P.bwd_pi = fftw_plan_dft_c2r_1d(int(nfft_), P.pi, P.re, FFTW_ESTIMATE);
}

FreeKG::~FreeKG() {
  if (!plans_) return;
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_lock());
    fftw_destroy_plan(plans_->fwd_psi);
    fftw_destroy_plan(plans_->fwd_pi);
    fftw_destroy_plan(plans_->bwd_psi);
    fftw_destroy_plan(plans_->bwd_pi);
    fftw_free(plans_->re);
    fftw_free(plans_->psi);
    fftw_free(plans_->pi);
  }
  delete plans_;
}

PerturbationState FreeKG::apply(const PerturbationState& X, double t, double v) const {
  if (!(std::abs(v) < 1)) throw DomainError("free_kg: |v| must be < 1");
  if (X.grid.n != grid_.n || std::abs(X.grid.h - grid_.h) > 1e-12 * grid_.h)
    throw DomainError("free_kg: state grid does not match the transform grid");
  PerturbationState out(X.grid);
  if (t == 0) {
    out.Psi = X.Psi;
    out.Pi = X.Pi;
    return out;
  }
  Plans& P = *plans_;
  std::lock_guard<std::mutex> lock(P.use);
  const std::size_t n = P.n, N = grid_.n, nh = n / 2 + 1;
  auto load = [&](const std::vector<double>& f, fftw_plan plan) {
    for (std::size_t i = 0; i < N; ++i) P.re[i] = f[i];
    for (std::size_t i = N; i < n; ++i) P.re[i] = 0.0;
    fftw_execute(plan);
  };
  load(X.Psi, P.fwd_psi);
  load(X.Pi, P.fwd_pi);
  const double dk = 2 * M_PI / (double(n) * grid_.h);
  const double m2 = m_ * m_;
  for (std::size_t j = 0; j < nh; ++j) {
    const double k = dk * double(j);
    const double w = std::sqrt(k * k + m2);
    const double c = std::cos(w * t), s = std::sin(w * t);
    const std::complex<double> a(P.psi[j][0], P.psi[j][1]), b(P.pi[j][0], P.pi[j][1]);
    std::complex<double> na = c * a + (s / w) * b;
    std::complex<double> nb = -w * s * a + c * b;
    // frame moving with v: evaluate at y + v t (the Nyquist mode stays put so the map is exactly invertible)
    if (v != 0 && !(n % 2 == 0 && j == n / 2)) {
      const std::complex<double> ph = std::polar(1.0, k * v * t);
      na *= ph;
      nb *= ph;
    }
    P.psi[j][0] = na.real();
    P.psi[j][1] = na.imag();
    P.pi[j][0] = nb.real();
    P.pi[j][1] = nb.imag();
  }
  const double inv = 1.0 / double(n);
  fftw_execute(P.bwd_psi);
  for (std::size_t i = 0; i < N; ++i) out.Psi[i] = P.re[i] * inv;
  fftw_execute(P.bwd_pi);
  for (std::size_t i = 0; i < N; ++i) out.Pi[i] = P.re[i] * inv;
  return out;
}

PerturbationState free_kg(const PerturbationState& X, double t, double v, double m) {
  const FreeKG W(X.grid, m);
  return W.apply(X, t, v);
}

}  // namespace kinklab
