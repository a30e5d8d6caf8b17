#pragma once

// Band-limited mean-zero periodic field pairs (tau, u) on [-pi, pi) and the
// FFTW transforms between coefficients and grid values.
//
// Convention: tau(x) = sum_k tau_hat(k) e^{i k x}, so tau_hat(k) is the
// one-sided coefficient and a pure mode A e^{ikx} + c.c. has |tau_hat(k)| = |A|.
// Grid points are x_j = -pi + 2 pi j / N.

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavebif {

using cplx = std::complex<double>;

/// Real fields stored through their nonnegative modes k = 0..n/2; negative
/// modes are the complex conjugates. The k = 0 and Nyquist (k = n/2)
/// coefficients are held at zero.
class FieldState {
 public:
  FieldState() : FieldState(16) {}
  explicit FieldState(int n) : n_(n), tau_(n / 2 + 1), u_(n / 2 + 1) {
    if (n < 16 || !std::has_single_bit(static_cast<unsigned>(n)))
      throw std::invalid_argument("FieldState: grid size must be a power of two >= 16, got " + std::to_string(n));
  }

  int n() const { return n_; }
  int kmax() const { return n_ / 2; }

  /// Coefficient for -n/2 < k <= n/2.
  cplx tau(int k) const { return coefficient(tau_, k); }
  cplx u(int k) const { return coefficient(u_, k); }

  /// Sets mode k (and implicitly -k). Only 0 < |k| < n/2 may carry data.
  void set_tau(int k, cplx v) { assign(tau_, k, v); }
  void set_u(int k, cplx v) { assign(u_, k, v); }

  std::span<cplx> tau_half() { return tau_; }
  std::span<cplx> u_half() { return u_; }
  std::span<const cplx> tau_half() const { return tau_; }
  std::span<const cplx> u_half() const { return u_; }

  double time = 0.0;

 private:
  cplx coefficient(const std::vector<cplx>& v, int k) const {
    if (k <= -n_ / 2 || k > n_ / 2) throw std::out_of_range("FieldState: mode out of range");
    return k >= 0 ? v[k] : std::conj(v[-k]);
  }
  void assign(std::vector<cplx>& v, int k, cplx value) {
    const int ak = std::abs(k);
    if (ak == 0 || ak >= n_ / 2) {
      if (value != cplx{}) throw std::invalid_argument("FieldState: mean and Nyquist modes must stay zero");
      return;
    }
    v[ak] = k > 0 ? value : std::conj(value);
  }

  int n_;
  std::vector<cplx> tau_;
  std::vector<cplx> u_;
};

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Real <-> half-complex transform of size N with the coefficient
/// normalization above. Plans are created under a global lock; execution
/// on distinct instances is thread safe.
class RealFft {
 public:
  explicit RealFft(int N) : N_(N) {
    real_ = fftw_alloc_real(N);
    spec_ = fftw_alloc_complex(N / 2 + 1);
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(N, real_, spec_, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(N, spec_, real_, FFTW_ESTIMATE);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(real_);
    fftw_free(spec_);
  }

  int size() const { return N_; }

  /// Grid values from coefficients k = 0..K (K <= N/2); higher modes zero.
  void to_grid(std::span<const cplx> coeffs, std::span<double> out) {
    const int K = static_cast<int>(coeffs.size()) - 1;
    for (int k = 0; k <= N_ / 2; ++k) {
      // x_0 = -pi contributes the factor e^{-i k pi} = (-1)^k.
      const cplx c = k <= K ? coeffs[k] : cplx{};
      const cplx v = (k % 2 == 0) ? c : -c;
      spec_[k][0] = v.real();
      spec_[k][1] = v.imag();
    }
    fftw_execute(backward_);
    std::copy(real_, real_ + N_, out.begin());
  }

  /// Coefficients k = 0..out.size()-1 from grid values.
  void to_coefficients(std::span<const double> in, std::span<cplx> out) {
    std::copy(in.begin(), in.end(), real_);
    fftw_execute(forward_);
    const double scale = 1.0 / N_;
    const int K = std::min<int>(static_cast<int>(out.size()) - 1, N_ / 2);
    for (int k = 0; k <= K; ++k) {
      const cplx c(spec_[k][0] * scale, spec_[k][1] * scale);
      out[k] = (k % 2 == 0) ? c : -c;
    }
    for (std::size_t k = K + 1; k < out.size(); ++k) out[k] = {};
  }

 private:
  int N_;
  double* real_;
  fftw_complex* spec_;
  fftw_plan forward_;
  fftw_plan backward_;
};

inline double grid_point(int j, int N) { return -std::numbers::pi + 2.0 * std::numbers::pi * j / N; }

struct PhysicalField {
  std::vector<double> x;
  std::vector<double> tau;
  std::vector<double> u;
};

/// Samples the field on N >= n grid points.
inline PhysicalField to_physical(const FieldState& s, int N = 0) {
  if (N == 0) N = s.n();
  if (N < s.n()) throw std::invalid_argument("to_physical: sampling grid coarser than the field");
  PhysicalField p;
  p.x.resize(N);
  p.tau.resize(N);
  p.u.resize(N);
  for (int j = 0; j < N; ++j) p.x[j] = grid_point(j, N);
  RealFft fft(N);
  fft.to_grid(s.tau_half(), p.tau);
  fft.to_grid(s.u_half(), p.u);
  return p;
}

/// Projects grid values onto the mean-zero band-limited space of size n:
/// the mean and the Nyquist mode are dropped.
inline FieldState from_physical(std::span<const double> tau, std::span<const double> u, int n) {
  if (tau.size() != u.size()) throw std::invalid_argument("from_physical: size mismatch");
  const int N = static_cast<int>(tau.size());
  if (N < n) throw std::invalid_argument("from_physical: grid coarser than target");
  FieldState s(n);
  RealFft fft(N);
  std::vector<cplx> c(n / 2 + 1);
  fft.to_coefficients(tau, c);
  for (int k = 1; k < n / 2; ++k) s.set_tau(k, c[k]);
  fft.to_coefficients(u, c);
  for (int k = 1; k < n / 2; ++k) s.set_u(k, c[k]);
  return s;
}

/// R_phi: (tau, u)(x) -> (tau, u)(x + phi).
inline FieldState shifted(const FieldState& s, double phi) {
  FieldState out(s.n());
  out.time = s.time;
  for (int k = 1; k < s.kmax(); ++k) {
    const cplx w = std::polar(1.0, k * phi);
    out.set_tau(k, s.tau(k) * w);
    out.set_u(k, s.u(k) * w);
  }
  return out;
}

/// S: (tau, u)(x) -> (tau(-x), -u(-x)).
inline FieldState reflected(const FieldState& s) {
  FieldState out(s.n());
  out.time = s.time;
  for (int k = 1; k < s.kmax(); ++k) {
    out.set_tau(k, std::conj(s.tau(k)));
    out.set_u(k, -std::conj(s.u(k)));
  }
  return out;
}

/// Largest coefficient difference over both fields.
inline double max_difference(const FieldState& x, const FieldState& y) {
  if (x.n() != y.n()) throw std::invalid_argument("max_difference: grid mismatch");
  double d = 0.0;
  for (int k = 0; k <= x.kmax(); ++k) {
    d = std::max(d, std::abs(x.tau(k) - y.tau(k)));
    d = std::max(d, std::abs(x.u(k) - y.u(k)));
  }
  return d;
}

}  // namespace wavebif
