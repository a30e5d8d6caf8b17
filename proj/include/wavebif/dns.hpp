#pragma once

// Fourier pseudospectral simulation of
//   tau_t = u_x - a tau_xxxx
//   u_t   = sigma1 tau_x - delta u_xx - u_xxxx + d/dx( sigma2/2 tau^2 + sigma3/6 tau^3 + tail(tau) )
// on [-pi, pi). The linear part is block diagonal with 2x2 blocks M_k and is
// integrated exactly; the nonlinearity only feeds the u equation and only
// depends on tau.

#include <Eigen/Dense>

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavebif/field.hpp"
#include "wavebif/model.hpp"
#include "wavebif/spectral.hpp"
#include "wavebif/tolerances.hpp"

namespace wavebif {

using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

enum class Dealias { TwoThirds, ZeroPadDouble };
enum class Scheme { Etdrk4, StrangSplit };

inline const char* to_string(Dealias d) { return d == Dealias::TwoThirds ? "twoThirds" : "zeroPadDouble"; }
inline const char* to_string(Scheme s) { return s == Scheme::Etdrk4 ? "etdrk4" : "strangSplit"; }

inline Dealias parse_dealias(const std::string& s) {
  if (s == "twoThirds") return Dealias::TwoThirds;
  if (s == "zeroPadDouble") return Dealias::ZeroPadDouble;
  throw std::invalid_argument("unknown dealias mode '" + s + "'");
}
inline Scheme parse_scheme(const std::string& s) {
  if (s == "etdrk4") return Scheme::Etdrk4;
  if (s == "strangSplit") return Scheme::StrangSplit;
  throw std::invalid_argument("unknown scheme '" + s + "'");
}

struct StepperConfig {
  double dt = 0.25;
  Dealias dealias = Dealias::ZeroPadDouble;
  Scheme scheme = Scheme::Etdrk4;
};

struct NumericalBlowup : std::runtime_error {
  double time;
  explicit NumericalBlowup(double t)
      : std::runtime_error("simulation blew up at t = " + std::to_string(t)), time(t) {}
};

namespace detail {

inline double factorial(int j) {
  double f = 1.0;
  for (int i = 2; i <= j; ++i) f *= i;
  return f;
}

/// phi_0 = exp, phi_j(z) = (phi_{j-1}(z) - 1/(j-1)!) / z.
inline cplx phi(int j, cplx z) {
  if (j == 0) return std::exp(z);
  if (std::abs(z) < 1.0) {
    cplx sum{};
    cplx term = 1.0 / factorial(j);
    for (int n = 0; n < 40; ++n) {
      sum += term;
      term *= z / static_cast<double>(n + j + 1);
    }
    return sum;
  }
  cplx p = std::exp(z);
  for (int i = 1; i <= j; ++i) p = (p - 1.0 / factorial(i - 1)) / z;
  return p;
}

/// Half the eigenvalue splitting of a 2x2 matrix, sqrt(((z00-z11)/2)^2 + z01 z10).
inline cplx half_gap(const Mat2& Z) {
  const cplx h = 0.5 * (Z(0, 0) - Z(1, 1));
  return std::sqrt(h * h + Z(0, 1) * Z(1, 0));
}

/// f(Z) for an entire scalar f, as alpha I + beta (Z - m I) where m is the
/// eigenvalue mean, alpha the mean of f over the eigenvalues and beta the
/// divided difference. Close eigenvalues use a Cauchy integral on the unit
/// circle around m, which also covers Jordan blocks.
template <class F>
Mat2 matrix_function(const Mat2& Z, F&& f) {
  const cplx m = 0.5 * Z.trace();
  const cplx d = half_gap(Z);
  const cplx lp = m + d;
  const cplx lm = m - d;
  const cplx fp = f(lp);
  const cplx fm = f(lm);
  const cplx alpha = 0.5 * (fp + fm);
  cplx beta;
  if (std::abs(2.0 * d) >= 1.0) {
    beta = (fp - fm) / (2.0 * d);
  } else {
    constexpr int N = 64;
    beta = 0.0;
    for (int j = 0; j < N; ++j) {
      const cplx w = std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.5) / N);
      const cplx t = m + w;
      beta += f(t) * w / ((t - lp) * (t - lm));
    }
    beta /= static_cast<double>(N);
  }
  return alpha * Mat2::Identity() + beta * (Z - m * Mat2::Identity());
}

}  // namespace detail

/// exp(Z) in closed form for a 2x2 matrix. When the eigenvalues collide
/// (|l+ - l-| < collisionTol max(1, |l+|)) the Jordan limit
/// e^m (I + (Z - m I)) is used.
inline Mat2 matrix_exponential_2x2(const Mat2& Z, double collisionTol = Tolerances{}.collision) {
  const cplx m = 0.5 * Z.trace();
  const cplx d = detail::half_gap(Z);
  const cplx lp = m + d;
  const cplx lm = m - d;
  cplx alpha;
  cplx beta;
  if (std::abs(2.0 * d) < collisionTol * std::max(1.0, std::abs(lp))) {
    alpha = beta = std::exp(m);
  } else if (std::abs(d) < 1.0) {
    const cplx em = std::exp(m);
    alpha = em * std::cosh(d);
    beta = em * std::sinh(d) / d;
  } else {
    const cplx ep = std::exp(lp);
    const cplx emn = std::exp(lm);
    alpha = 0.5 * (ep + emn);
    beta = (ep - emn) / (2.0 * d);
  }
  return alpha * Mat2::Identity() + beta * (Z - m * Mat2::Identity());
}

/// exp(dt M_k), the exact linear flow of one Fourier mode.
inline Mat2 linear_propagator(int k, double a, double delta, const FluxModel& f, double dt,
                              double collisionTol = Tolerances{}.collision) {
  return matrix_exponential_2x2(dt * mode_matrix(k, a, delta, f).entries, collisionTol);
}

inline Mat2 phi_matrix(int j, const Mat2& Z) {
  if (j == 0) return matrix_exponential_2x2(Z);
  return detail::matrix_function(Z, [j](cplx z) { return detail::phi(j, z); });
}

struct Observation {
  double t = 0.0;
  double absTauK0 = 0.0;
  double argTauK0 = 0.0;
  double absTauK2 = 0.0;
  double meanTau = 0.0;
  double meanU = 0.0;
};

struct ObserverConfig {
  int k0 = 1;
  int stride = 1;
};

inline Observation observe(const FieldState& s, int k0) {
  Observation o;
  o.t = s.time;
  const cplx c1 = k0 < s.kmax() ? s.tau(k0) : cplx{};
  const cplx c2 = 2 * k0 < s.kmax() ? s.tau(2 * k0) : cplx{};
  o.absTauK0 = std::abs(c1);
  o.argTauK0 = std::arg(c1);
  o.absTauK2 = std::abs(c2);
  o.meanTau = s.tau(0).real();
  o.meanU = s.u(0).real();
  return o;
}

struct EvolveResult {
  FieldState state;
  std::vector<Observation> records;
  bool stopped = false;            // the stop predicate fired before tEnd
  bool resolutionWarning = false;  // energy above n/3 exceeded the threshold
};

/// Extra u-slot forcing added to the nonlinear term, in coefficient space
/// (k = 0..n/2). Used to inject deliberately non-equivariant terms.
using ExtraTerm = std::function<void(std::span<const cplx> tauHat, std::span<cplx> uIncrement)>;

/// One trajectory's worth of transforms and per-mode coefficient tables.
class Simulator {
 public:
  Simulator(NormalizedParameters params, FluxModel flux, StepperConfig cfg, int n, Tolerances tol = {})
      : params_(params),
        flux_(std::move(flux)),
        cfg_(cfg),
        tol_(tol),
        n_(n),
        kmax_(n / 2),
        fft_(cfg.dealias == Dealias::ZeroPadDouble ? 2 * n : n),
        grid_(fft_.size()),
        work_(fft_.size() / 2 + 1) {
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("Simulator: dt must be positive");
    FieldState probe(n);  // validates n
    (void)probe;
  }

  int n() const { return n_; }
  const StepperConfig& config() const { return cfg_; }
  const FluxModel& flux() const { return flux_; }
  NormalizedParameters params() const { return params_; }

  void set_extra_term(ExtraTerm term) { extra_ = std::move(term); }

  /// u-slot increment d/dx(sigma2/2 tau^2 + sigma3/6 tau^3 + tail(tau)),
  /// dealiased per the stepper config. The tau slot is zero.
  FieldState nonlinear_term(const FieldState& s) {
    check_grid(s);
    std::vector<cplx> out(kmax_ + 1);
    nonlinear_u(s.tau_half(), out);
    FieldState inc(n_);
    for (int k = 1; k < kmax_; ++k) inc.set_u(k, out[k]);
    return inc;
  }

  /// Advances by one step of size cfg.dt.
  FieldState step(const FieldState& s) {
    FieldState out = s;
    advance(out, cfg_.dt);
    return out;
  }

  /// Advances in place by h (any h > 0; tables are cached per h).
  void advance(FieldState& s, double h) {
    check_grid(s);
    const Tables& T = tables(h);
    auto tau = s.tau_half();
    auto u = s.u_half();
    if (flux_.is_linear() && !extra_) {
      apply(T.E, tau, u);
    } else if (cfg_.scheme == Scheme::StrangSplit) {
      apply(T.E2, tau, u);
      // tau is frozen under the nonlinear subflow, so u advances exactly.
      nonlinear_u(tau, nu_);
      for (int k = 1; k < kmax_; ++k) u[k] += h * nu_[k];
      apply(T.E2, tau, u);
    } else {
      etdrk4(T, tau, u);
    }
    s.time += h;
    tau[0] = u[0] = 0.0;
    tau[kmax_] = u[kmax_] = 0.0;
    for (int k = 1; k < kmax_; ++k) {
      if (!std::isfinite(tau[k].real()) || !std::isfinite(tau[k].imag()) || !std::isfinite(u[k].real()) ||
          !std::isfinite(u[k].imag()) || std::abs(tau[k]) > blowupThreshold || std::abs(u[k]) > blowupThreshold)
        throw NumericalBlowup(s.time);
    }
  }

  /// Steps until tEnd (the last step is shortened to land on it). The stop
  /// predicate is consulted after every step; records are kept every
  /// `stride` steps plus the initial and final states.
  EvolveResult evolve(FieldState s, double tEnd, ObserverConfig obs = {},
                      const std::function<bool(const Observation&)>& stop = {}) {
    if (tEnd < s.time) throw std::invalid_argument("evolve: tEnd precedes the current time");
    EvolveResult res;
    const int stride = std::max(1, obs.stride);
    res.records.push_back(observe(s, obs.k0));
    const double t0 = s.time;
    const double span = tEnd - t0;
    long steps = static_cast<long>(std::ceil(span / cfg_.dt - 1e-9));
    if (span <= 0.0) steps = 0;
    for (long i = 1; i <= steps; ++i) {
      double h = cfg_.dt;
      if (i == steps) {
        h = span - static_cast<double>(steps - 1) * cfg_.dt;
        if (std::abs(h - cfg_.dt) <= 1e-12 * cfg_.dt) h = cfg_.dt;
      }
      advance(s, h);
      s.time = (i == steps) ? tEnd : t0 + static_cast<double>(i) * cfg_.dt;
      const Observation o = observe(s, obs.k0);
      const bool halt = stop && stop(o);
      if (i % stride == 0 || i == steps || halt) res.records.push_back(o);
      if (halt) {
        res.stopped = true;
        break;
      }
    }
    res.resolutionWarning = high_mode_fraction(s) > tol_.resolutionWarning;
    res.state = std::move(s);
    return res;
  }

  /// Fraction of the energy carried by modes above n/3.
  double high_mode_fraction(const FieldState& s) const {
    double total = 0.0;
    double high = 0.0;
    for (int k = 1; k < kmax_; ++k) {
      const double e = std::norm(s.tau(k)) + std::norm(s.u(k));
      total += e;
      if (3 * k > n_) high += e;
    }
    return total > 0.0 ? high / total : 0.0;
  }

  static constexpr double blowupThreshold = 1e12;

 private:
  struct Tables {
    std::vector<Mat2> E, E2;
    std::vector<Vec2> Q, F1, F2, F3;  // second columns; the forcing lives in the u slot
  };

  void check_grid(const FieldState& s) const {
    if (s.n() != n_) throw std::invalid_argument("Simulator: field grid does not match the simulator");
  }

  const Tables& tables(double h) {
    auto it = tables_.find(h);
    if (it != tables_.end()) return it->second;
    Tables T;
    T.E.assign(kmax_ + 1, Mat2::Zero());
    T.E2 = T.E;
    T.Q.assign(kmax_ + 1, Vec2::Zero());
    T.F1 = T.F2 = T.F3 = T.Q;
    for (int k = 1; k < kmax_; ++k) {
      const Mat2 M = mode_matrix(k, params_.a(), params_.delta(), flux_).entries;
      const Mat2 Z = h * M;
      T.E[k] = matrix_exponential_2x2(Z, tol_.collision);
      T.E2[k] = matrix_exponential_2x2(0.5 * Z, tol_.collision);
      if (cfg_.scheme == Scheme::Etdrk4) {
        T.Q[k] = (0.5 * h * phi_matrix(1, 0.5 * Z)).col(1);
        const Mat2 p1 = phi_matrix(1, Z);
        const Mat2 p2 = phi_matrix(2, Z);
        const Mat2 p3 = phi_matrix(3, Z);
        T.F1[k] = (h * (p1 - 3.0 * p2 + 4.0 * p3)).col(1);
        T.F2[k] = (h * (p2 - 2.0 * p3)).col(1);
        T.F3[k] = (h * (-p2 + 4.0 * p3)).col(1);
      }
    }
    return tables_.emplace(h, std::move(T)).first->second;
  }

  void apply(const std::vector<Mat2>& P, std::span<cplx> tau, std::span<cplx> u) const {
    for (int k = 1; k < kmax_; ++k) {
      const cplx t = tau[k];
      const cplx v = u[k];
      tau[k] = P[k](0, 0) * t + P[k](0, 1) * v;
      u[k] = P[k](1, 0) * t + P[k](1, 1) * v;
    }
  }

  void etdrk4(const Tables& T, std::span<cplx> tau, std::span<cplx> u) {
    const int K = kmax_ + 1;
    std::vector<cplx> aT(K), aU(K), bT(K), bU(K), cT(K), cU(K);
    std::vector<cplx> Nu(K), Na(K), Nb(K), Nc(K);
    nonlinear_u(tau, Nu);
    for (int k = 1; k < kmax_; ++k) {
      aT[k] = T.E2[k](0, 0) * tau[k] + T.E2[k](0, 1) * u[k] + T.Q[k](0) * Nu[k];
      aU[k] = T.E2[k](1, 0) * tau[k] + T.E2[k](1, 1) * u[k] + T.Q[k](1) * Nu[k];
    }
    nonlinear_u(aT, Na);
    for (int k = 1; k < kmax_; ++k) {
      bT[k] = T.E2[k](0, 0) * tau[k] + T.E2[k](0, 1) * u[k] + T.Q[k](0) * Na[k];
      bU[k] = T.E2[k](1, 0) * tau[k] + T.E2[k](1, 1) * u[k] + T.Q[k](1) * Na[k];
    }
    nonlinear_u(bT, Nb);
    for (int k = 1; k < kmax_; ++k) {
      const cplx g = 2.0 * Nb[k] - Nu[k];
      cT[k] = T.E2[k](0, 0) * aT[k] + T.E2[k](0, 1) * aU[k] + T.Q[k](0) * g;
      cU[k] = T.E2[k](1, 0) * aT[k] + T.E2[k](1, 1) * aU[k] + T.Q[k](1) * g;
    }
    nonlinear_u(cT, Nc);
    for (int k = 1; k < kmax_; ++k) {
      const cplx t = tau[k];
      const cplx v = u[k];
      const cplx ab = Na[k] + Nb[k];
      tau[k] = T.E[k](0, 0) * t + T.E[k](0, 1) * v + T.F1[k](0) * Nu[k] + 2.0 * T.F2[k](0) * ab + T.F3[k](0) * Nc[k];
      u[k] = T.E[k](1, 0) * t + T.E[k](1, 1) * v + T.F1[k](1) * Nu[k] + 2.0 * T.F2[k](1) * ab + T.F3[k](1) * Nc[k];
    }
  }

  /// out[k] = i k FFT[g(tau)]_k for 0 < k < n/2, zero elsewhere.
  void nonlinear_u(std::span<const cplx> tauHat, std::span<cplx> out) {
    std::fill(out.begin(), out.end(), cplx{});
    const bool twoThirds = cfg_.dealias == Dealias::TwoThirds;
    const int keep = twoThirds ? n_ / 3 : kmax_ - 1;
    work_.assign(work_.size(), cplx{});
    for (int k = 1; k <= keep; ++k) work_[k] = tauHat[k];
    fft_.to_grid(work_, grid_);
    for (double& v : grid_) v = flux_.nonlinear_part(v);
    fft_.to_coefficients(grid_, work_);
    for (int k = 1; k <= keep; ++k) out[k] = cplx(0.0, k) * work_[k];
    if (extra_) {
      std::vector<cplx> inc(kmax_ + 1);
      extra_(tauHat, inc);
      for (int k = 1; k < kmax_; ++k) out[k] += inc[k];
    }
  }

  NormalizedParameters params_;
  FluxModel flux_;
  StepperConfig cfg_;
  Tolerances tol_;
  int n_;
  int kmax_;
  RealFft fft_;
  std::vector<double> grid_;
  std::vector<cplx> work_;
  std::vector<cplx> nu_ = std::vector<cplx>(kmax_ + 1);
  std::map<double, Tables> tables_;
  ExtraTerm extra_;
};

inline FieldState step(const FieldState& s, NormalizedParameters p, const FluxModel& f, const StepperConfig& cfg) {
  Simulator sim(p, f, cfg, s.n());
  return sim.step(s);
}

inline EvolveResult evolve(const FieldState& s, NormalizedParameters p, const FluxModel& f, const StepperConfig& cfg,
                           double tEnd, ObserverConfig obs = {}) {
  Simulator sim(p, f, cfg, s.n());
  return sim.evolve(s, tEnd, obs);
}

/// tau_hat(k0) = rho, everything else zero, plus optional uniform noise of
/// amplitude `noise` on both fields in every mode 0 < k < n/3.
template <class Rng>
FieldState bifurcation_initial_data(int n, int k0, double rho, double noise, Rng& rng) {
  FieldState s(n);
  s.set_tau(k0, rho);
  if (noise > 0.0) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int k = 1; 3 * k < n; ++k) {
      s.set_tau(k, s.tau(k) + noise * cplx(U(rng), U(rng)));
      s.set_u(k, s.u(k) + noise * cplx(U(rng), U(rng)));
    }
  }
  return s;
}

// Checkpoint layout, all little endian:
//   uint64  n
//   float64 time
//   for k = -n/2+1 .. n/2:  float64 Re tau_k, Im tau_k, Re u_k, Im u_k
// Total size 16 + 32 n bytes.
namespace detail {
inline void put_le(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), 8);
}
inline std::uint64_t get_le(std::istream& is) {
  std::array<unsigned char, 8> b{};
  is.read(reinterpret_cast<char*>(b.data()), 8);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}
inline void put_f64(std::ostream& os, double d) { put_le(os, std::bit_cast<std::uint64_t>(d)); }
inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_le(is)); }
}  // namespace detail

inline void write_checkpoint(std::ostream& os, const FieldState& s) {
  detail::put_le(os, static_cast<std::uint64_t>(s.n()));
  detail::put_f64(os, s.time);
  for (int k = -s.n() / 2 + 1; k <= s.n() / 2; ++k) {
    detail::put_f64(os, s.tau(k).real());
    detail::put_f64(os, s.tau(k).imag());
    detail::put_f64(os, s.u(k).real());
    detail::put_f64(os, s.u(k).imag());
  }
}

inline FieldState read_checkpoint(std::istream& is) {
  const auto n = detail::get_le(is);
  if (n > (1u << 24)) throw std::runtime_error("checkpoint: implausible grid size");
  FieldState s(static_cast<int>(n));
  s.time = detail::get_f64(is);
  const int N = static_cast<int>(n);
  for (int k = -N / 2 + 1; k <= N / 2; ++k) {
    const double tr = detail::get_f64(is), ti = detail::get_f64(is);
    const double ur = detail::get_f64(is), ui = detail::get_f64(is);
    if (k > 0 && k < N / 2) {
      s.set_tau(k, {tr, ti});
      s.set_u(k, {ur, ui});
    }
  }
  return s;
}

inline void write_checkpoint(const std::string& path, const FieldState& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
  write_checkpoint(os, s);
}

inline FieldState read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  return read_checkpoint(is);
}

}  // namespace wavebif
