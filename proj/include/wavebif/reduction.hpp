#pragma once

// Center-manifold reduction at an admissible critical configuration:
// kernel and dual kernel, the projection onto the center space, the
// quadratic part of the reduction function and the cubic amplitude
// equation dA/dt = aCoef mu A + bCoef |A|^2 A.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "wavebif/field.hpp"
#include "wavebif/model.hpp"
#include "wavebif/spectral.hpp"
#include "wavebif/tolerances.hpp"

namespace wavebif {

using Vec2 = Eigen::Vector2cd;

/// Complex 2-vector trigonometric polynomial sum_m c_m e^{imx}.
struct TrigField {
  std::map<int, Vec2> modes;

  Vec2 operator()(double x) const {
    Vec2 v = Vec2::Zero();
    for (const auto& [m, c] : modes) v += c * std::polar(1.0, m * x);
    return v;
  }

  int max_harmonic() const {
    int h = 0;
    for (const auto& [m, c] : modes) h = std::max(h, std::abs(m));
    return h;
  }

  TrigField conj() const {
    TrigField out;
    for (const auto& [m, c] : modes) out.modes[-m] = c.conjugate();
    return out;
  }
};

/// Uniform-grid rule for int_{-pi}^{pi} f dx; exact for trigonometric
/// integrands of degree below N.
template <class F>
cplx periodic_quadrature(F&& f, int N) {
  cplx sum{};
  for (int j = 0; j < N; ++j) sum += f(grid_point(j, N));
  return sum * (2.0 * std::numbers::pi / N);
}

/// <U, V> = int u1 v1* + u2 v2* dx, conjugate on the second slot.
inline cplx pairing(const TrigField& U, const TrigField& V) {
  const int N = std::max(8, 4 * std::max(U.max_harmonic(), V.max_harmonic()));
  return periodic_quadrature([&](double x) { return (U(x).array() * V(x).conjugate().array()).sum(); }, N);
}

struct ReductionBasis {
  int k0 = 1;
  Vec2 xiVec;    // xi  = e^{i k0 x} xiVec
  Vec2 etaVec;   // eta = e^{i k0 x} etaVec, kappa included
  cplx kappa;

  TrigField xi() const { return {{{k0, xiVec}}}; }
  TrigField xi_conj() const { return {{{-k0, xiVec.conjugate()}}}; }
  TrigField eta() const { return {{{k0, etaVec}}}; }
  TrigField eta_conj() const { return {{{-k0, etaVec.conjugate()}}}; }
};

/// Basis from raw parameters; throws when (a_c + 1) k0^2 - delta_c vanishes.
inline ReductionBasis build_basis(int k0, double aC, double deltaC, double tol = Tolerances{}.nonvanishing) {
  const double k = k0;
  const double denom = (aC + 1.0) * k * k - deltaC;
  if (std::abs(denom) <= tol)
    throw std::invalid_argument("build_basis: (a_c+1) k0^2 - delta_c vanishes, dual kernel cannot be normalized");
  ReductionBasis b;
  b.k0 = k0;
  b.xiVec << 1.0, cplx(0.0, -aC * k * k * k);
  b.kappa = 1.0 / (2.0 * std::numbers::pi * I * k * denom);
  b.etaVec << b.kappa * cplx(0.0, -k * (deltaC - k * k)), b.kappa;
  return b;
}

inline ReductionBasis build_basis(const CriticalConfiguration& cfg) {
  return build_basis(cfg.k0(), cfg.aC(), cfg.deltaC());
}

/// Adjoint mode matrix at k0, the Fourier symbol of L*.
inline Eigen::Matrix2cd adjoint_mode_matrix(int k0, double aC, double deltaC, double sigma1) {
  const double k = k0;
  Eigen::Matrix2cd m;
  m << -aC * k * k * k * k, cplx(0.0, -sigma1 * k), cplx(0.0, -k), deltaC * k * k - k * k * k * k;
  return m;
}

struct CenterCoordinates {
  cplx A;
  cplx Aconj;
};

/// A = <eta*, U>, A* = <eta, U> by quadrature on the field's own grid
/// (refined to at least 4 k0 points).
inline CenterCoordinates project_center(const FieldState& field, const ReductionBasis& basis) {
  int N = field.n();
  while (N < 4 * basis.k0) N *= 2;
  const auto phys = to_physical(field, N);
  const TrigField eta = basis.eta();
  const TrigField etaC = basis.eta_conj();
  auto pair_with = [&](const TrigField& w) {
    cplx sum{};
    for (int j = 0; j < N; ++j) {
      const Vec2 wv = w(phys.x[j]);
      // U is real, so its conjugate is itself.
      sum += wv(0) * phys.tau[j] + wv(1) * phys.u[j];
    }
    return sum * (2.0 * std::numbers::pi / N);
  };
  return {pair_with(etaC), pair_with(eta)};
}

/// A xi + A* xi* as a field on an n-point grid.
inline FieldState reconstruct_center(cplx A, const ReductionBasis& basis, int n) {
  FieldState s(n);
  s.set_tau(basis.k0, A * basis.xiVec(0));
  s.set_u(basis.k0, A * basis.xiVec(1));
  return s;
}

struct SecondOrderCorrection {
  int k0 = 1;
  cplx phi1PerA2;  // i sigma2 / (6 a_c k0^4 (21 k0^2 - 5 delta_c))
  cplx phi2PerA2;  // 8 a_c k0^3 sigma2 / (6 a_c k0^4 (21 k0^2 - 5 delta_c))

  /// sigma2 / (6 a_c k0^4 (21 k0^2 - 5 delta_c)); tau_hat(2 k0) = -C A^2.
  double C() const { return phi1PerA2.imag(); }

  /// Phi(A, A*) = i (e^{2 i k0 x} V A^2 - e^{-2 i k0 x} V* A*^2) on an n-point grid.
  FieldState reconstruct(cplx A, int n) const {
    FieldState s(n);
    s.set_tau(2 * k0, I * phi1PerA2 * A * A);
    s.set_u(2 * k0, I * phi2PerA2 * A * A);
    return s;
  }
};

/// 3 a_c k0^4 (21 k0^2 - 5 delta_c), which equals
/// sigma1 + a_c (2k0)^4 ((2k0)^2 - delta_c) under condition (a).
inline double second_harmonic_denominator(int k0, double aC, double deltaC) {
  const double k = k0;
  return 3.0 * aC * k * k * k * k * (21.0 * k * k - 5.0 * deltaC);
}

inline SecondOrderCorrection second_order_correction(const CriticalConfiguration& cfg, const FluxModel& f) {
  const double k = cfg.k0();
  const double den = 2.0 * second_harmonic_denominator(cfg.k0(), cfg.aC(), cfg.deltaC());
  SecondOrderCorrection c;
  c.k0 = cfg.k0();
  c.phi1PerA2 = cplx(0.0, f.sigma2() / den);
  c.phi2PerA2 = cplx(8.0 * cfg.aC() * k * k * k * f.sigma2() / den, 0.0);
  return c;
}

struct AmplitudeEquation {
  int k0 = 1;
  double aCoef = 0.0;
  double bCoef = 0.0;
  double prefactor = 0.0;  // 1 / ((a_c+1) k0^2 - delta_c)
  double bracket = 0.0;    // sigma2^2 / (6 a_c k0^4 (21 k0^2 - 5 delta_c)) - sigma3 / 2
  double muNu1 = 0.0;      // delta_c - k0^2
  double muNu2 = 0.0;      // a_c

  /// mu(nu) = (delta_c - k0^2) nu1 + a_c nu2 with nu = (a - a_c, delta - delta_c).
  double mu(double nu1, double nu2) const { return muNu1 * nu1 + muNu2 * nu2; }

  /// Reduced vector field F(A, A*, mu) at cubic order.
  cplx field(cplx A, cplx Aconj, double mu) const { return aCoef * mu * A + bCoef * A * A * Aconj; }
};

inline AmplitudeEquation amplitude_equation(const CriticalConfiguration& cfg, const FluxModel& f) {
  const double k = cfg.k0();
  const double k4 = k * k * k * k;
  AmplitudeEquation eq;
  eq.k0 = cfg.k0();
  eq.prefactor = 1.0 / cfg.nondegeneracy();
  eq.aCoef = k4 * eq.prefactor;
  const double s2 = f.sigma2();
  eq.bracket = s2 * s2 / (2.0 * second_harmonic_denominator(cfg.k0(), cfg.aC(), cfg.deltaC())) - 0.5 * f.sigma3();
  eq.bCoef = eq.prefactor * eq.bracket;
  eq.muNu1 = cfg.deltaC() - k * k;
  eq.muNu2 = cfg.aC();
  return eq;
}

enum class BifurcationKind { Supercritical, Subcritical };
enum class Side { MuPositive, MuNegative };
enum class Stability { Stable, Unstable, Neutral };

inline const char* to_string(BifurcationKind k) {
  return k == BifurcationKind::Supercritical ? "supercritical" : "subcritical";
}
inline const char* to_string(Side s) { return s == Side::MuPositive ? "muPositive" : "muNegative"; }
inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Neutral: return "neutral";
  }
  return "?";
}

struct DegenerateBifurcation : std::domain_error {
  DegenerateBifurcation()
      : std::domain_error("cubic coefficient vanishes; the bifurcation is decided by quintic terms") {}
};

struct BifurcationVerdict {
  BifurcationKind kind;
  Side bifurcatingSide;
  Stability trivialForMuPositive;
  Stability trivialForMuNegative;
  Stability branch;
  double aCoef;
  double bCoef;

  bool on_branch_side(double mu) const { return -aCoef * mu / bCoef > 0.0; }

  /// sqrt(-a mu / b) on the bifurcating side.
  double predicted_amplitude(double mu) const {
    if (!on_branch_side(mu)) throw std::invalid_argument("predicted_amplitude: mu is not on the bifurcating side");
    return std::sqrt(-aCoef * mu / bCoef);
  }
};

inline BifurcationVerdict classify_bifurcation(const AmplitudeEquation& eq, double tol = Tolerances{}.degenerate) {
  if (std::abs(eq.bCoef) <= tol) throw DegenerateBifurcation();
  BifurcationVerdict v;
  v.aCoef = eq.aCoef;
  v.bCoef = eq.bCoef;
  v.kind = eq.bCoef < 0.0 ? BifurcationKind::Supercritical : BifurcationKind::Subcritical;
  v.bifurcatingSide = (eq.aCoef / eq.bCoef < 0.0) ? Side::MuPositive : Side::MuNegative;
  v.trivialForMuPositive = eq.aCoef < 0.0 ? Stability::Stable : Stability::Unstable;
  v.trivialForMuNegative = eq.aCoef > 0.0 ? Stability::Stable : Stability::Unstable;
  v.branch = eq.bCoef < 0.0 ? Stability::Stable : Stability::Unstable;
  return v;
}

/// Bifurcated equilibrium with A = r_mu e^{i theta} on an n-point grid:
/// tau = 2 r cos(k0 x + theta), u = 2 a_c k0^3 r sin(k0 x + theta), plus
/// optionally the second harmonic Phi(A, A*).
inline FieldState predicted_wave(const AmplitudeEquation& eq, const CriticalConfiguration& cfg, const FluxModel& f,
                                 double mu, double theta, int n = 64, bool withSecondHarmonic = false) {
  const auto verdict = classify_bifurcation(eq);
  const double r = verdict.predicted_amplitude(mu);
  const auto basis = build_basis(cfg);
  const cplx A = std::polar(r, theta);
  FieldState s = reconstruct_center(A, basis, n);
  if (withSecondHarmonic && 2 * cfg.k0() < n / 2) {
    const auto corr = second_order_correction(cfg, f).reconstruct(A, n);
    s.set_tau(2 * cfg.k0(), corr.tau(2 * cfg.k0()));
    s.set_u(2 * cfg.k0(), corr.u(2 * cfg.k0()));
  }
  return s;
}

struct ObservationalParameters {
  double gamma1;
  double gamma2;
};

/// Gamma1 = k0^4 (k0^2 - delta_c) nu1, Gamma2 = -a_c k0^4 nu2.
inline ObservationalParameters observational_parameters(const CriticalConfiguration& cfg, double nu1, double nu2) {
  const double k = cfg.k0();
  const double k4 = k * k * k * k;
  return {k4 * (k * k - cfg.deltaC()) * nu1, -cfg.aC() * k4 * nu2};
}

}  // namespace wavebif
