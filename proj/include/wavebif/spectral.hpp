#pragma once

// Per-mode linear analysis of L(a, delta). On the mean-zero periodic space
// L is block diagonal in Fourier space with one 2x2 block per wavenumber
// k != 0:
//
//   M_k = [ -a k^4        i k          ]
//         [ i sigma1 k    delta k^2-k^4 ]
//
// whose eigenvalues solve lambda^2 + B(k) lambda + C(k) = 0.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavebif/model.hpp"
#include "wavebif/tolerances.hpp"

namespace wavebif {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

struct ModeMatrix {
  int k = 0;
  Eigen::Matrix2cd entries;
};

inline void require_nonzero_mode(int k, const char* where) {
  if (k == 0) throw std::invalid_argument(std::string(where) + ": mode k = 0 is excluded from the mean-zero space");
}

inline ModeMatrix mode_matrix(int k, double a, double delta, const FluxModel& f) {
  require_nonzero_mode(k, "mode_matrix");
  const double kk = static_cast<double>(k);
  const double k2 = kk * kk;
  const double k4 = k2 * k2;
  ModeMatrix m;
  m.k = k;
  m.entries << cplx(-a * k4, 0.0), cplx(0.0, kk), cplx(0.0, f.sigma1() * kk), cplx(delta * k2 - k4, 0.0);
  return m;
}

struct DispersionRoots {
  int k = 0;
  double B = 0.0;  // (a+1)k^4 - delta k^2
  double C = 0.0;  // a k^4 (k^4 - delta k^2) + sigma1 k^2
  cplx lambdaPlus;   // larger real part (positive imaginary part when complex)
  cplx lambdaMinus;
};

/// Roots of lambda^2 + B lambda + C. k enters only through k^2, so the
/// result for -k is bitwise identical to the one for k.
inline DispersionRoots dispersion_roots(int k, double a, double delta, const FluxModel& f) {
  require_nonzero_mode(k, "dispersion_roots");
  const double kk = static_cast<double>(k);
  const double k2 = kk * kk;
  const double k4 = k2 * k2;
  DispersionRoots r;
  r.k = k;
  r.B = (a + 1.0) * k4 - delta * k2;
  r.C = a * k4 * (k4 - delta * k2) + f.sigma1() * k2;
  const double disc = r.B * r.B - 4.0 * r.C;
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    // Larger-magnitude root first, the other one from the product C.
    const double q = -0.5 * (r.B + std::copysign(sq, r.B));
    // q == 0 only when B == C == 0, a double zero root.
    const double big = q;
    const double small = (q != 0.0) ? r.C / q + 0.0 : 0.0;  // + 0.0 drops a negative zero
    r.lambdaPlus = cplx(std::max(big, small), 0.0);
    r.lambdaMinus = cplx(std::min(big, small), 0.0);
  } else {
    const double re = -0.5 * r.B;
    const double im = 0.5 * std::sqrt(-disc);
    r.lambdaPlus = cplx(re, im);
    r.lambdaMinus = cplx(re, -im);
  }
  return r;
}

struct AdmissibilityReport;

/// A triple (k0, a_c, delta_c) that passed every admissibility check, with
/// the scan range and spectral gap recorded as evidence.
class CriticalConfiguration {
 public:
  int k0() const { return k0_; }
  double aC() const { return aC_; }
  double deltaC() const { return deltaC_; }
  double sigma1() const { return sigma1_; }
  int kMax() const { return kMax_; }
  double gap() const { return gap_; }

  /// (a_c + 1) k0^2 - delta_c, nonzero by condition (c).
  double nondegeneracy() const {
    const double k = k0_;
    return (aC_ + 1.0) * k * k - deltaC_;
  }

 private:
  CriticalConfiguration(int k0, double aC, double deltaC, double sigma1, int kMax, double gap)
      : k0_(k0), aC_(aC), deltaC_(deltaC), sigma1_(sigma1), kMax_(kMax), gap_(gap) {}
  friend AdmissibilityReport check_admissible(int, double, double, const FluxModel&, int, const Tolerances&);

  int k0_;
  double aC_;
  double deltaC_;
  double sigma1_;
  int kMax_;
  double gap_;
};

enum class Condition { A, C, D, NonzeroA, B, Tail };

inline const char* to_string(Condition c) {
  switch (c) {
    case Condition::A: return "a";
    case Condition::C: return "c";
    case Condition::D: return "d";
    case Condition::NonzeroA: return "aNonzero";
    case Condition::B: return "b";
    case Condition::Tail: return "tail";
  }
  return "?";
}

struct ConditionCheck {
  Condition which;
  bool passed = false;
  double value = 0.0;  // the residual or the non-vanishing quantity
  int witness = 0;     // offending wavenumber, 0 when not mode specific
};

struct AdmissibilityReport {
  std::vector<ConditionCheck> checks;  // in evaluation order: a, c, d, aNonzero, b, tail
  std::optional<CriticalConfiguration> config;
  double gap = 0.0;

  bool admissible() const { return config.has_value(); }

  const ConditionCheck* first_violation() const {
    for (const auto& c : checks)
      if (!c.passed) return &c;
    return nullptr;
  }
};

/// Checks conditions (a)-(d) of an admissible critical configuration.
///
/// (b) is checked by its spectral meaning: for 1 <= k <= kMax, k != k0, no
/// root of the dispersion relation sits on the imaginary axis. Beyond kMax
/// the real parts diverge like k^4; this is certified by requiring
/// min |Re lambda| to be nondecreasing over the last quarter of the scan.
/// The gap is the smallest |Re lambda| over all noncenter eigenvalues,
/// including the hyperbolic partner of the zero root at k0.
inline AdmissibilityReport check_admissible(int k0, double aC, double deltaC, const FluxModel& f, int kMax,
                                            const Tolerances& tol = {}) {
  if (k0 <= 0) throw std::invalid_argument("check_admissible: k0 must be a positive integer");
  if (kMax < 2 * k0) throw std::invalid_argument("check_admissible: kMax must be at least 2 k0");

  AdmissibilityReport rep;
  const double k = k0;
  const double k2 = k * k;
  const double k4 = k2 * k2;
  const double sigma1 = f.sigma1();

  const double condA = aC * k4 * (k2 - deltaC) + sigma1;
  rep.checks.push_back({Condition::A, std::abs(condA) <= tol.equality, condA, k0});

  const double condC = (aC + 1.0) * k2 - deltaC;
  rep.checks.push_back({Condition::C, std::abs(condC) > tol.nonvanishing, condC, k0});

  const double k2d = 4.0 * k2;
  const double condD = sigma1 + aC * k2d * k2d * (k2d - deltaC);
  rep.checks.push_back({Condition::D, std::abs(condD) > tol.nonvanishing, condD, 2 * k0});

  rep.checks.push_back({Condition::NonzeroA, std::abs(aC) > tol.nonvanishing, aC, 0});

  ConditionCheck condB{Condition::B, true, std::numeric_limits<double>::infinity(), 0};
  double gap = std::numeric_limits<double>::infinity();
  std::vector<double> minRe(static_cast<std::size_t>(kMax) + 1, 0.0);
  for (int m = 1; m <= kMax; ++m) {
    const auto roots = dispersion_roots(m, aC, deltaC, f);
    const double rp = std::abs(roots.lambdaPlus.real());
    const double rm = std::abs(roots.lambdaMinus.real());
    minRe[m] = std::min(rp, rm);
    if (m == k0) {
      // One root is the zero eigenvalue; the other is -B(k0).
      gap = std::min(gap, std::max(rp, rm));
      continue;
    }
    const double worst = std::min(rp, rm);
    if (worst < condB.value) condB.value = worst;
    if (worst <= tol.nonvanishing && condB.passed) {
      condB.passed = false;
      condB.witness = m;
    }
    gap = std::min(gap, worst);
  }
  rep.checks.push_back(condB);

  ConditionCheck tail{Condition::Tail, true, 0.0, 0};
  for (int m = std::max(k0 + 1, (3 * kMax) / 4) + 1; m <= kMax; ++m) {
    if (minRe[m] < minRe[m - 1]) {
      tail.passed = false;
      tail.witness = m;
      tail.value = minRe[m] - minRe[m - 1];
      break;
    }
  }
  rep.checks.push_back(tail);

  rep.gap = gap;
  if (rep.first_violation() == nullptr) rep.config = CriticalConfiguration(k0, aC, deltaC, sigma1, kMax, gap);
  return rep;
}

struct CenterMode {
  int k;
  cplx lambda;
};

struct SpectralSummary {
  std::vector<CenterMode> centerModes;
  int stableCount = 0;
  int unstableCount = 0;
  double gap = std::numeric_limits<double>::infinity();
};

/// Classifies every eigenvalue with 1 <= |k| <= kMax.
inline SpectralSummary spectral_summary(double a, double delta, const FluxModel& f, int kMax,
                                        double centerTol = Tolerances{}.center) {
  if (kMax < 1) throw std::invalid_argument("spectral_summary: kMax must be positive");
  SpectralSummary s;
  for (int m = 1; m <= kMax; ++m) {
    const auto roots = dispersion_roots(m, a, delta, f);
    for (int sign : {-1, 1}) {
      for (cplx lam : {roots.lambdaPlus, roots.lambdaMinus}) {
        const double re = lam.real();
        if (std::abs(re) <= centerTol) {
          // For -k the eigenvalues are the conjugates (M_{-k} = conj(M_k)).
          s.centerModes.push_back({sign * m, sign > 0 ? lam : std::conj(lam)});
        } else {
          s.gap = std::min(s.gap, std::abs(re));
          if (re < 0.0) ++s.stableCount;
          else ++s.unstableCount;
        }
      }
    }
  }
  std::sort(s.centerModes.begin(), s.centerModes.end(),
            [](const CenterMode& x, const CenterMode& y) { return x.k < y.k; });
  return s;
}

inline SpectralSummary spectral_summary(const CriticalConfiguration& cfg, const FluxModel& f, int kMax,
                                        double centerTol = Tolerances{}.center) {
  return spectral_summary(cfg.aC(), cfg.deltaC(), f, kMax, centerTol);
}

struct ResonanceError : std::domain_error {
  int k;
  explicit ResonanceError(int mode)
      : std::domain_error("resolvent_norm: i omega is an eigenvalue of M_" + std::to_string(mode)), k(mode) {}
};

/// max over 1 <= k <= kMax of || (i omega - M_k)^{-1} ||_2. Negative k give
/// the same norms since M_{-k} is the complex conjugate of M_k.
inline double resolvent_norm(double omega, double a, double delta, const FluxModel& f, int kMax,
                             double tol = Tolerances{}.resonance) {
  if (omega == 0.0) throw std::invalid_argument("resolvent_norm: omega must be nonzero");
  double worst = 0.0;
  const cplx iw(0.0, omega);
  for (int m = 1; m <= kMax; ++m) {
    const auto roots = dispersion_roots(m, a, delta, f);
    if (std::abs(roots.lambdaPlus - iw) <= tol || std::abs(roots.lambdaMinus - iw) <= tol) throw ResonanceError(m);
    const Eigen::Matrix2cd shifted = iw * Eigen::Matrix2cd::Identity() - mode_matrix(m, a, delta, f).entries;
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(shifted);
    const double smin = svd.singularValues()(1);
    if (!(smin > 0.0)) throw ResonanceError(m);
    worst = std::max(worst, 1.0 / smin);
  }
  return worst;
}

}  // namespace wavebif
