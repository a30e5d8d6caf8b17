#pragma once

// Reduced dynamics in polar form A = r e^{i theta}:
//   dr/dt     = aCoef mu r + bCoef r^3
//   dtheta/dt = g(r)            (identically zero at cubic order)

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavebif/reduction.hpp"

namespace wavebif {

struct AmplitudeState {
  double r = 0.0;
  double theta = 0.0;
};

/// The truncated radial ODE leaves every bounded set in finite time.
struct FiniteTimeBlowup : std::runtime_error {
  double time;
  explicit FiniteTimeBlowup(double t)
      : std::runtime_error("amplitude escapes to infinity at t = " + std::to_string(t)), time(t) {}
};

/// Blowup time of dr/dt = aMu r + b r^3 from r0, or +inf if none.
inline double blowup_time(double aMu, double b, double r0) {
  if (r0 == 0.0 || b <= 0.0) return std::numeric_limits<double>::infinity();
  const double br2 = b * r0 * r0;
  if (aMu == 0.0) return 1.0 / (2.0 * br2);
  // The denominator vanishes where e^{-2 aMu t} = b r0^2 / (aMu + b r0^2).
  const double target = br2 / (aMu + br2);
  if (!(target > 0.0)) return std::numeric_limits<double>::infinity();
  const double t = -std::log(target) / (2.0 * aMu);
  return t > 0.0 ? t : std::numeric_limits<double>::infinity();
}

/// Closed-form solution r(t) of the truncated radial equation,
///   r^2 = aMu r0^2 / (aMu e^{-2 aMu t} + b r0^2 (e^{-2 aMu t} - 1)),
/// evaluated in a form that stays accurate as aMu -> 0. t may be +inf.
inline double truncated_solution(double aMu, double b, double r0, double t) {
  if (r0 < 0.0) throw std::invalid_argument("truncated_solution: r0 must be nonnegative");
  if (t == 0.0 || r0 == 0.0) return r0;
  const double tb = blowup_time(aMu, b, r0);
  if (std::isfinite(tb) && t >= tb) throw FiniteTimeBlowup(tb);
  if (std::isinf(t)) {
    if (aMu < 0.0) return 0.0;
    if (aMu == 0.0) return 0.0;  // b < 0: algebraic decay
    return std::sqrt(-aMu / b);
  }
  const double x = -2.0 * aMu * t;
  // (e^x - 1) / aMu = -2 t expm1(x)/x
  const double em1OverA = (x == 0.0) ? -2.0 * t : -2.0 * t * std::expm1(x) / x;
  const double denom = std::exp(x) + b * r0 * r0 * em1OverA;
  return r0 / std::sqrt(denom);
}

struct TrajectoryPoint {
  double t;
  double r;
  double theta;
};

/// Classical RK4 for the polar system with an optional angular rate g(r).
/// The last step is shortened to land on tEnd. Throws FiniteTimeBlowup
/// when r overflows escapeRadius or stops being finite.
inline std::vector<TrajectoryPoint> integrate_radial(double aMu, double b, double r0, double theta0, double tEnd,
                                                     double dt, int stride = 1,
                                                     const std::function<double(double)>& angularRate = {},
                                                     double escapeRadius = 1e8) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_radial: dt must be positive");
  if (r0 < 0.0) throw std::invalid_argument("integrate_radial: r0 must be nonnegative");
  if (stride < 1) stride = 1;
  auto fr = [&](double r) { return aMu * r + b * r * r * r; };
  auto ft = [&](double r) { return angularRate ? angularRate(r) : 0.0; };

  std::vector<TrajectoryPoint> out;
  double t = 0.0;
  double r = r0;
  double th = theta0;
  out.push_back({t, r, th});
  long step = 0;
  while (t < tEnd) {
    const double h = std::min(dt, tEnd - t);
    const double k1 = fr(r);
    const double k2 = fr(r + 0.5 * h * k1);
    const double k3 = fr(r + 0.5 * h * k2);
    const double k4 = fr(r + h * k3);
    const double rNew = r + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (angularRate) {
      const double g1 = ft(r);
      const double g2 = ft(r + 0.5 * h * k1);
      const double g3 = ft(r + 0.5 * h * k2);
      const double g4 = ft(r + h * k3);
      th += h / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
    }
    r = rNew;
    t = (h == dt) ? t + h : tEnd;
    if (!std::isfinite(r) || std::abs(r) > escapeRadius) throw FiniteTimeBlowup(t);
    ++step;
    if (step % stride == 0 || t >= tEnd) out.push_back({t, r, th});
  }
  return out;
}

inline std::vector<TrajectoryPoint> integrate_radial(const AmplitudeEquation& eq, double mu, double r0, double tEnd,
                                                     double dt, int stride = 1) {
  return integrate_radial(eq.aCoef * mu, eq.bCoef, r0, 0.0, tEnd, dt, stride);
}

struct Equilibrium {
  double r;
  Stability stability;
};

/// Nonnegative equilibria of the truncated radial equation with stability
/// from the sign of f'(r) = a mu + 3 b r^2.
inline std::vector<Equilibrium> equilibria(double aCoef, double bCoef, double mu,
                                           double tol = Tolerances{}.degenerate) {
  if (std::abs(bCoef) <= tol) throw DegenerateBifurcation();
  auto classify = [](double slope) {
    return slope < 0.0 ? Stability::Stable : (slope > 0.0 ? Stability::Unstable : Stability::Neutral);
  };
  const double aMu = aCoef * mu;
  std::vector<Equilibrium> out{{0.0, classify(aMu)}};
  const double r2 = -aMu / bCoef;
  if (r2 > 0.0) out.push_back({std::sqrt(r2), classify(-2.0 * aMu)});
  return out;
}

inline std::vector<Equilibrium> equilibria(const AmplitudeEquation& eq, double mu) {
  return equilibria(eq.aCoef, eq.bCoef, mu);
}

}  // namespace wavebif
