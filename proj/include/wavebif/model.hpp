#pragma once

// Flux nonlinearity and physical parameters of the viscous wave system
//
//   tau_t - u_x         = -a tau_xxxx
//   u_t   - sigma(tau)_x = -delta u_xx - eps u_xxxx
//
// on the periodic domain [-M, M].

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wavebif {

/// Taylor data of sigma at the reference state tau = 0, with sigma(0) = 0.
///
/// The remainder beyond cubic order is either absent, a polynomial
/// sum_{j>=4} c_j tau^j, or an arbitrary callable that vanishes to fourth
/// order at 0.
class FluxModel {
 public:
  FluxModel() = default;
  FluxModel(double sigma1, double sigma2, double sigma3)
      : sigma1_(sigma1), sigma2_(sigma2), sigma3_(sigma3) {}

  /// coeffs[0] multiplies tau^4, coeffs[1] tau^5, ...
  static FluxModel with_polynomial_tail(double sigma1, double sigma2, double sigma3,
                                        std::vector<double> coeffs) {
    FluxModel f(sigma1, sigma2, sigma3);
    f.tail_coeffs_ = std::move(coeffs);
    return f;
  }

  static FluxModel with_tail(double sigma1, double sigma2, double sigma3,
                             std::function<double(double)> tail) {
    FluxModel f(sigma1, sigma2, sigma3);
    f.tail_fn_ = std::move(tail);
    return f;
  }

  double sigma1() const { return sigma1_; }
  double sigma2() const { return sigma2_; }
  double sigma3() const { return sigma3_; }

  bool has_tail() const { return !tail_coeffs_.empty() || static_cast<bool>(tail_fn_); }
  bool has_polynomial_tail() const { return !tail_coeffs_.empty(); }
  const std::vector<double>& tail_coefficients() const { return tail_coeffs_; }

  double tail(double tau) const {
    if (tail_fn_) return tail_fn_(tau);
    if (tail_coeffs_.empty()) return 0.0;
    // Horner on c4 + c5 tau + ..., then scale by tau^4.
    double acc = 0.0;
    for (auto it = tail_coeffs_.rbegin(); it != tail_coeffs_.rend(); ++it) acc = acc * tau + *it;
    const double t2 = tau * tau;
    return acc * t2 * t2;
  }

  /// sigma''(0)/2 tau^2 + sigma'''(0)/6 tau^3 + tail(tau): the part of the
  /// flux that is not linear in tau.
  double nonlinear_part(double tau) const {
    return tau * tau * (0.5 * sigma2_ + sigma3_ * tau / 6.0) + tail(tau);
  }

  /// True when the flux contributes nothing beyond the linear term.
  bool is_linear() const { return sigma2_ == 0.0 && sigma3_ == 0.0 && !has_tail(); }

 private:
  double sigma1_ = 0.0;
  double sigma2_ = 0.0;
  double sigma3_ = 0.0;
  std::vector<double> tail_coeffs_;
  std::function<double(double)> tail_fn_;
};

/// sigma(tau) - sigma(0).
inline double flux_eval(const FluxModel& f, double tau) {
  return f.sigma1() * tau + f.nonlinear_part(tau);
}

struct TailCheck {
  bool ok = true;
  double bound = 0.0;  // sampled sup |tail(tau)| / tau^4 over 0 < |tau| <= 1
};

/// Samples |tail(tau)| / tau^4 on |tau| <= 1. The ratio must stay bounded as
/// tau -> 0; a tail of order lower than four makes it grow geometrically
/// along tau = 2^-j.
inline TailCheck check_tail(const FluxModel& f) {
  TailCheck out;
  if (!f.has_tail()) return out;
  auto ratio = [&](double tau) {
    const double t4 = tau * tau * tau * tau;
    return std::abs(f.tail(tau)) / t4;
  };
  for (int i = 1; i <= 400; ++i) {
    const double tau = -1.0 + 2.0 * i / 401.0;
    if (tau == 0.0) continue;
    const double r = ratio(tau);
    if (!std::isfinite(r)) {
      out.ok = false;
      return out;
    }
    out.bound = std::max(out.bound, r);
  }
  for (double sign : {-1.0, 1.0}) {
    double coarse = 0.0;
    for (int j = 0; j <= 30; ++j) {
      const double r = ratio(sign * std::ldexp(1.0, -j));
      if (!std::isfinite(r)) {
        out.ok = false;
        return out;
      }
      if (j <= 15) coarse = std::max(coarse, r);
      else if (r > 2.0 * coarse + 1e-300) out.ok = false;
      out.bound = std::max(out.bound, r);
    }
  }
  return out;
}

struct PhysicalParameters {
  double a = 0.0;
  double delta = 0.0;
  double epsilon = 1.0;
  double halfPeriod = std::numbers::pi;
};

/// Parameters on [-pi, pi] with unit u-hyperviscosity.
class NormalizedParameters {
 public:
  double a() const { return a_; }
  double delta() const { return delta_; }

 private:
  NormalizedParameters(double a, double delta) : a_(a), delta_(delta) {}
  friend NormalizedParameters normalize_domain(const PhysicalParameters& p);

  double a_;
  double delta_;
};

/// Rescales x and t so the half period becomes pi, then divides through by
/// the rescaled epsilon. Net effect: a -> a/eps, delta -> (M/pi)^2 delta/eps.
inline NormalizedParameters normalize_domain(const PhysicalParameters& p) {
  if (!(p.epsilon > 0.0)) throw std::invalid_argument("normalize_domain: epsilon must be positive");
  if (!(p.halfPeriod > 0.0)) throw std::invalid_argument("normalize_domain: half period must be positive");
  const double ratio = p.halfPeriod / std::numbers::pi;
  if (ratio == 1.0 && p.epsilon == 1.0) return {p.a, p.delta};
  return {p.a / p.epsilon, ratio * ratio * p.delta / p.epsilon};
}

/// Shorthand for parameters already posed on [-pi, pi] with eps = 1.
inline NormalizedParameters normalized(double a, double delta) {
  return normalize_domain(PhysicalParameters{a, delta, 1.0, std::numbers::pi});
}

}  // namespace wavebif
