#include <gtest/gtest.h>

#include <Eigen/LU>

#include <numbers>
#include <random>

#include "wavebif/reduction.hpp"

using namespace wavebif;

namespace {

constexpr double pi = std::numbers::pi;

CriticalConfiguration certified(int k0, double aC, double deltaC, double sigma1) {
  auto rep = check_admissible(k0, aC, deltaC, FluxModel(sigma1, 0, 0), 64);
  if (!rep.admissible()) throw std::logic_error("test configuration not admissible");
  return *rep.config;
}

CriticalConfiguration configA() { return certified(1, 1.0, 1.0, 0.0); }
CriticalConfiguration configB() { return certified(1, 1.0, 0.0, -1.0); }

// sigma1 chosen so that k0 carries a zero root.
double critical_sigma1(int k0, double aC, double deltaC) {
  const double k = k0;
  return -aC * k * k * k * k * (k * k - deltaC);
}

// Second-harmonic vector from a direct linear solve: M_{2k0} X = -(0, i k0 sigma2).
Eigen::Vector2cd second_harmonic_oracle(const CriticalConfiguration& cfg, const FluxModel& f) {
  const Eigen::Matrix2cd M = mode_matrix(2 * cfg.k0(), cfg.aC(), cfg.deltaC(), f).entries;
  Eigen::Vector2cd rhs(0.0, -cplx(0, cfg.k0() * f.sigma2()));
  return M.fullPivLu().solve(rhs);
}

// Cubic coefficient by projecting the |A|^2 A resonant forcing onto eta:
// forcing = d/dx[sigma2 tau1 tau2 + sigma3/6 tau1^3] at e^{i k0 x}, A = 1.
double cubic_oracle(const CriticalConfiguration& cfg, const FluxModel& f) {
  const int k0 = cfg.k0();
  const Eigen::Vector2cd X = second_harmonic_oracle(cfg, f);
  const int N = 64;
  cplx coeff{};
  for (int j = 0; j < N; ++j) {
    const double x = grid_point(j, N);
    const double tau1 = 2.0 * std::cos(k0 * x);
    const double tau2 = 2.0 * (X(0) * std::polar(1.0, 2.0 * k0 * x)).real();
    const double g = f.sigma2() * tau1 * tau2 + f.sigma3() / 6.0 * tau1 * tau1 * tau1;
    coeff += g * std::polar(1.0, -k0 * x);
  }
  coeff /= static_cast<double>(N);
  const cplx forcingU = cplx(0, k0) * coeff;
  const auto basis = build_basis(cfg);
  const cplx b = 2.0 * pi * forcingU * std::conj(basis.etaVec(1));
  EXPECT_NEAR(b.imag(), 0.0, 1e-12 * std::max(1.0, std::abs(b)));
  return b.real();
}

// Critical eigenvalue at delta = delta_c + h by the quadratic formula.
double critical_root(const CriticalConfiguration& cfg, double h) {
  return dispersion_roots(cfg.k0(), cfg.aC(), cfg.deltaC() + h, FluxModel(cfg.sigma1(), 0, 0)).lambdaPlus.real();
}

}  // namespace

TEST(Basis, KernelAndDualKernelResiduals) {
  for (const auto& cfg : {configA(), configB()}) {
    const auto b = build_basis(cfg);
    const Eigen::Matrix2cd M = mode_matrix(cfg.k0(), cfg.aC(), cfg.deltaC(), FluxModel(cfg.sigma1(), 0, 0)).entries;
    EXPECT_LT((M * b.xiVec).norm(), 1e-14);
    EXPECT_LT((adjoint_mode_matrix(cfg.k0(), cfg.aC(), cfg.deltaC(), cfg.sigma1()) * b.etaVec).norm(), 1e-14);
    EXPECT_LT((M.adjoint() * b.etaVec).norm(), 1e-14);
  }
}

TEST(Basis, DualityRelations) {
  const auto b = build_basis(configB());
  EXPECT_NEAR(std::abs(pairing(b.xi(), b.eta()) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(pairing(b.xi_conj(), b.eta_conj()) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(pairing(b.xi(), b.eta_conj())), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(pairing(b.xi_conj(), b.eta())), 0.0, 1e-14);
}

TEST(Basis, ConfigAValues) {
  // xi = (1, -i), kappa = 1 / (2 pi i), eta = kappa (0, 1).
  const auto b = build_basis(configA());
  EXPECT_EQ(b.xiVec(1), cplx(0, -1));
  EXPECT_NEAR(std::abs(b.kappa - 1.0 / (2.0 * pi * cplx(0, 1))), 0.0, 1e-16);
  EXPECT_NEAR(std::abs(b.etaVec(0)), 0.0, 1e-16);
}

TEST(Basis, RejectsDegenerateNormalization) {
  EXPECT_THROW(build_basis(1, 1.0, 2.0), std::invalid_argument);
}

TEST(Projection, RecoversCenterCoordinate) {
  const auto b = build_basis(configB());
  const cplx A(0.03, -0.07);
  FieldState s = reconstruct_center(A, b, 32);
  s.set_tau(3, {0.2, 0.1});  // other modes do not leak in
  s.set_u(2, {-0.4, 0.0});
  const auto c = project_center(s, b);
  EXPECT_NEAR(std::abs(c.A - A), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(c.Aconj - std::conj(A)), 0.0, 1e-15);
}

TEST(SecondOrder, ConfigBHarmonicIsMinusOneOver126) {
  const FluxModel f(-1.0, 1.0, 0.0);
  const auto corr = second_order_correction(configB(), f);
  EXPECT_NEAR(corr.C(), 1.0 / 126.0, 1e-16);
  const auto s = corr.reconstruct(1.0, 16);
  EXPECT_NEAR(std::abs(s.tau(2) - (-1.0 / 126.0)), 0.0, 1e-16);
}

TEST(SecondOrder, MatchesLinearSolveOnRandomConfigs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.2, 3.0);
  int checked = 0;
  while (checked < 50) {
    const int k0 = 1 + checked % 3;
    const double aC = U(rng), deltaC = U(rng) * k0 * k0;
    const double s1 = critical_sigma1(k0, aC, deltaC);
    auto rep = check_admissible(k0, aC, deltaC, FluxModel(s1, 0, 0), 64);
    if (!rep.admissible()) continue;
    const FluxModel f(s1, U(rng) - 1.5, U(rng));
    const auto corr = second_order_correction(*rep.config, f);
    const auto X = second_harmonic_oracle(*rep.config, f);
    const Eigen::Vector2cd mine(I * corr.phi1PerA2, I * corr.phi2PerA2);
    EXPECT_LT((mine - X).norm(), 1e-12 * std::max(1.0, X.norm()));
    ++checked;
  }
}

TEST(AmplitudeEquation, ConfigACoefficients) {
  const auto eq = amplitude_equation(configA(), FluxModel(0.0, 0.0, 2.0));
  EXPECT_DOUBLE_EQ(eq.aCoef, 1.0);
  EXPECT_DOUBLE_EQ(eq.bCoef, -1.0);
  EXPECT_DOUBLE_EQ(eq.mu(0.0, 0.01), 0.01);
  EXPECT_DOUBLE_EQ(eq.mu(0.3, 0.0), 0.0);  // delta_c = k0^2 kills the nu1 direction
}

TEST(AmplitudeEquation, CubicCoefficientMatchesDirectProjection) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.2, 3.0);
  int checked = 0;
  while (checked < 50) {
    const int k0 = 1 + checked % 3;
    const double aC = U(rng), deltaC = (U(rng) - 1.0) * k0 * k0;
    const double s1 = critical_sigma1(k0, aC, deltaC);
    auto rep = check_admissible(k0, aC, deltaC, FluxModel(s1, 0, 0), 64);
    if (!rep.admissible()) continue;
    const FluxModel f(s1, U(rng) - 1.5, U(rng) - 1.5);
    const auto eq = amplitude_equation(*rep.config, f);
    const double oracle = cubic_oracle(*rep.config, f);
    EXPECT_NEAR(eq.bCoef, oracle, 1e-12 * std::max(1.0, std::abs(oracle)));
    ++checked;
  }
}

TEST(AmplitudeEquation, LinearCoefficientMatchesEigenvalueDerivative) {
  for (const auto& cfg : {configA(), configB(), certified(2, 0.5, 1.0, critical_sigma1(2, 0.5, 1.0))}) {
    const auto eq = amplitude_equation(cfg, FluxModel(cfg.sigma1(), 0, 1));
    const double h = 1e-6;
    const double slope = (critical_root(cfg, h) - critical_root(cfg, -h)) / (2 * h);
    EXPECT_NEAR(slope, eq.aCoef * cfg.aC(), 1e-6 * std::abs(slope));
  }
}

TEST(Classification, SignTable) {
  const auto sup = classify_bifurcation(amplitude_equation(configA(), FluxModel(0, 0, 2)));
  EXPECT_EQ(sup.kind, BifurcationKind::Supercritical);
  EXPECT_EQ(sup.bifurcatingSide, Side::MuPositive);
  EXPECT_EQ(sup.trivialForMuPositive, Stability::Unstable);
  EXPECT_EQ(sup.trivialForMuNegative, Stability::Stable);
  EXPECT_EQ(sup.branch, Stability::Stable);
  EXPECT_DOUBLE_EQ(sup.predicted_amplitude(0.01), 0.1);
  EXPECT_THROW(sup.predicted_amplitude(-0.01), std::invalid_argument);

  const auto sub = classify_bifurcation(amplitude_equation(configA(), FluxModel(0, 0, -2)));
  EXPECT_EQ(sub.kind, BifurcationKind::Subcritical);
  EXPECT_EQ(sub.bifurcatingSide, Side::MuNegative);
  EXPECT_EQ(sub.branch, Stability::Unstable);
  EXPECT_DOUBLE_EQ(sub.predicted_amplitude(-0.04), 0.2);
}

TEST(Classification, DegenerateCubicThrows) {
  EXPECT_THROW(classify_bifurcation(amplitude_equation(configA(), FluxModel(0, 0, 0))), DegenerateBifurcation);
}

TEST(Classification, SameKindAcrossWavenumbers) {
  const auto k2 = certified(2, 0.5, 1.0, critical_sigma1(2, 0.5, 1.0));
  for (double s3 : {2.0, -2.0}) {
    const auto v1 = classify_bifurcation(amplitude_equation(configA(), FluxModel(0, 0, s3)));
    const auto v2 = classify_bifurcation(amplitude_equation(k2, FluxModel(k2.sigma1(), 0, s3)));
    EXPECT_EQ(std::signbit(v1.bCoef), std::signbit(v2.bCoef));
    EXPECT_EQ(v1.kind, v2.kind);
  }
}

TEST(PredictedWave, ProfileOnGrid) {
  const auto cfg = configA();
  const FluxModel f(0, 0, 2);
  const double theta = 0.4;
  const auto s = predicted_wave(amplitude_equation(cfg, f), cfg, f, 0.01, theta, 32);
  const auto p = to_physical(s);
  for (std::size_t j = 0; j < p.x.size(); ++j) {
    EXPECT_NEAR(p.tau[j], 0.2 * std::cos(p.x[j] + theta), 1e-15);
    EXPECT_NEAR(p.u[j], 0.2 * std::sin(p.x[j] + theta), 1e-15);
  }
}

TEST(PredictedWave, SecondHarmonicIncluded) {
  const auto cfg = configB();
  const FluxModel f(-1, 1, 2);
  const auto eq = amplitude_equation(cfg, f);
  const auto s = predicted_wave(eq, cfg, f, 0.01, 0.0, 32, true);
  const double r = std::sqrt(-eq.aCoef * 0.01 / eq.bCoef);
  EXPECT_NEAR(s.tau(2).real(), -r * r / 126.0, 1e-16);
}

TEST(ObservationalParameters, HandValues) {
  const auto o = observational_parameters(configB(), 0.5, 0.25);
  EXPECT_DOUBLE_EQ(o.gamma1, 0.5);
  EXPECT_DOUBLE_EQ(o.gamma2, -0.25);
}

TEST(SecondHarmonicDenominator, IdentityUnderCriticality) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const int k0 = 1 + i % 3;
    const double aC = U(rng), deltaC = U(rng) * 4;
    const double s1 = critical_sigma1(k0, aC, deltaC);
    const double k2 = 4.0 * k0 * k0;
    const double direct = s1 + aC * k2 * k2 * (k2 - deltaC);
    const double closed = second_harmonic_denominator(k0, aC, deltaC);
    EXPECT_NEAR(direct, closed, 1e-12 * std::max(1.0, std::abs(direct)));
  }
}
