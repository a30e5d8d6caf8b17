#include <gtest/gtest.h>

#include "wavebif/config.hpp"

using namespace wavebif;

TEST(Config, FluxWithTail) {
  const auto f = flux_from_json(json::parse(R"({"sigma1": -1, "sigma2": 0.5, "tail": [2.0]})"));
  EXPECT_EQ(f.sigma1(), -1.0);
  EXPECT_EQ(f.sigma2(), 0.5);
  EXPECT_EQ(f.sigma3(), 0.0);
  EXPECT_DOUBLE_EQ(f.tail(0.5), 2.0 * 0.0625);
  EXPECT_EQ(flux_to_json(f)["tail"][0], 2.0);
}

TEST(Config, StepperDefaultsAndOverrides) {
  const auto d = stepper_from_json(json::object());
  EXPECT_EQ(d.dt, 0.25);
  EXPECT_EQ(d.scheme, Scheme::Etdrk4);
  EXPECT_EQ(d.dealias, Dealias::ZeroPadDouble);
  const auto s = stepper_from_json(json::parse(R"({"dt": 0.1, "scheme": "strangSplit", "dealias": "twoThirds"})"));
  EXPECT_EQ(s.scheme, Scheme::StrangSplit);
  EXPECT_EQ(s.dealias, Dealias::TwoThirds);
  EXPECT_THROW(stepper_from_json(json::parse(R"({"scheme": "euler"})")), std::invalid_argument);
}

TEST(Config, AdmissibleAndRejected) {
  const auto ok = admissible_from_json(json::parse(R"({"k0": 1, "aC": 1, "deltaC": 0, "flux": {"sigma1": -1}})"));
  EXPECT_EQ(ok.deltaC(), 0.0);
  try {
    admissible_from_json(json::parse(R"({"k0": 1, "aC": 1, "deltaC": 2, "flux": {"sigma1": 1}})"));
    FAIL() << "expected rejection";
  } catch (const InadmissibleConfiguration& e) {
    EXPECT_EQ(e.report.first_violation()->which, Condition::C);
    EXPECT_NE(std::string(e.what()).find("(c)"), std::string::npos);
  }
}

TEST(Config, ReportJson) {
  const auto rep = check_admissible(1, 1, 2, FluxModel(1, 0, 0), 32);
  const auto j = report_to_json(rep);
  EXPECT_FALSE(j["admissible"].get<bool>());
  EXPECT_EQ(j["firstViolation"], "c");
  EXPECT_EQ(j["checks"].size(), 6u);
}

TEST(Config, RunDocument) {
  const auto r = run_from_json(json::parse(R"({
    "params": {"a": 1, "delta": 1.01}, "flux": {"sigma3": 2}, "grid": {"n": 32},
    "stepper": {"dt": 0.5}, "tEnd": 10, "observers": {"stride": 4}, "init": {"rho": 0.01}})"));
  EXPECT_EQ(r.delta, 1.01);
  EXPECT_EQ(r.n, 32);
  EXPECT_EQ(r.stepper.dt, 0.5);
  EXPECT_EQ(r.stride, 4);
  EXPECT_EQ(r.rho, 0.01);
  EXPECT_EQ(r.noise, 0.0);
  EXPECT_THROW(run_from_json(json::parse(R"({"params": {"a": 1}})")), json::exception);
}

TEST(Config, ExperimentWithToleranceOverride) {
  const auto e = experiment_from_json(json::parse(R"({
    "k0": 1, "aC": 1, "deltaC": 1, "flux": {"sigma3": 2}, "muList": [0.01, 0.02],
    "seed": 5, "dns": {"n": 32, "stepper": {"dt": 0.5}}, "tolerances": {"muGuard": 0.5}})"));
  EXPECT_EQ(e.muList.size(), 2u);
  EXPECT_EQ(e.seed, 5u);
  EXPECT_EQ(e.dns.n, 32);
  EXPECT_EQ(e.dns.stepper.dt, 0.5);
  EXPECT_EQ(e.tol.muGuard, 0.5);
  EXPECT_EQ(e.tol.quasiSteady, Tolerances{}.quasiSteady);
}

TEST(Config, TolerancesRoundTrip) {
  Tolerances t;
  t.phaseDrift = 3e-5;
  t.kMax = 64;
  const json j = t;
  const auto back = j.get<Tolerances>();
  EXPECT_EQ(back.phaseDrift, 3e-5);
  EXPECT_EQ(back.kMax, 64);
}
