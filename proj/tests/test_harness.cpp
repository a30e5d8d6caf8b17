#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "wavebif/harness.hpp"

using namespace wavebif;

namespace {

Experiment config_a(double sigma3, std::vector<double> mus, std::uint64_t seed = 7) {
  auto rep = check_admissible(1, 1.0, 1.0, FluxModel(), 64);
  Experiment e(*rep.config, FluxModel(0.0, 0.0, sigma3));
  e.muList = std::move(mus);
  e.seed = seed;
  return e;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("wavebif_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(LogLogSlope, ExactPowerLaw) {
  const std::vector<double> x{1e-3, 2e-3, 5e-3, 1e-2};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 0.5));
  EXPECT_NEAR(loglog_slope(x, y), 0.5, 1e-12);
  EXPECT_TRUE(std::isnan(loglog_slope({1.0}, {1.0})));
}

TEST(WrapAngle, Range) {
  EXPECT_NEAR(wrap_angle(2 * std::numbers::pi + 0.1), 0.1, 1e-15);
  EXPECT_NEAR(wrap_angle(-0.1 - 4 * std::numbers::pi), -0.1, 1e-14);
  EXPECT_DOUBLE_EQ(wrap_angle(-std::numbers::pi), std::numbers::pi);
}

TEST(Experiment, MuGuard) {
  auto e = config_a(2.0, {0.05, 0.2});
  EXPECT_THROW(e.validate(), std::invalid_argument);
  e.allowLargeMu = true;
  EXPECT_NO_THROW(e.validate());
  EXPECT_THROW(run_bifurcation_sweep(config_a(2.0, {})), std::invalid_argument);
}

TEST(Sweep, SupercriticalConvergesOnBranchAndDecaysOffIt) {
  const auto rep = run_bifurcation_sweep(config_a(2.0, {-0.05, 0.05, 0.1}));
  EXPECT_EQ(rep.verdict.kind, BifurcationKind::Supercritical);
  EXPECT_EQ(rep.prefactorSign, 1.0);
  EXPECT_EQ(rep.bracketSign, -1.0);
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_EQ(rep.rows[0].outcome, RunOutcome::Decayed);
  EXPECT_EQ(rep.rows[0].rPredicted, 0.0);
  for (int i : {1, 2}) {
    const auto& r = rep.rows[i];
    EXPECT_EQ(r.outcome, RunOutcome::Converged);
    EXPECT_NEAR(r.rPredicted, std::sqrt(r.mu), 1e-15);
    EXPECT_LT(r.relError, 0.1);
    EXPECT_LT(r.phaseDrift, 1e-4);
  }
  EXPECT_NEAR(rep.exponent, 0.5, 0.05);
}

TEST(Sweep, SubcriticalBracketsTheUnstableBranch) {
  const auto rep = run_bifurcation_sweep(config_a(-2.0, {-0.05, 0.05}));
  EXPECT_EQ(rep.verdict.kind, BifurcationKind::Subcritical);
  const auto& below = rep.rows[0];
  EXPECT_EQ(below.outcome, RunOutcome::Decayed);
  ASSERT_TRUE(below.belowBranch && below.aboveBranch);
  EXPECT_EQ(*below.belowBranch, RunOutcome::Decayed);
  EXPECT_TRUE(*below.aboveBranch == RunOutcome::Escaped || *below.aboveBranch == RunOutcome::Blowup);
  const auto& above = rep.rows[1];
  EXPECT_TRUE(above.outcome == RunOutcome::Escaped || above.outcome == RunOutcome::Blowup);
  EXPECT_FALSE(above.belowBranch.has_value());
}

TEST(Audit, ConfigAPassesAndNegativeControlIsDetected) {
  const auto table = run_symmetry_audit(config_a(2.0, {0.05}));
  EXPECT_TRUE(all_passed(table));
  bool sawControl = false;
  for (const auto& r : table) {
    EXPECT_TRUE(r.passed) << r.check << " = " << r.value;
    if (r.expectViolation) {
      sawControl = true;
      EXPECT_GT(r.value, r.tolerance);
    }
  }
  EXPECT_TRUE(sawControl);
}

TEST(Audit, BrokenTermFailsReflectionButNotShift) {
  const int n = 32;
  Simulator sim(normalized(1.0, 1.01), FluxModel(0, 0, 2), {}, n);
  sim.set_extra_term(reflection_breaking_term(n, 1.0));
  std::mt19937_64 rng(3);
  const auto s = random_state(n, 0.1, rng);
  const double cell = 2 * std::numbers::pi / n;
  EXPECT_LT(max_difference(sim.step(shifted(s, cell)), shifted(sim.step(s), cell)), 1e-10);
  EXPECT_GT(max_difference(sim.step(reflected(s)), reflected(sim.step(s))), 1e-6);
}

TEST(Diagram, BranchRowsOnlyOnBifurcatingSide) {
  const auto rep = run_bifurcation_sweep(config_a(2.0, {0.05, 0.1}));
  const auto dir = scratch("branch");
  emit_diagram(rep, dir);
  std::istringstream csv(slurp(dir / "branch.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "mu,rTrivialStability,rBranch,rBranchStability");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    const double mu = std::stod(line.substr(0, line.find(',')));
    if (mu > 0) {
      EXPECT_NE(line.find(",unstable,"), std::string::npos) << line;
      EXPECT_NE(line.find(",stable"), std::string::npos);
    } else {
      EXPECT_NE(line.find(",stable,0,none"), std::string::npos) << line;
    }
  }
  EXPECT_EQ(rows, 4);
  const auto runs = nlohmann::json::parse(slurp(dir / "runs.json"));
  EXPECT_EQ(runs["seed"], 7);
  EXPECT_EQ(runs["dns"]["n"], 64);
  EXPECT_EQ(runs["runs"].size(), 2u);
  EXPECT_TRUE(std::filesystem::exists(dir / "report.csv"));
}

TEST(Diagram, RerunIsByteIdentical) {
  const auto e = config_a(2.0, {0.05, 0.1}, 42);
  const auto d1 = scratch("det1"), d2 = scratch("det2");
  emit_diagram(run_bifurcation_sweep(e), d1);
  emit_diagram(run_bifurcation_sweep(e), d2);
  for (const char* f : {"branch.csv", "report.csv", "runs.json"}) EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
}

TEST(Diagram, EmptyReportAndUnwritableDirectory) {
  ComparisonReport empty(config_a(2.0, {}));
  EXPECT_THROW(emit_diagram(empty, scratch("empty")), std::invalid_argument);

  const auto rep = run_bifurcation_sweep(config_a(2.0, {0.1}));
  const auto blocker = scratch("blocker");
  std::ofstream(blocker) << "a regular file";
  EXPECT_THROW(emit_diagram(rep, blocker / "sub"), std::filesystem::filesystem_error);
  std::filesystem::remove(blocker);
}
