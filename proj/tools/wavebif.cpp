#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "wavebif/wavebif.hpp"

namespace {

using namespace wavebif;

enum Exit { Ok = 0, Usage = 1, Rejected = 2, Numerical = 3 };

struct Globals {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string tolBlock;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Tolerances base_tolerances(const Globals& g) {
  return g.tolBlock.empty() ? Tolerances{} : tolerances_from_file(g.tolBlock);
}

json require_config(const Globals& g) {
  if (g.config.empty()) throw UsageError("--config is required for this subcommand");
  return load_json(g.config);
}

/// Writes to DIR/name when --out is given, to stdout otherwise.
void emit(const Globals& g, const std::string& name, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::create_directories(g.out);
  write_text(std::filesystem::path(g.out) / name, text);
}

std::string csv_line(std::initializer_list<double> values) {
  std::string line;
  bool first = true;
  for (double v : values) {
    if (!first) line += ',';
    line += format_double(v);
    first = false;
  }
  return line + '\n';
}

json complex_json(cplx z) { return {z.real(), z.imag()}; }

json vec_json(const Vec2& v) { return {complex_json(v(0)), complex_json(v(1))}; }

int cmd_spectrum(const Globals& g, double a, double delta, double sigma1, int kmax) {
  if (kmax < 1) throw UsageError("--kmax must be positive");
  const FluxModel f(sigma1, 0.0, 0.0);
  std::string out = "k,ReLambdaPlus,ImLambdaPlus,ReLambdaMinus,ImLambdaMinus\n";
  for (int k = 1; k <= kmax; ++k) {
    const auto r = dispersion_roots(k, a, delta, f);
    out += std::to_string(k) + ',' +
           csv_line({r.lambdaPlus.real(), r.lambdaPlus.imag(), r.lambdaMinus.real(), r.lambdaMinus.imag()});
  }
  emit(g, "spectrum.csv", out);
  return Ok;
}

int cmd_admissible(const Globals& g, int k0, double aC, double deltaC, double sigma1, std::optional<int> kmax) {
  const Tolerances tol = base_tolerances(g);
  const auto rep = check_admissible(k0, aC, deltaC, FluxModel(sigma1, 0.0, 0.0), kmax.value_or(tol.kMax), tol);
  emit(g, "admissible.json", report_to_json(rep).dump(2) + "\n");
  return rep.admissible() ? Ok : Rejected;
}

int cmd_reduce(const Globals& g) {
  const Tolerances tol = base_tolerances(g);
  const json j = require_config(g);
  const auto cfg = admissible_from_json(j, tol);
  const auto flux = flux_from_json(j.at("flux"));
  const auto basis = build_basis(cfg);
  const auto eq = amplitude_equation(cfg, flux);
  const auto corr = second_order_correction(cfg, flux);
  json out{{"kappa", complex_json(basis.kappa)},
           {"xi", {{"k", cfg.k0()}, {"vector", vec_json(basis.xiVec)}}},
           {"eta", {{"k", cfg.k0()}, {"vector", vec_json(basis.etaVec)}}},
           {"aCoef", eq.aCoef},
           {"bCoef", eq.bCoef},
           {"prefactor", eq.prefactor},
           {"bracket", eq.bracket},
           {"secondHarmonicC", corr.C()},
           {"mu", {{"nu1", eq.muNu1}, {"nu2", eq.muNu2}}}};
  if (std::abs(eq.bCoef) <= tol.degenerate) {
    out["verdict"] = {{"kind", "degenerate"}};
  } else {
    const auto v = classify_bifurcation(eq, tol.degenerate);
    out["verdict"] = {{"kind", to_string(v.kind)},
                      {"bifurcatingSide", to_string(v.bifurcatingSide)},
                      {"trivialForMuPositive", to_string(v.trivialForMuPositive)},
                      {"trivialForMuNegative", to_string(v.trivialForMuNegative)},
                      {"branch", to_string(v.branch)}};
  }
  emit(g, "reduce.json", out.dump(2) + "\n");
  return Ok;
}

int cmd_predict(const Globals& g, double mu, double theta, int points, bool secondHarmonic) {
  const Tolerances tol = base_tolerances(g);
  const json j = require_config(g);
  const auto cfg = admissible_from_json(j, tol);
  const auto flux = flux_from_json(j.at("flux"));
  const auto eq = amplitude_equation(cfg, flux);
  if (!classify_bifurcation(eq, tol.degenerate).on_branch_side(mu))
    throw UsageError("mu = " + format_double(mu) + " is not on the bifurcating side");
  int n = 16;
  while (n / 2 <= 2 * cfg.k0()) n *= 2;
  const auto wave = predicted_wave(eq, cfg, flux, mu, theta, n, secondHarmonic);
  const auto phys = to_physical(wave, std::max(points, n));
  std::string out = "x,tau,u\n";
  for (std::size_t i = 0; i < phys.x.size(); ++i) out += csv_line({phys.x[i], phys.tau[i], phys.u[i]});
  emit(g, "predict.csv", out);
  return Ok;
}

int cmd_amplitude(const Globals& g, double aCoef, double bCoef, double mu, double r0, double tEnd, double dt,
                  int stride) {
  const auto traj = integrate_radial(aCoef * mu, bCoef, r0, 0.0, tEnd, dt, stride);
  std::string out = "t,r,theta\n";
  for (const auto& p : traj) out += csv_line({p.t, p.r, p.theta});
  emit(g, "amplitude.csv", out);
  return Ok;
}

int cmd_simulate(const Globals& g, const std::string& checkpoint, const std::string& restart) {
  const json j = require_config(g);
  const auto run = run_from_json(j);
  const Tolerances tol = base_tolerances(g);
  FieldState s(run.n);
  if (!restart.empty()) {
    s = read_checkpoint(restart);
    if (s.n() != run.n) throw UsageError("restart checkpoint grid does not match grid.n");
  } else {
    std::mt19937_64 rng(g.seed.value_or(0));
    s = bifurcation_initial_data(run.n, run.k0, run.rho, run.noise, rng);
  }
  Simulator sim(normalized(run.a, run.delta), run.flux, run.stepper, run.n, tol);
  const auto res = sim.evolve(s, std::max(run.tEnd, s.time), {run.k0, run.stride});
  std::string out = "t,absTauK0,argTauK0,absTauK2,meanTau,meanU\n";
  for (const auto& o : res.records) out += csv_line({o.t, o.absTauK0, o.argTauK0, o.absTauK2, o.meanTau, o.meanU});
  emit(g, "simulate.csv", out);
  if (!checkpoint.empty()) write_checkpoint(checkpoint, res.state);
  if (res.resolutionWarning)
    std::cerr << "warning: energy above k = n/3 exceeds " << tol.resolutionWarning << " of the total\n";
  return Ok;
}

Experiment load_experiment(const Globals& g, bool allowLargeMu) {
  Experiment e = experiment_from_json(require_config(g), base_tolerances(g));
  if (g.seed) e.seed = *g.seed;
  if (allowLargeMu) e.allowLargeMu = true;
  return e;
}

/// Bounded behaviour is expected unless the trivial state is unstable and
/// no stable branch exists at this mu.
bool expects_bounded(const BifurcationVerdict& v, double mu) {
  if (v.kind == BifurcationKind::Supercritical) return true;
  return (mu > 0.0 ? v.trivialForMuPositive : v.trivialForMuNegative) == Stability::Stable;
}

int cmd_sweep(const Globals& g, bool allowLargeMu) {
  const Experiment e = load_experiment(g, allowLargeMu);
  const auto rep = run_bifurcation_sweep(e);
  const std::string dir = !g.out.empty() ? g.out : (!e.outputs.empty() ? e.outputs : std::string("."));
  emit_diagram(rep, dir);
  std::cout << report_csv(rep);
  bool failed = false;
  for (const auto& r : rep.rows)
    if (r.outcome == RunOutcome::NotConverged ||
        (expects_bounded(rep.verdict, r.mu) && r.outcome == RunOutcome::Blowup))
      failed = true;
  return failed ? Numerical : Ok;
}

int cmd_audit(const Globals& g, bool allowLargeMu) {
  const Experiment e = load_experiment(g, allowLargeMu);
  const auto table = run_symmetry_audit(e);
  std::string out = "check,value,tolerance,expectViolation,passed\n";
  for (const auto& r : table)
    out += r.check + ',' + format_double(r.value) + ',' + format_double(r.tolerance) + ',' +
           (r.expectViolation ? "true" : "false") + ',' + (r.passed ? "true" : "false") + '\n';
  emit(g, "audit.csv", out);
  return all_passed(table) ? Ok : Numerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bifurcation analysis and simulation of the viscous wave system"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "JSON configuration file");
  app.add_option("--out", g.out, "output directory (stdout when omitted)");
  auto* seedOpt = app.add_option("--seed", seed, "random seed");
  app.add_option("--tol-block", g.tolBlock, "JSON file overriding tolerances")->check(CLI::ExistingFile);

  double a = 0, delta = 0, sigma1 = 0;
  int kmax = 128;
  auto* spectrum = app.add_subcommand("spectrum", "dispersion roots per wavenumber as CSV");
  spectrum->add_option("--a", a)->required();
  spectrum->add_option("--delta", delta)->required();
  spectrum->add_option("--sigma1", sigma1)->required();
  spectrum->add_option("--kmax", kmax);

  int k0 = 1;
  double aC = 0, deltaC = 0;
  std::optional<int> admKmax;
  auto* admissible = app.add_subcommand("admissible", "admissibility verdict as JSON");
  admissible->add_option("--k0", k0)->required();
  admissible->add_option("--ac", aC)->required();
  admissible->add_option("--deltac", deltaC)->required();
  admissible->add_option("--sigma1", sigma1)->required();
  admissible->add_option("--kmax", admKmax);

  auto* reduce = app.add_subcommand("reduce", "reduction basis and cubic coefficients as JSON");

  double mu = 0, theta = 0;
  int points = 128;
  bool secondHarmonic = false;
  auto* predict = app.add_subcommand("predict", "predicted bifurcated profile as CSV");
  predict->add_option("--mu", mu)->required();
  predict->add_option("--theta", theta);
  predict->add_option("--points", points);
  predict->add_flag("--second-harmonic", secondHarmonic, "include the quadratic correction");

  double aCoef = 0, bCoef = 0, r0 = 0, tEnd = 0, dt = 1e-2;
  int stride = 1;
  auto* amplitude = app.add_subcommand("amplitude", "radial amplitude trajectory as CSV");
  amplitude->add_option("--aCoef", aCoef)->required();
  amplitude->add_option("--bCoef", bCoef)->required();
  amplitude->add_option("--mu", mu)->required();
  amplitude->add_option("--r0", r0)->required();
  amplitude->add_option("--tend", tEnd)->required();
  amplitude->add_option("--dt", dt);
  amplitude->add_option("--stride", stride);

  std::string checkpoint, restart;
  auto* simulate = app.add_subcommand("simulate", "direct simulation, observer series as CSV");
  simulate->add_option("--checkpoint", checkpoint, "write the final state here");
  simulate->add_option("--restart", restart, "start from this checkpoint")->check(CLI::ExistingFile);

  bool allowLargeMu = false;
  auto* sweep = app.add_subcommand("sweep", "bifurcation sweep; writes branch.csv, report.csv, runs.json");
  sweep->add_flag("--allow-large-mu", allowLargeMu, "lift the |mu| guard");
  auto* audit = app.add_subcommand("audit", "symmetry audit table as CSV");
  audit->add_flag("--allow-large-mu", allowLargeMu, "lift the |mu| guard");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return Usage;
  }
  if (seedOpt->count() > 0) g.seed = seed;

  try {
    if (*spectrum) return cmd_spectrum(g, a, delta, sigma1, kmax);
    if (*admissible) return cmd_admissible(g, k0, aC, deltaC, sigma1, admKmax);
    if (*reduce) return cmd_reduce(g);
    if (*predict) return cmd_predict(g, mu, theta, points, secondHarmonic);
    if (*amplitude) return cmd_amplitude(g, aCoef, bCoef, mu, r0, tEnd, dt, stride);
    if (*simulate) return cmd_simulate(g, checkpoint, restart);
    if (*sweep) return cmd_sweep(g, allowLargeMu);
    if (*audit) return cmd_audit(g, allowLargeMu);
  } catch (const InadmissibleConfiguration& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Rejected;
  } catch (const FiniteTimeBlowup& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Numerical;
  } catch (const NumericalBlowup& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Numerical;
  } catch (const DegenerateBifurcation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Numerical;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Usage;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed configuration: " << e.what() << '\n';
    return Usage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Numerical;
  }
  return Usage;
}
