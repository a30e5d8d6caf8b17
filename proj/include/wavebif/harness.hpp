#pragma once

// Prediction-vs-simulation sweeps, the symmetry audit and diagram output.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavebif/amplitude.hpp"
#include "wavebif/dns.hpp"
#include "wavebif/reduction.hpp"
#include "wavebif/spectral.hpp"
#include "wavebif/tolerances.hpp"

namespace wavebif {

struct DnsSettings {
  StepperConfig stepper;
  int n = 64;
  double rho = 1e-3;    // initial |tau_hat(k0)|
  double noise = 1e-6;  // seeded noise amplitude in every resolved mode
  int stride = 0;       // observer stride for recorded series (0: none kept)
  double maxRelaxationTimes = 60.0;  // give up after this many 1/|aCoef mu|
};

struct Experiment {
  Experiment(CriticalConfiguration c, FluxModel f) : cfg(c), flux(std::move(f)) {}

  CriticalConfiguration cfg;
  FluxModel flux;
  std::vector<double> muList;
  DnsSettings dns;
  std::string outputs;
  std::uint64_t seed = 0;
  Tolerances tol;
  bool allowLargeMu = false;  // lift the |mu| <= tol.muGuard regime guard

  void validate() const {
    if (!allowLargeMu)
      for (double mu : muList)
        if (std::abs(mu) > tol.muGuard)
          throw std::invalid_argument("Experiment: |mu| = " + std::to_string(std::abs(mu)) +
                                      " exceeds the perturbative guard; pass allowLargeMu to override");
  }
};

enum class RunOutcome { Converged, Decayed, Escaped, NotConverged, Blowup };

inline const char* to_string(RunOutcome o) {
  switch (o) {
    case RunOutcome::Converged: return "converged";
    case RunOutcome::Decayed: return "decayed";
    case RunOutcome::Escaped: return "escaped";
    case RunOutcome::NotConverged: return "notConverged";
    case RunOutcome::Blowup: return "blowup";
  }
  return "?";
}

struct ComparisonRow {
  double mu = 0.0;
  double rPredicted = 0.0;  // 0 off the branch side
  double rMeasured = std::numeric_limits<double>::quiet_NaN();
  double relError = std::numeric_limits<double>::quiet_NaN();
  double phaseDrift = std::numeric_limits<double>::quiet_NaN();
  double secondHarmonicPredicted = std::numeric_limits<double>::quiet_NaN();  // 2 |C| r^2
  double secondHarmonicMeasured = std::numeric_limits<double>::quiet_NaN();   // 2 |tau_hat(2 k0)|
  RunOutcome outcome = RunOutcome::NotConverged;
  // Bracketing runs around an unstable branch (subcritical side only).
  std::optional<RunOutcome> belowBranch;
  std::optional<RunOutcome> aboveBranch;
  double tFinal = 0.0;
  bool resolutionWarning = false;

  bool converged() const { return outcome == RunOutcome::Converged; }
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  double exponent = std::numeric_limits<double>::quiet_NaN();  // slope of log r vs log |mu|
  BifurcationVerdict verdict;
  AmplitudeEquation equation;
  double prefactorSign = 0.0;  // sign of 1 / ((a_c+1) k0^2 - delta_c)
  double bracketSign = 0.0;    // sign of the bracket alone
  double secondHarmonicC = 0.0;
  Experiment experiment;  // provenance

  explicit ComparisonReport(Experiment e) : experiment(std::move(e)) {}
};

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Wraps an angle difference to (-pi, pi].
inline double wrap_angle(double d) {
  d = std::remainder(d, 2.0 * std::numbers::pi);
  return d == -std::numbers::pi ? std::numbers::pi : d;
}

namespace detail {

/// Sweep parameters: delta varies, a stays at a_c, so mu = a_c (delta - delta_c).
inline NormalizedParameters sweep_parameters(const CriticalConfiguration& cfg, double mu) {
  return normalized(cfg.aC(), cfg.deltaC() + mu / cfg.aC());
}

/// Per-run seed derived from the experiment seed and the run index.
inline std::uint64_t run_seed(std::uint64_t seed, std::size_t index, std::uint64_t salt = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(salt)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

struct RunResult {
  RunOutcome outcome = RunOutcome::NotConverged;
  FieldState state;
  double phaseDrift = std::numeric_limits<double>::quiet_NaN();
  bool resolutionWarning = false;
};

/// Runs until |tau_hat(k0)| is quasi-steady: sampled every window/10, the
/// relative change against the sample one window earlier drops below tol.
/// Also stops on decay below `decayBelow` or growth above `escapeAbove`.
/// After convergence, continues for tol.phaseWindow to measure phase drift.
inline RunResult run_to_steady(Simulator& sim, FieldState s, int k0, double window, double tMax, double decayBelow,
                               double escapeAbove, const Tolerances& tol) {
  RunResult res;
  const double sampleEvery = window / 10.0;
  std::deque<double> samples;  // |tau_hat(k0)| at multiples of sampleEvery
  double nextSample = s.time;
  bool steady = false;
  bool decayed = false;
  bool escaped = false;
  auto stop = [&](const Observation& o) {
    if (o.absTauK0 > escapeAbove) return escaped = true;
    if (o.absTauK0 < decayBelow) return decayed = true;
    if (o.t + 1e-9 < nextSample) return false;
    nextSample += sampleEvery;
    samples.push_back(o.absTauK0);
    if (samples.size() > 11) samples.pop_front();
    if (samples.size() == 11) {
      const double now = samples.back();
      const double before = samples.front();
      if (now > 0.0 && std::abs(now - before) <= tol.quasiSteady * now) return steady = true;
    }
    return false;
  };
  try {
    auto ev = sim.evolve(std::move(s), tMax, {k0, 0}, stop);
    res.state = std::move(ev.state);
    res.resolutionWarning = ev.resolutionWarning;
  } catch (const NumericalBlowup&) {
    res.outcome = RunOutcome::Blowup;
    return res;
  }
  if (escaped) res.outcome = RunOutcome::Escaped;
  else if (decayed) res.outcome = RunOutcome::Decayed;
  else if (steady) res.outcome = RunOutcome::Converged;
  else res.outcome = RunOutcome::NotConverged;

  if (res.outcome == RunOutcome::Converged) {
    const double phase0 = std::arg(res.state.tau(k0));
    auto tail = sim.evolve(res.state, res.state.time + tol.phaseWindow, {k0, 0});
    res.state = std::move(tail.state);
    res.phaseDrift = std::abs(wrap_angle(std::arg(res.state.tau(k0)) - phase0));
  }
  return res;
}

inline ComparisonRow sweep_row(const Experiment& exp, const AmplitudeEquation& eq, const BifurcationVerdict& v,
                               double C, double mu, std::size_t index) {
  ComparisonRow row;
  row.mu = mu;
  const int k0 = exp.cfg.k0();
  const double rate = std::abs(eq.aCoef * mu);
  if (rate == 0.0) throw std::invalid_argument("run_bifurcation_sweep: mu = 0 has no relaxation scale");
  const double window = exp.tol.windowFactor / rate;
  const double tMax = exp.dns.maxRelaxationTimes / rate + window;
  const auto params = sweep_parameters(exp.cfg, mu);
  const bool branchSide = v.on_branch_side(mu);
  const double rBranch = branchSide ? v.predicted_amplitude(mu) : 0.0;
  row.rPredicted = (branchSide && v.branch == Stability::Stable) ? rBranch : 0.0;

  auto simulate = [&](FieldState init, double decayBelow, double escapeAbove) {
    Simulator sim(params, exp.flux, exp.dns.stepper, exp.dns.n, exp.tol);
    return run_to_steady(sim, std::move(init), k0, window, tMax, decayBelow, escapeAbove, exp.tol);
  };

  std::mt19937_64 rng(run_seed(exp.seed, index));
  const FieldState small = bifurcation_initial_data(exp.dns.n, k0, exp.dns.rho, exp.dns.noise, rng);
  const double escapeSmall = branchSide ? exp.tol.escapeFactor * rBranch : exp.tol.escapeFactor * 0.1;
  auto run = simulate(small, 1e-3 * exp.dns.noise, escapeSmall);
  row.outcome = run.outcome;
  row.tFinal = run.state.time;
  row.resolutionWarning = run.resolutionWarning;
  if (run.outcome == RunOutcome::Converged || run.outcome == RunOutcome::Decayed ||
      run.outcome == RunOutcome::NotConverged) {
    const double r1 = std::abs(run.state.tau(k0));
    row.rMeasured = r1;
    if (2 * k0 < exp.dns.n / 2) row.secondHarmonicMeasured = 2.0 * std::abs(run.state.tau(2 * k0));
  }
  if (run.outcome == RunOutcome::Converged) {
    row.phaseDrift = run.phaseDrift;
    if (row.rPredicted > 0.0) {
      row.relError = std::abs(row.rMeasured - row.rPredicted) / row.rPredicted;
      row.secondHarmonicPredicted = 2.0 * std::abs(C) * row.rPredicted * row.rPredicted;
    }
  }

  // An unstable branch is bracketed by two runs started on the kernel
  // direction just below and just above it.
  if (branchSide && v.branch == Stability::Unstable) {
    const auto basis = build_basis(exp.cfg);
    auto bracketRun = [&](double factor) {
      const double r0 = factor * rBranch;
      const FieldState init = reconstruct_center(cplx(r0, 0.0), basis, exp.dns.n);
      return simulate(init, 0.1 * r0, exp.tol.escapeFactor * rBranch).outcome;
    };
    row.belowBranch = bracketRun(1.0 - exp.tol.bracketFraction);
    row.aboveBranch = bracketRun(1.0 + exp.tol.bracketFraction);
  }
  return row;
}

}  // namespace detail

/// Runs one simulation per mu (concurrently) and compares the results with
/// the reduced prediction.
inline ComparisonReport run_bifurcation_sweep(const Experiment& exp) {
  exp.validate();
  if (exp.muList.empty()) throw std::invalid_argument("run_bifurcation_sweep: empty mu list");
  ComparisonReport rep(exp);
  rep.equation = amplitude_equation(exp.cfg, exp.flux);
  rep.verdict = classify_bifurcation(rep.equation, exp.tol.degenerate);
  rep.prefactorSign = rep.equation.prefactor > 0.0 ? 1.0 : -1.0;
  rep.bracketSign = rep.equation.bracket > 0.0 ? 1.0 : (rep.equation.bracket < 0.0 ? -1.0 : 0.0);
  rep.secondHarmonicC = second_order_correction(exp.cfg, exp.flux).C();

  std::vector<std::future<ComparisonRow>> jobs;
  for (std::size_t i = 0; i < exp.muList.size(); ++i)
    jobs.push_back(std::async(std::launch::async, [&, i] {
      return detail::sweep_row(exp, rep.equation, rep.verdict, rep.secondHarmonicC, exp.muList[i], i);
    }));
  for (auto& j : jobs) rep.rows.push_back(j.get());

  std::vector<double> xs, ys;
  for (const auto& r : rep.rows)
    if (r.converged() && r.rPredicted > 0.0) {
      xs.push_back(std::abs(r.mu));
      ys.push_back(r.rMeasured);
    }
  rep.exponent = loglog_slope(xs, ys);
  return rep;
}

struct AuditRow {
  std::string check;
  double value = 0.0;      // measured defect
  double tolerance = 0.0;
  bool expectViolation = false;  // negative control: passing means the defect was detected
  bool passed = false;
};

using AuditTable = std::vector<AuditRow>;

inline bool all_passed(const AuditTable& t) {
  return std::all_of(t.begin(), t.end(), [](const AuditRow& r) { return r.passed; });
}

/// Random band-limited state with coefficients of size `amp` in the lower
/// third of the spectrum.
inline FieldState random_state(int n, double amp, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  FieldState s(n);
  for (int k = 1; 3 * k < n; ++k) {
    s.set_tau(k, amp * cplx(U(rng), U(rng)) / static_cast<double>(k));
    s.set_u(k, amp * cplx(U(rng), U(rng)) / static_cast<double>(k));
  }
  return s;
}

/// u_t += c tau_x^2: shift equivariant but odd under the reflection.
inline ExtraTerm reflection_breaking_term(int n, double c) {
  auto fft = std::make_shared<RealFft>(2 * n);
  return [fft, n, c](std::span<const cplx> tauHat, std::span<cplx> inc) {
    std::vector<cplx> dtau(n / 2 + 1);
    for (int k = 1; k < n / 2; ++k) dtau[k] = cplx(0.0, k) * tauHat[k];
    std::vector<double> grid(2 * n);
    fft->to_grid(dtau, grid);
    for (double& g : grid) g = c * g * g;
    std::vector<cplx> coef(n / 2 + 1);
    fft->to_coefficients(grid, coef);
    for (int k = 1; k < n / 2; ++k) inc[k] += coef[k];
  };
}

/// Commutation of one step with the shift by one grid cell and with the
/// reflection; equivariance of the reduced vector field and of the
/// second-order correction; the reflection-breaking negative control; and
/// the phase audit (two runs to steady state, one from shifted data).
inline AuditTable run_symmetry_audit(const Experiment& exp) {
  exp.validate();
  AuditTable table;
  const auto& tol = exp.tol;
  const int n = exp.dns.n;
  const int k0 = exp.cfg.k0();
  const double mu = exp.muList.empty() ? 1e-2 : exp.muList.back();
  const auto params = detail::sweep_parameters(exp.cfg, mu);
  std::mt19937_64 rng(detail::run_seed(exp.seed, 0, 0xA0D17));
  const FieldState s = random_state(n, 0.1, rng);

  auto add = [&](std::string name, double value, double tolerance, bool expectViolation = false) {
    const bool within = value <= tolerance;
    table.push_back({std::move(name), value, tolerance, expectViolation, expectViolation ? !within : within});
  };

  {
    Simulator sim(params, exp.flux, exp.dns.stepper, n, tol);
    const double cell = 2.0 * std::numbers::pi / n;
    add("stepCommutesWithCellShift", max_difference(sim.step(shifted(s, cell)), shifted(sim.step(s), cell)),
        tol.equivariance);
    add("stepCommutesWithReflection", max_difference(sim.step(reflected(s)), reflected(sim.step(s))),
        tol.equivariance);
  }

  {
    const auto eq = amplitude_equation(exp.cfg, exp.flux);
    double shiftDefect = 0.0;
    double reflDefect = 0.0;
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int i = 0; i < 32; ++i) {
      const cplx A(0.1 * U(rng), 0.1 * U(rng));
      const double phi = std::numbers::pi * U(rng);
      const double m = 0.01 * U(rng);
      const cplx w = std::polar(1.0, phi);
      const cplx F = eq.field(A, std::conj(A), m);
      shiftDefect = std::max(shiftDefect, std::abs(eq.field(w * A, std::conj(w * A), m) - w * F));
      reflDefect = std::max(reflDefect, std::abs(eq.field(std::conj(A), A, m) - std::conj(F)));
    }
    add("reducedFieldShift", shiftDefect, tol.equivariance);
    add("reducedFieldReflection", reflDefect, tol.equivariance);

    const auto corr = second_order_correction(exp.cfg, exp.flux);
    const auto basis = build_basis(exp.cfg);
    double corrDefect = 0.0;
    double centerDefect = 0.0;
    for (int i = 0; i < 8; ++i) {
      const cplx A(0.1 * U(rng), 0.1 * U(rng));
      const double phi = std::numbers::pi * U(rng);
      const cplx w = std::polar(1.0, k0 * phi);
      corrDefect = std::max(corrDefect, max_difference(corr.reconstruct(w * A, n), shifted(corr.reconstruct(A, n), phi)));
      corrDefect = std::max(corrDefect, max_difference(corr.reconstruct(std::conj(A), n), reflected(corr.reconstruct(A, n))));
      centerDefect = std::max(centerDefect,
                              max_difference(reconstruct_center(std::conj(A), basis, n),
                                             reflected(reconstruct_center(A, basis, n))));
    }
    add("secondOrderCorrectionEquivariance", corrDefect, tol.equivariance);
    add("kernelReflection", centerDefect, tol.equivariance);
  }

  {
    Simulator broken(params, exp.flux, exp.dns.stepper, n, tol);
    broken.set_extra_term(reflection_breaking_term(n, 1.0));
    add("negativeControlReflectionBroken",
        max_difference(broken.step(reflected(s)), reflected(broken.step(s))), tol.equivariance, true);
  }

  {
    const auto eq = amplitude_equation(exp.cfg, exp.flux);
    const auto v = classify_bifurcation(eq, tol.degenerate);
    const double rate = std::abs(eq.aCoef * mu);
    const double phi = 0.3;
    std::mt19937_64 r2(detail::run_seed(exp.seed, 1, 0xA0D17));
    const FieldState init = bifurcation_initial_data(n, k0, exp.dns.rho, exp.dns.noise, r2);
    // Settle for a fixed time so both runs take the same number of steps.
    const double tEnd = exp.dns.maxRelaxationTimes / rate;
    double defect = std::numeric_limits<double>::infinity();
    try {
      Simulator a(params, exp.flux, exp.dns.stepper, n, tol);
      Simulator b(params, exp.flux, exp.dns.stepper, n, tol);
      const auto ra = a.evolve(init, tEnd, {k0, 0});
      const auto rb = b.evolve(shifted(init, phi), tEnd, {k0, 0});
      const double offset = std::arg(rb.state.tau(k0)) - std::arg(ra.state.tau(k0));
      const bool nontrivial = std::abs(ra.state.tau(k0)) > 10.0 * exp.dns.noise || !v.on_branch_side(mu);
      if (nontrivial) defect = std::abs(wrap_angle(offset - k0 * phi));
    } catch (const NumericalBlowup&) {
    }
    add("phaseOffsetEqualsShift", defect, tol.phaseAudit);
  }
  return table;
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

inline std::string report_csv(const ComparisonReport& rep) {
  std::ostringstream os;
  os << "mu,rPredicted,rMeasured,relError,phaseDrift,secondHarmonicPredicted,secondHarmonicMeasured,outcome,"
        "belowBranch,aboveBranch,tFinal\n";
  for (const auto& r : rep.rows) {
    os << format_double(r.mu) << ',' << format_double(r.rPredicted) << ',' << format_double(r.rMeasured) << ','
       << format_double(r.relError) << ',' << format_double(r.phaseDrift) << ','
       << format_double(r.secondHarmonicPredicted) << ',' << format_double(r.secondHarmonicMeasured) << ','
       << to_string(r.outcome) << ',' << (r.belowBranch ? to_string(*r.belowBranch) : "") << ','
       << (r.aboveBranch ? to_string(*r.aboveBranch) : "") << ',' << format_double(r.tFinal) << '\n';
  }
  return os.str();
}

/// mu-vs-r branch data at +-|mu| for every swept mu.
inline std::string branch_csv(const ComparisonReport& rep) {
  std::set<double> mus;
  for (const auto& r : rep.rows) {
    mus.insert(std::abs(r.mu));
    mus.insert(-std::abs(r.mu));
  }
  const auto& v = rep.verdict;
  std::ostringstream os;
  os << "mu,rTrivialStability,rBranch,rBranchStability\n";
  for (double mu : mus) {
    const Stability trivial = mu > 0.0 ? v.trivialForMuPositive : v.trivialForMuNegative;
    const bool has = v.on_branch_side(mu);
    os << format_double(mu) << ',' << to_string(trivial) << ',' << format_double(has ? v.predicted_amplitude(mu) : 0.0)
       << ',' << (has ? to_string(v.branch) : "none") << '\n';
  }
  return os.str();
}

inline nlohmann::json provenance_json(const ComparisonReport& rep) {
  nlohmann::json j;
  const auto& e = rep.experiment;
  j["config"] = {{"k0", e.cfg.k0()}, {"aC", e.cfg.aC()}, {"deltaC", e.cfg.deltaC()},
                 {"sigma1", e.cfg.sigma1()}, {"kMax", e.cfg.kMax()}};
  j["flux"] = {{"sigma1", e.flux.sigma1()}, {"sigma2", e.flux.sigma2()}, {"sigma3", e.flux.sigma3()},
               {"tail", e.flux.tail_coefficients()}};
  j["dns"] = {{"n", e.dns.n},
              {"dt", e.dns.stepper.dt},
              {"scheme", to_string(e.dns.stepper.scheme)},
              {"dealias", to_string(e.dns.stepper.dealias)},
              {"rho", e.dns.rho},
              {"noise", e.dns.noise},
              {"maxRelaxationTimes", e.dns.maxRelaxationTimes}};
  j["muList"] = e.muList;
  j["seed"] = e.seed;
  j["tolerances"] = e.tol;
  j["verdict"] = {{"kind", to_string(rep.verdict.kind)},
                  {"bifurcatingSide", to_string(rep.verdict.bifurcatingSide)},
                  {"aCoef", rep.equation.aCoef},
                  {"bCoef", rep.equation.bCoef},
                  {"prefactorSign", rep.prefactorSign},
                  {"bracketSign", rep.bracketSign}};
  j["exponent"] = std::isfinite(rep.exponent) ? nlohmann::json(rep.exponent) : nlohmann::json(nullptr);
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    runs.push_back({{"mu", r.mu},
                    {"seed", detail::run_seed(e.seed, i)},
                    {"outcome", to_string(r.outcome)},
                    {"tFinal", r.tFinal},
                    {"resolutionWarning", r.resolutionWarning}});
  }
  j["runs"] = runs;
  return j;
}

/// Writes branch.csv, report.csv and runs.json into `dir`.
inline void emit_diagram(const ComparisonReport& rep, const std::filesystem::path& dir) {
  if (rep.rows.empty()) throw std::invalid_argument("emit_diagram: empty report");
  std::filesystem::create_directories(dir);
  write_text(dir / "branch.csv", branch_csv(rep));
  write_text(dir / "report.csv", report_csv(rep));
  write_text(dir / "runs.json", provenance_json(rep).dump(2) + "\n");
}

}  // namespace wavebif
