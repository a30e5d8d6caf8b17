#pragma once

// JSON documents accepted by the CLI.
//
//   flux:       {"sigma1": s1, "sigma2": s2, "sigma3": s3, "tail": [c4, c5, ...]}
//   critical:   {"k0": 1, "aC": 1, "deltaC": 1, "kMax": 128, "flux": {...}}
//   stepper:    {"dt": 0.25, "scheme": "etdrk4"|"strangSplit", "dealias": "zeroPadDouble"|"twoThirds"}
//   run:        {"params": {"a", "delta"}, "flux": {...}, "grid": {"n"}, "stepper": {...},
//                "tEnd", "observers": {"stride"}, "k0", "init": {"rho", "noise"}}
//   experiment: critical fields plus "muList", "dns": {"n", "rho", "noise", "maxRelaxationTimes",
//                "stepper": {...}}, "outputs", "seed", "allowLargeMu", "tolerances": {...}

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>

#include "wavebif/dns.hpp"
#include "wavebif/harness.hpp"
#include "wavebif/model.hpp"
#include "wavebif/spectral.hpp"
#include "wavebif/tolerances.hpp"

namespace wavebif {

using nlohmann::json;

/// Rejected critical triple, with the failing report attached.
struct InadmissibleConfiguration : std::invalid_argument {
  AdmissibilityReport report;
  explicit InadmissibleConfiguration(AdmissibilityReport r)
      : std::invalid_argument(std::string("configuration is not admissible: condition (") +
                              to_string(r.first_violation()->which) + ") fails"),
        report(std::move(r)) {}
};

inline json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return json::parse(is);
}

inline FluxModel flux_from_json(const json& j) {
  const double s1 = j.value("sigma1", 0.0);
  const double s2 = j.value("sigma2", 0.0);
  const double s3 = j.value("sigma3", 0.0);
  if (j.contains("tail") && !j.at("tail").empty())
    return FluxModel::with_polynomial_tail(s1, s2, s3, j.at("tail").get<std::vector<double>>());
  return FluxModel(s1, s2, s3);
}

inline json flux_to_json(const FluxModel& f) {
  return {{"sigma1", f.sigma1()}, {"sigma2", f.sigma2()}, {"sigma3", f.sigma3()}, {"tail", f.tail_coefficients()}};
}

inline StepperConfig stepper_from_json(const json& j) {
  StepperConfig c;
  c.dt = j.value("dt", c.dt);
  if (j.contains("scheme")) c.scheme = parse_scheme(j.at("scheme").get<std::string>());
  if (j.contains("dealias")) c.dealias = parse_dealias(j.at("dealias").get<std::string>());
  return c;
}

inline Tolerances tolerances_from_file(const std::string& path) { return load_json(path).get<Tolerances>(); }

struct CriticalInput {
  int k0 = 1;
  double aC = 0.0;
  double deltaC = 0.0;
  int kMax = 128;
  FluxModel flux;
};

inline CriticalInput critical_from_json(const json& j) {
  CriticalInput c;
  c.k0 = j.at("k0").get<int>();
  c.aC = j.at("aC").get<double>();
  c.deltaC = j.at("deltaC").get<double>();
  c.kMax = j.value("kMax", c.kMax);
  c.flux = flux_from_json(j.at("flux"));
  return c;
}

/// Parses and certifies; throws InadmissibleConfiguration on rejection.
inline CriticalConfiguration admissible_from_json(const json& j, const Tolerances& tol = {}) {
  const auto in = critical_from_json(j);
  auto rep = check_admissible(in.k0, in.aC, in.deltaC, in.flux, in.kMax, tol);
  if (!rep.admissible()) throw InadmissibleConfiguration(std::move(rep));
  return *rep.config;
}

inline json report_to_json(const AdmissibilityReport& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"condition", to_string(c.which)}, {"passed", c.passed}, {"value", c.value}, {"witness", c.witness}});
  json out{{"admissible", rep.admissible()}, {"checks", checks}, {"gap", rep.gap}};
  if (const auto* v = rep.first_violation()) out["firstViolation"] = to_string(v->which);
  return out;
}

struct RunConfig {
  double a = 0.0;
  double delta = 0.0;
  FluxModel flux;
  int n = 64;
  StepperConfig stepper;
  double tEnd = 0.0;
  int stride = 1;
  int k0 = 1;
  double rho = 1e-3;
  double noise = 0.0;
};

inline RunConfig run_from_json(const json& j) {
  RunConfig r;
  r.a = j.at("params").at("a").get<double>();
  r.delta = j.at("params").at("delta").get<double>();
  r.flux = flux_from_json(j.value("flux", json::object()));
  r.n = j.value("grid", json::object()).value("n", r.n);
  r.stepper = stepper_from_json(j.value("stepper", json::object()));
  r.tEnd = j.at("tEnd").get<double>();
  r.stride = j.value("observers", json::object()).value("stride", r.stride);
  r.k0 = j.value("k0", r.k0);
  const json init = j.value("init", json::object());
  r.rho = init.value("rho", r.rho);
  r.noise = init.value("noise", r.noise);
  return r;
}

inline Experiment experiment_from_json(const json& j, const Tolerances& baseTol = {}) {
  Tolerances tol = baseTol;
  if (j.contains("tolerances")) from_json(j.at("tolerances"), tol);
  const auto cfg = admissible_from_json(j, tol);
  Experiment e{cfg, flux_from_json(j.at("flux"))};
  e.tol = tol;
  e.muList = j.value("muList", std::vector<double>{});
  const json dns = j.value("dns", json::object());
  e.dns.n = dns.value("n", e.dns.n);
  e.dns.rho = dns.value("rho", e.dns.rho);
  e.dns.noise = dns.value("noise", e.dns.noise);
  e.dns.maxRelaxationTimes = dns.value("maxRelaxationTimes", e.dns.maxRelaxationTimes);
  e.dns.stepper = stepper_from_json(dns.value("stepper", json::object()));
  e.outputs = j.value("outputs", std::string{});
  e.seed = j.value("seed", std::uint64_t{0});
  e.allowLargeMu = j.value("allowLargeMu", false);
  return e;
}

}  // namespace wavebif
