#pragma once

// Every numerical threshold used by the library, in one place. The CLI can
// override any subset from a JSON block (--tol-block).

#include <nlohmann/json.hpp>

namespace wavebif {

struct Tolerances {
  double equality = 1e-10;       // condition (a), zero-root checks
  double nonvanishing = 1e-8;    // conditions (b)-(d), a_c != 0
  double center = 1e-10;         // |Re lambda| below this is a center eigenvalue
  double resonance = 1e-10;      // |i omega - lambda| below this rejects a resolvent query
  double degenerate = 1e-12;     // |bCoef| below this has no cubic normal form
  double collision = 1e-8;       // Jordan-limit threshold for 2x2 exponentials (relative)
  int kMax = 128;                // admissibility scan range

  double quasiSteady = 1e-8;     // relative change of |tau_hat(k0)| over one window
  double windowFactor = 10.0;    // window = windowFactor / |a mu|
  double phaseDrift = 1e-4;      // stationarity tolerance, radians
  double phaseWindow = 100.0;    // time span for the drift measurement
  double muGuard = 0.1;          // perturbative regime |mu| <= muGuard
  double escapeFactor = 5.0;     // escape when |tau_hat(k0)| exceeds escapeFactor * branch radius
  double bracketFraction = 0.3;  // subcritical runs start at (1 -+ fraction) * branch radius
  double equivariance = 1e-10;   // shift / reflection commutation
  double phaseAudit = 1e-9;      // phase offset k0 * shift after a DNS run
  double resolutionWarning = 1e-10;  // energy fraction above n/3
};

inline void to_json(nlohmann::json& j, const Tolerances& t) {
  j = nlohmann::json{{"equality", t.equality},
                     {"nonvanishing", t.nonvanishing},
                     {"center", t.center},
                     {"resonance", t.resonance},
                     {"degenerate", t.degenerate},
                     {"collision", t.collision},
                     {"kMax", t.kMax},
                     {"quasiSteady", t.quasiSteady},
                     {"windowFactor", t.windowFactor},
                     {"phaseDrift", t.phaseDrift},
                     {"phaseWindow", t.phaseWindow},
                     {"muGuard", t.muGuard},
                     {"escapeFactor", t.escapeFactor},
                     {"bracketFraction", t.bracketFraction},
                     {"equivariance", t.equivariance},
                     {"phaseAudit", t.phaseAudit},
                     {"resolutionWarning", t.resolutionWarning}};
}

/// Missing keys keep their defaults.
inline void from_json(const nlohmann::json& j, Tolerances& t) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("equality", t.equality);
  get("nonvanishing", t.nonvanishing);
  get("center", t.center);
  get("resonance", t.resonance);
  get("degenerate", t.degenerate);
  get("collision", t.collision);
  get("kMax", t.kMax);
  get("quasiSteady", t.quasiSteady);
  get("windowFactor", t.windowFactor);
  get("phaseDrift", t.phaseDrift);
  get("phaseWindow", t.phaseWindow);
  get("muGuard", t.muGuard);
  get("escapeFactor", t.escapeFactor);
  get("bracketFraction", t.bracketFraction);
  get("equivariance", t.equivariance);
  get("phaseAudit", t.phaseAudit);
  get("resolutionWarning", t.resolutionWarning);
}

}  // namespace wavebif
