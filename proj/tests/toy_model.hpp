#pragma once

#include <array>

#include "virolfi/bolfi.hpp"

namespace virolfi::testing {

// Cheap stand-in simulator: a noisy bowl in unit coordinates centred at
// `centre`, failing whenever the tauE coordinate exceeds `fail_above`.
inline DiscrepancyFn toy_simulator(std::array<double, kNumParams> centre, double fail_above) {
  return [=](const ParamVector& theta, std::uint64_t seed) {
    const PriorSpec prior = PriorSpec::defaults();
    const auto u = prior.to_unit(theta);
    Observation obs;
    if (u[4] > fail_above) {
      obs.breakdown = failed_discrepancy();
      obs.failure_stage = "extinction";
      obs.failure_detail = "toy";
      return obs;
    }
    double r2 = 0.0;
    for (std::size_t j = 0; j < kNumParams; ++j) r2 += (u[j] - centre[j]) * (u[j] - centre[j]);
    Rng rng(seed);
    const double d = 40.0 * r2 + 0.2 * rng.normal();
    obs.breakdown = combine_distances(d, 0.0, 0.0, 0.0);
    return obs;
  };
}

inline AcquisitionConfig small_config(int n_init, int n_evidence) {
  AcquisitionConfig cfg;
  cfg.n_init = n_init;
  cfg.n_evidence = n_evidence;
  cfg.acq_candidates = 200;
  cfg.acq_starts = 5;
  cfg.acq_budget = 600;
  cfg.threshold_starts = 50;
  cfg.threshold_local_evals = 30;
  return cfg;
}

inline constexpr std::array<double, kNumParams> kToyCentre{0.3, 0.4, 0.2, 0.6, 0.5, 0.5};

// 30 prior draws then 30 acquisitions on the toy bowl; failures above tauE unit 0.8.
inline const InferenceResult& toy_run() {
  static const InferenceResult r =
      run_bolfi(toy_simulator(kToyCentre, 0.8), PriorSpec::defaults(), small_config(30, 60), 17);
  return r;
}

}  // namespace virolfi::testing
