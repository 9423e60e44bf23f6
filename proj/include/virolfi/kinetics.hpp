#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "virolfi/model_params.hpp"
#include "virolfi/rng.hpp"

namespace virolfi {

/// How the per-compartment transit rate relates to the phase duration.
///   PhaseMean: each of the n stages exits at n/tau, so the whole phase is
///              Erlang with mean tau and sd tau/sqrt(n).
///   PerStage:  each stage exits at 1/tau (phase mean n*tau).
enum class StageRateMode { PhaseMean, PerStage };

/// Target cells, eclipse and infectious stage chains, infectious virions and
/// total viral RNA (all absolute amounts in the supernatant, not per ml).
struct StateVector {
  double t_cells = 0.0;
  std::vector<double> eclipse;
  std::vector<double> infectious;
  double v = 0.0;
  double v_rna = 0.0;

  static StateVector zeros(int n_e, int n_i);

  std::size_t size() const { return eclipse.size() + infectious.size() + 3; }
  double cell_total() const;
  double infectious_total() const;

  /// Flat layout: [T, E_1..E_nE, I_1..I_nI, V, V_RNA].
  std::vector<double> flatten() const;
  static StateVector unflatten(std::span<const double> flat, int n_e, int n_i);
};

struct KineticsConfig {
  FixedConstants constants;
  double initial_v = 0.0;      // [IV] at t_start
  double initial_v_rna = 0.0;  // vRNA at t_start
  double t_start = 0.0;        // h
  double t_end = 0.0;          // h
  std::vector<double> sample_times;
  bool rinse_at_zero = false;
  /// Fraction of V and V_RNA left in the well after the t = 0 rinse.
  double rinse_residual_fraction = 0.0;
  bool media_exchange = true;
  double media_exchange_fraction = 0.05;
  double max_step = 0.01;  // h
  /// Upper bound on step * (fastest linear rate in the system).
  double max_rate_step = 0.05;
  StageRateMode stage_rate_mode = StageRateMode::PhaseMean;

  /// Throws ConfigError on unordered or out-of-range sample times etc.
  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
};

struct IntegrationFailure {
  double time = 0.0;
  std::size_t state_index = 0;
  std::string reason;
};

using IntegrationResult = std::variant<Trajectory, IntegrationFailure>;

/// Right-hand side of the staged within-host kinetics.
StateVector derivatives(const StateVector& state, const LinearParams& params, const FixedConstants& constants,
                        StageRateMode mode = StageRateMode::PhaseMean);

/// Flat-layout right-hand side; `dydt` must have the same size as `y`.
void derivatives(std::span<const double> y, std::span<double> dydt, const LinearParams& params,
                 const FixedConstants& constants, StageRateMode mode = StageRateMode::PhaseMean);

/// Fixed-step classic RK4 that lands exactly on every event time (samples,
/// the t = 0 rinse, t_end). Sample states are recorded before that sample's
/// media exchange is applied.
IntegrationResult integrate(const KineticsConfig& config, const LinearParams& params);

/// Removes `fraction` of the supernatant and replaces it with fresh medium.
StateVector apply_media_exchange(StateVector state, double fraction);

/// 10^(log10(x) + eps) with eps ~ N(0, sigma^2) per entry.
std::vector<double> add_rna_noise(std::span<const double> values, double sigma, Rng& rng);

/// Deterministic core of add_rna_noise with the log10 offsets supplied.
std::vector<double> apply_log10_noise(std::span<const double> values, std::span<const double> offsets);

}  // namespace virolfi
