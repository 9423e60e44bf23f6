#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>

#include "virolfi/model_params.hpp"
#include "virolfi/rng.hpp"

namespace virolfi {

inline constexpr std::size_t kPlateColumns = 8;

using DilutionExponents = std::array<int, kPlateColumns>;
using ColumnCounts = std::array<int, kPlateColumns>;

/// One endpoint-dilution plate: column j receives dilution 10^exponents[j],
/// every column has `replicates` wells, each well gets `v_inoc` ml.
struct PlateDesign {
  DilutionExponents dilution_exponents{};
  int replicates = 4;
  double v_inoc = 0.1;

  /// Throws ConfigError unless exponents strictly decrease and replicates >= 1.
  void validate() const;
};

/// Infected-well count per column.
struct EDOutcome {
  ColumnCounts counts{};
  friend bool operator==(const EDOutcome&, const EDOutcome&) = default;
};

struct ExtinctionResult {
  double p_ext = 1.0;
  double p_est = 0.0;
  bool converged = false;
  double residual = 0.0;
  int iterations = 0;

  /// Establishment probability indistinguishable from zero.
  bool no_establishment() const;
};

/// Fraction of virions that enter and infect a cell before being cleared:
/// gamma / (1 + c / (beta N / s)).
double infection_entry_probability(const LinearParams& params, const FixedConstants& constants);

/// Right-hand side of the single-virion extinction self-consistency equation,
/// F(q) = 1 - g + g (B (1 - q) / n_I + 1)^(-n_I), with burst size B = p tau_I.
double extinction_map(double q, const LinearParams& params, const FixedConstants& constants);

/// Solves q = F(q) by damped fixed-point iteration (lambda = 0.5) from q = 0.5.
/// Reports the smallest root in [0, 1); converged = false after 10,000
/// iterations without reaching the tolerance.
ExtinctionResult extinction_probability(const LinearParams& params, const FixedConstants& constants);

/// Measured SIN concentration -> actual infectious virion concentration.
double sin_to_iv(double c_measured, double p_est);
double iv_to_sin(double c_actual, double p_est);

struct PlateFailure {
  std::string reason;
};

using PlateResult = std::variant<EDOutcome, PlateFailure>;

/// Draws virions deposited per well from Binomial(v_inoc D_j / v_vir,
/// c_actual v_vir) and marks a well uninfected when r < p_ext^V0.
PlateResult simulate_plate(double c_actual, const PlateDesign& design, double p_ext, double v_vir, Rng& rng);

/// Binomial(n, p) draw for astronomically large n: exact for moderate n,
/// Poisson limit for rare hits, rounded normal approximation above.
std::int64_t sample_binomial_large(double n, double p, Rng& rng);

/// Probability that a single well at dilution 10^exponent becomes infected:
/// 1 - (1 - p_hit (1 - p_ext))^n_j.
double well_infection_probability(double c_actual, int dilution_exponent, double v_inoc, double v_vir, double p_ext);

}  // namespace virolfi
