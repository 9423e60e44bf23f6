#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "virolfi/rng.hpp"

namespace virolfi {

inline constexpr std::size_t kNumParams = 6;

/// Coordinate order of the inferred parameters, matching the simulator input
/// order: gamma, beta, p, p_rna on log10 scale, then the two phase durations.
enum class Param : std::size_t { GammaLog10 = 0, BetaLog10, PLog10, PrnaLog10, TauE, TauI };

/// Short column name used in every exported table ("gamma", "beta", ...).
std::string_view param_name(std::size_t index);

/// The six inferred parameters in sampling scale (four log10, two hours).
struct ParamVector {
  double gamma_log10 = 0.0;
  double beta_log10 = 0.0;
  double p_log10 = 0.0;
  double prna_log10 = 0.0;
  double tau_e = 0.0;
  double tau_i = 0.0;

  double operator[](std::size_t i) const;
  double& operator[](std::size_t i);

  std::array<double, kNumParams> to_array() const;
  static ParamVector from_array(const std::array<double, kNumParams>& values);

  /// All entries finite and both durations strictly positive.
  bool is_valid() const;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

/// Linear-scale parameters consumed by the kinetics and assay simulators.
struct LinearParams {
  double gamma = 0.0;  // cell/[V]
  double beta = 0.0;   // ml/(cell h)
  double p = 0.0;      // [V]/(cell h)
  double p_rna = 0.0;  // vRNA/(cell h)
  double tau_e = 0.0;  // h
  double tau_i = 0.0;  // h
};

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
  bool contains(double x) const { return x >= lower && x <= upper; }
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by to_linear when p >= p_rna.
class ConstraintViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform box prior in sampling scale with the p < p_rna coupling.
///
/// `bounds` is the static box. When `adaptive_p_upper` is set, draws of p are
/// additionally capped by `p_upper_adaptive`, which only ever decreases (see
/// update_adaptive_bound) and by the p_rna coordinate of the same draw.
struct PriorSpec {
  std::array<Bounds, kNumParams> bounds{};
  bool adaptive_p_upper = true;
  double p_upper_adaptive = 0.0;

  static PriorSpec defaults();

  /// Current upper bound for p_log10 draws (never above the static upper).
  double p_upper() const;

  /// Throws ConfigError when any dimension has lower >= upper.
  void validate() const;

  /// Inside the static box and p_log10 < prna_log10.
  bool contains(const ParamVector& theta) const;

  /// Affine map of the static box onto [0,1]^6 and back.
  std::array<double, kNumParams> to_unit(const ParamVector& theta) const;
  ParamVector from_unit(const std::array<double, kNumParams>& unit) const;

  ParamVector center() const;
};

/// Model constants that are fixed during inference.
struct FixedConstants {
  int n_e = 60;                 // eclipse stages
  int n_i = 60;                 // infectious stages
  double c = 0.1;               // 1/h, infectious-virion clearance
  double c_rna = 0.01;          // 1/h, total-virion clearance
  double n_cells = 1.0e7;       // cells
  double s = 10.0;              // ml supernatant
  double v_inoc = 0.1;          // ml inoculum per assay well
  double v_vir = 5.236e-16;     // ml, single virion volume
  double moi_sc = 3.0;          // SIN per cell, single-cycle inoculation
  double sigma_sc_rna = 0.145;  // log10 noise, single-cycle RNA
  double sigma_mc_rna = 0.226;  // log10 noise, multiple-cycle RNA

  void validate() const;
};

ParamVector sample_prior(Rng& rng, const PriorSpec& prior);

/// Exponentiates the four log10 entries. Throws ConstraintViolation when the
/// result has p >= p_rna; the durations are passed through unchanged.
LinearParams to_linear(const ParamVector& theta);

/// Same arithmetic as to_linear without the p < p_rna check.
LinearParams to_linear_unchecked(const ParamVector& theta);

/// p_log10 upper bound becomes min(current upper, evidence_prna_min). A bound
/// that would fall below the p_log10 lower bound is clamped just above it.
PriorSpec update_adaptive_bound(const PriorSpec& prior, double evidence_prna_min);

/// Log density of the uniform prior restricted to p < p_rna (unnormalised for
/// the coupling): -sum(log width) inside, -inf outside.
double log_prior_density(const ParamVector& theta, const PriorSpec& prior);

}  // namespace virolfi
