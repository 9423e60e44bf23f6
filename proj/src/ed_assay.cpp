#include "virolfi/ed_assay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace virolfi {
namespace {

constexpr int kMaxIterations = 10000;
constexpr double kResidualTol = 1e-10;
constexpr double kErrorTol = 1e-13;
constexpr double kRoundingResidual = 4.0 * std::numeric_limits<double>::epsilon();
constexpr double kNoEstablishment = 1e-12;
constexpr double kDamping = 0.5;

// Derivative of extinction_map with respect to q.
double extinction_map_slope(double q, double g, double burst, int n_i) {
  const double base = burst * (1.0 - q) / n_i + 1.0;
  return g * burst * std::exp(-(n_i + 1.0) * std::log(base));
}

double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

void PlateDesign::validate() const {
  if (replicates < 1) throw ConfigError("plate design: replicates must be >= 1");
  if (!(v_inoc > 0.0)) throw ConfigError("plate design: inoculum volume must be positive");
  for (std::size_t j = 1; j < kPlateColumns; ++j) {
    if (!(dilution_exponents[j] < dilution_exponents[j - 1]))
      throw ConfigError("plate design: dilution exponents must strictly decrease across columns");
  }
  if (dilution_exponents[0] > 0) throw ConfigError("plate design: dilution factors must not exceed 1");
}

bool ExtinctionResult::no_establishment() const { return p_est <= kNoEstablishment; }

double infection_entry_probability(const LinearParams& params, const FixedConstants& constants) {
  const double entry_rate = params.beta * constants.n_cells / constants.s;
  if (!(entry_rate > 0.0)) return 0.0;
  return params.gamma / (1.0 + constants.c / entry_rate);
}

double extinction_map(double q, const LinearParams& params, const FixedConstants& constants) {
  const double g = infection_entry_probability(params, constants);
  const double burst = params.p * params.tau_i;
  const double n_i = static_cast<double>(constants.n_i);
  return 1.0 - g + g * std::exp(-n_i * std::log1p(burst * (1.0 - q) / n_i));
}

ExtinctionResult extinction_probability(const LinearParams& params, const FixedConstants& constants) {
  const double g = infection_entry_probability(params, constants);
  const double burst = params.p * params.tau_i;
  const int n_i = constants.n_i;
  auto mapped = [&](double q) { return clamp_unit(extinction_map(q, params, constants)); };
  auto damped = [&](double q) { return clamp_unit((1.0 - kDamping) * q + kDamping * mapped(q)); };

  ExtinctionResult result;
  // At most one offspring on average: the only root in [0, 1] is q = 1.
  if (g * burst <= 1.0) {
    result.p_ext = 1.0;
    result.p_est = 0.0;
    result.converged = true;
    return result;
  }
  double q = 0.5;
  for (int it = 1; it <= kMaxIterations; ++it) {
    const double f = mapped(q);
    const double residual = std::abs(f - q);
    const double slope = extinction_map_slope(q, g, burst, n_i);
    const double error = slope < 1.0 ? residual / (1.0 - slope) : residual;
    result.iterations = it;
    result.residual = residual;
    // A residual at rounding level cannot shrink further.
    if (residual < kResidualTol && (error < kErrorTol || residual <= kRoundingResidual)) {
      result.converged = true;
      break;
    }
    // Two damped steps, then an Aitken extrapolation kept only when it lands in
    // the attracting side of the interior root (slope < 1) and improves the
    // residual; this never jumps onto the repelling root at q = 1.
    const double q1 = damped(q);
    const double q2 = damped(q1);
    double next = q2;
    const double denom = q2 - 2.0 * q1 + q;
    if (std::abs(denom) > 1e-300) {
      const double qa = q - (q1 - q) * (q1 - q) / denom;
      if (qa >= 0.0 && qa < 1.0 && extinction_map_slope(qa, g, burst, n_i) < 1.0 &&
          std::abs(mapped(qa) - qa) < std::abs(mapped(q2) - q2))
        next = qa;
    }
    q = next;
  }
  result.p_ext = q;
  result.p_est = 1.0 - q;
  return result;
}

double sin_to_iv(double c_measured, double p_est) {
  if (!(p_est > 0.0)) throw std::domain_error("sin_to_iv: establishment probability must be positive");
  return c_measured / p_est;
}

double iv_to_sin(double c_actual, double p_est) { return c_actual * p_est; }

std::int64_t sample_binomial_large(double n, double p, Rng& rng) {
  if (!(n >= 1.0) || !(p > 0.0)) return 0;
  const double trials = std::floor(n);
  if (p >= 1.0) return static_cast<std::int64_t>(trials);
  const double mean = trials * p;
  if (p < 1e-6 && mean < 1e6) {
    std::poisson_distribution<std::int64_t> poisson(mean);
    const std::int64_t draw = poisson(rng);
    return static_cast<double>(draw) > trials ? static_cast<std::int64_t>(trials) : draw;
  }
  if (mean >= 1e6 || trials > 1e15) {
    const double draw = std::round(mean + std::sqrt(mean * (1.0 - p)) * rng.normal());
    return static_cast<std::int64_t>(std::clamp(draw, 0.0, std::min(trials, 9.0e18)));
  }
  std::binomial_distribution<std::int64_t> binomial(static_cast<std::int64_t>(trials), p);
  return binomial(rng);
}

double well_infection_probability(double c_actual, int dilution_exponent, double v_inoc, double v_vir, double p_ext) {
  const double n_j = v_inoc * std::pow(10.0, dilution_exponent) / v_vir;
  const double p_hit = c_actual * v_vir;
  return -std::expm1(n_j * std::log1p(-p_hit * (1.0 - p_ext)));
}

PlateResult simulate_plate(double c_actual, const PlateDesign& design, double p_ext, double v_vir, Rng& rng) {
  design.validate();
  if (!(c_actual >= 0.0) || !std::isfinite(c_actual)) return PlateFailure{"non-finite or negative concentration"};
  const double p_hit = c_actual * v_vir;
  if (p_hit > 1.0) {
    std::ostringstream msg;
    msg << "saturated concentration: " << c_actual << " IV/ml exceeds one virion per virion volume";
    return PlateFailure{msg.str()};
  }
  const double log_p_ext = p_ext > 0.0 ? std::log(p_ext) : -INFINITY;

  EDOutcome outcome;
  for (std::size_t j = 0; j < kPlateColumns; ++j) {
    const double n_j = design.v_inoc * std::pow(10.0, design.dilution_exponents[j]) / v_vir;
    int infected = 0;
    for (int w = 0; w < design.replicates; ++w) {
      const std::int64_t deposited = sample_binomial_large(n_j, p_hit, rng);
      const double r = rng.uniform();
      const double p_uninfected = deposited == 0 ? 1.0 : std::exp(static_cast<double>(deposited) * log_p_ext);
      if (!(r < p_uninfected)) ++infected;
    }
    outcome.counts[j] = infected;
  }
  return outcome;
}

}  // namespace virolfi
