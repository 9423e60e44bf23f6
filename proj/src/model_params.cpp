#include "virolfi/model_params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "virolfi/logging.hpp"

namespace virolfi {
namespace {

constexpr std::array<std::string_view, kNumParams> kNames = {"gamma", "beta", "p", "prna", "tauE", "tauI"};

// Gap kept between the p_log10 lower bound and a collapsed adaptive upper bound.
constexpr double kAdaptiveFloorGap = 1e-9;

}  // namespace

std::string_view param_name(std::size_t index) {
  if (index >= kNumParams) throw std::out_of_range("param_name: index out of range");
  return kNames[index];
}

double ParamVector::operator[](std::size_t i) const {
  switch (i) {
    case 0: return gamma_log10;
    case 1: return beta_log10;
    case 2: return p_log10;
    case 3: return prna_log10;
    case 4: return tau_e;
    case 5: return tau_i;
    default: throw std::out_of_range("ParamVector index out of range");
  }
}

double& ParamVector::operator[](std::size_t i) {
  switch (i) {
    case 0: return gamma_log10;
    case 1: return beta_log10;
    case 2: return p_log10;
    case 3: return prna_log10;
    case 4: return tau_e;
    case 5: return tau_i;
    default: throw std::out_of_range("ParamVector index out of range");
  }
}

std::array<double, kNumParams> ParamVector::to_array() const {
  return {gamma_log10, beta_log10, p_log10, prna_log10, tau_e, tau_i};
}

ParamVector ParamVector::from_array(const std::array<double, kNumParams>& v) {
  return ParamVector{v[0], v[1], v[2], v[3], v[4], v[5]};
}

bool ParamVector::is_valid() const {
  for (double x : to_array()) {
    if (!std::isfinite(x)) return false;
  }
  return tau_e > 0.0 && tau_i > 0.0;
}

PriorSpec PriorSpec::defaults() {
  PriorSpec prior;
  prior.bounds[0] = {-1.0, 0.5};  // gamma
  prior.bounds[1] = {-8.0, -6.0};  // beta
  prior.bounds[2] = {0.5, 3.0};    // p
  prior.bounds[3] = {2.0, 4.8};    // p_rna
  prior.bounds[4] = {2.0, 15.0};   // tau_E
  prior.bounds[5] = {2.0, 55.0};   // tau_I
  prior.adaptive_p_upper = true;
  prior.p_upper_adaptive = prior.bounds[2].upper;
  return prior;
}

double PriorSpec::p_upper() const {
  const double static_upper = bounds[2].upper;
  if (!adaptive_p_upper) return static_upper;
  return std::min(static_upper, p_upper_adaptive);
}

void PriorSpec::validate() const {
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const auto& b = bounds[i];
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || !(b.lower < b.upper)) {
      std::ostringstream msg;
      msg << "prior bounds for " << param_name(i) << " are degenerate: [" << b.lower << ", " << b.upper << "]";
      throw ConfigError(msg.str());
    }
  }
  if (bounds[4].lower <= 0.0 || bounds[5].lower <= 0.0) throw ConfigError("duration priors must be positive");
}

bool PriorSpec::contains(const ParamVector& theta) const {
  for (std::size_t i = 0; i < kNumParams; ++i) {
    if (!std::isfinite(theta[i]) || !bounds[i].contains(theta[i])) return false;
  }
  return theta.p_log10 < theta.prna_log10;
}

std::array<double, kNumParams> PriorSpec::to_unit(const ParamVector& theta) const {
  std::array<double, kNumParams> u{};
  for (std::size_t i = 0; i < kNumParams; ++i) u[i] = (theta[i] - bounds[i].lower) / bounds[i].width();
  return u;
}

ParamVector PriorSpec::from_unit(const std::array<double, kNumParams>& unit) const {
  ParamVector theta;
  for (std::size_t i = 0; i < kNumParams; ++i) theta[i] = bounds[i].lower + unit[i] * bounds[i].width();
  return theta;
}

ParamVector PriorSpec::center() const {
  ParamVector theta;
  for (std::size_t i = 0; i < kNumParams; ++i) theta[i] = 0.5 * (bounds[i].lower + bounds[i].upper);
  return theta;
}

void FixedConstants::validate() const {
  if (n_e < 1 || n_i < 1) throw ConfigError("stage counts n_e and n_i must be >= 1");
  const std::array<std::pair<const char*, double>, 9> positive = {{{"c", c},
                                                                    {"c_rna", c_rna},
                                                                    {"n_cells", n_cells},
                                                                    {"s", s},
                                                                    {"v_inoc", v_inoc},
                                                                    {"v_vir", v_vir},
                                                                    {"moi_sc", moi_sc},
                                                                    {"sigma_sc_rna", sigma_sc_rna},
                                                                    {"sigma_mc_rna", sigma_mc_rna}}};
  for (const auto& [name, value] : positive) {
    if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError(std::string("constant ") + name + " must be positive");
  }
}

ParamVector sample_prior(Rng& rng, const PriorSpec& prior) {
  prior.validate();
  ParamVector theta;
  for (std::size_t i = 0; i < kNumParams; ++i) {
    if (i == static_cast<std::size_t>(Param::PLog10)) continue;
    theta[i] = rng.uniform(prior.bounds[i].lower, prior.bounds[i].upper);
  }
  // p is drawn below min(adaptive upper, p_rna of this draw).
  const Bounds& pb = prior.bounds[2];
  const double cap = std::min(prior.p_upper(), theta.prna_log10);
  if (cap <= pb.lower) {
    // Only reachable with custom bounds where p_rna can sit below p's range.
    for (int attempt = 0; attempt < 10000; ++attempt) {
      theta.prna_log10 = rng.uniform(prior.bounds[3].lower, prior.bounds[3].upper);
      if (std::min(prior.p_upper(), theta.prna_log10) > pb.lower) break;
    }
  }
  const double upper = std::min(prior.p_upper(), theta.prna_log10);
  if (upper <= pb.lower) throw ConfigError("prior admits no p_log10 below prna_log10");
  theta.p_log10 = rng.uniform(pb.lower, upper);
  return theta;
}

LinearParams to_linear_unchecked(const ParamVector& theta) {
  return LinearParams{std::pow(10.0, theta.gamma_log10), std::pow(10.0, theta.beta_log10),
                      std::pow(10.0, theta.p_log10),     std::pow(10.0, theta.prna_log10),
                      theta.tau_e,                       theta.tau_i};
}

LinearParams to_linear(const ParamVector& theta) {
  LinearParams lin = to_linear_unchecked(theta);
  if (!(lin.p < lin.p_rna)) {
    std::ostringstream msg;
    msg << "production-rate order violated: p = " << lin.p << " >= p_rna = " << lin.p_rna;
    throw ConstraintViolation(msg.str());
  }
  return lin;
}

PriorSpec update_adaptive_bound(const PriorSpec& prior, double evidence_prna_min) {
  if (!std::isfinite(evidence_prna_min)) throw std::invalid_argument("update_adaptive_bound: non-finite p_rna minimum");
  PriorSpec next = prior;
  double upper = std::min(prior.p_upper(), evidence_prna_min);
  const double floor = prior.bounds[2].lower + kAdaptiveFloorGap;
  if (upper < floor) {
    std::ostringstream msg;
    msg << "adaptive p_log10 upper bound " << upper << " fell below the lower bound; clamped to " << floor;
    log::warn(msg.str());
    upper = floor;
  }
  next.p_upper_adaptive = upper;
  return next;
}

double log_prior_density(const ParamVector& theta, const PriorSpec& prior) {
  if (!prior.contains(theta)) return -std::numeric_limits<double>::infinity();
  double lp = 0.0;
  for (const auto& b : prior.bounds) lp -= std::log(b.width());
  return lp;
}

}  // namespace virolfi
