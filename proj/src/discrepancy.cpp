#include "virolfi/discrepancy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "virolfi/model_params.hpp"

namespace virolfi {

void DiscrepancyConfig::validate() const {
  if (!std::isfinite(mean)) throw ConfigError("discrepancy mean must be finite");
  if (!(scale > 0.0)) throw ConfigError("discrepancy scale must be positive");
  if (!(ed_normalizer > 0.0)) throw ConfigError("ED normalizer must be positive");
}

double ed_l1(std::span<const EdRow> sim, std::span<const EdRow> obs, double normalizer) {
  if (sim.size() != obs.size()) throw std::invalid_argument("ed_l1: row count mismatch");
  long total = 0;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    if (sim[i].exponents != obs[i].exponents || std::abs(sim[i].time - obs[i].time) > 1e-9)
      throw std::invalid_argument("ed_l1: dilution schedule mismatch");
    for (std::size_t j = 0; j < kPlateColumns; ++j) total += std::abs(sim[i].counts[j] - obs[i].counts[j]);
  }
  return static_cast<double>(total) / normalizer;
}

double rna_log_euclid(std::span<const RnaPoint> sim, std::span<const RnaPoint> obs) {
  if (sim.size() != obs.size()) throw std::invalid_argument("rna_log_euclid: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    if (std::abs(sim[i].time - obs[i].time) > 1e-9) throw std::invalid_argument("rna_log_euclid: time mismatch");
    if (!(sim[i].value > 0.0) || !(obs[i].value > 0.0))
      throw std::domain_error("rna_log_euclid: RNA values must be positive");
    const double diff = std::log10(sim[i].value) - std::log10(obs[i].value);
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

DiscrepancyBreakdown combine_distances(double d1, double d2, double d3, double d4, const DiscrepancyConfig& cfg) {
  DiscrepancyBreakdown b;
  b.d1 = d1;
  b.d2 = d2;
  b.d3 = d3;
  b.d4 = d4;
  b.d13 = d1 + d3;
  b.d24 = d2 + d4;
  b.d = b.d13 + b.d24;
  b.d_norm = (b.d - cfg.mean) / cfg.scale;
  b.d_masked = b.d_norm;
  return b;
}

DiscrepancyBreakdown total_discrepancy(const Dataset& sim, const Dataset& obs, const DiscrepancyConfig& cfg) {
  return combine_distances(ed_l1(sim.mc_ed, obs.mc_ed, cfg.ed_normalizer), rna_log_euclid(sim.mc_rna, obs.mc_rna),
                           ed_l1(sim.sc_ed, obs.sc_ed, cfg.ed_normalizer), rna_log_euclid(sim.sc_rna, obs.sc_rna),
                           cfg);
}

DiscrepancyBreakdown total_discrepancy(const SimulationResult& sim, const Dataset& obs, const DiscrepancyConfig& cfg) {
  if (std::holds_alternative<SimFailure>(sim)) return failed_discrepancy();
  return total_discrepancy(std::get<SimulationOutput>(sim).data, obs, cfg);
}

DiscrepancyBreakdown failed_discrepancy() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  DiscrepancyBreakdown b{nan, nan, nan, nan, nan, nan, nan, nan, kFailureSentinel, true};
  return b;
}

}  // namespace virolfi
