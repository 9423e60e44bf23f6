#pragma once

#include <span>

#include "virolfi/dataset.hpp"
#include "virolfi/experiment.hpp"

namespace virolfi {

/// Finite stand-in for the infinite discrepancy of a failed simulation.
inline constexpr double kFailureSentinel = 1e12;

struct DiscrepancyConfig {
  double mean = 20.0;
  double scale = 10.0;
  double ed_normalizer = 36.0;  // 3 replicate rows x 12 time steps

  void validate() const;
};

struct DiscrepancyBreakdown {
  double d1 = 0.0;  // MC ED
  double d2 = 0.0;  // MC RNA
  double d3 = 0.0;  // SC ED
  double d4 = 0.0;  // SC RNA
  double d13 = 0.0;
  double d24 = 0.0;
  double d = 0.0;
  double d_norm = 0.0;
  double d_masked = 0.0;
  bool failed = false;
};

/// Sum of absolute count differences over all rows and columns, divided by
/// `normalizer`. Throws std::invalid_argument on a schedule mismatch.
double ed_l1(std::span<const EdRow> sim, std::span<const EdRow> obs, double normalizer = 36.0);

/// Euclidean distance between log10 values, one coordinate per measurement.
double rna_log_euclid(std::span<const RnaPoint> sim, std::span<const RnaPoint> obs);

DiscrepancyBreakdown total_discrepancy(const Dataset& sim, const Dataset& obs, const DiscrepancyConfig& cfg = {});
DiscrepancyBreakdown total_discrepancy(const SimulationResult& sim, const Dataset& obs,
                                       const DiscrepancyConfig& cfg = {});

/// Breakdown of a failed simulation: every distance NaN, d_masked = sentinel.
DiscrepancyBreakdown failed_discrepancy();

/// Builds d13, d24, d, d_norm and d_masked from the four distances.
DiscrepancyBreakdown combine_distances(double d1, double d2, double d3, double d4, const DiscrepancyConfig& cfg = {});

}  // namespace virolfi
