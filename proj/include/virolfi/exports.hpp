#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "virolfi/bolfi.hpp"
#include "virolfi/config.hpp"
#include "virolfi/sampler.hpp"

namespace virolfi {

/// Surrogate state, threshold and the canonical run configuration as JSON.
void save_model(const std::filesystem::path& path, const InferenceResult& result, const RunConfig& cfg);

struct LoadedModel {
  InferenceResult result;  // evidence left empty; it lives in run_log.csv
  RunConfig config;
  int attempts = 0;
  int successes = 0;
};

/// Throws std::runtime_error on a missing or malformed file.
LoadedModel load_model(const std::filesystem::path& path);

struct SlicePoint {
  std::array<double, kNumParams> theta{};
  PredictiveDist pred;
  bool in_prior = false;
};

/// Default slice anchor: the successful evidence input with the lowest
/// masked surrogate mean.
ParamVector best_evidence_point(const InferenceResult& result);

/// `points` evenly spaced values over the prior range of `dim`, the other
/// coordinates held at `anchor`.
std::vector<SlicePoint> slice_1d(const InferenceResult& result, const ParamVector& anchor, std::size_t dim, int points);
/// Row-major grid (dim_a outer) of `points` x `points` values.
std::vector<SlicePoint> slice_2d(const InferenceResult& result, const ParamVector& anchor, std::size_t dim_a,
                                 std::size_t dim_b, int points);

/// Value of `dim` minimizing the surrogate mean over the valid, in-prior
/// points of a 1D slice; NaN when no such point exists.
double slice_minimizer(const std::vector<SlicePoint>& slice, std::size_t dim);

/// slices_1d.csv, slices_2d.csv and slices_1d.svg.
void write_slices(const std::filesystem::path& dir, const InferenceResult& result, const SliceConfig& cfg);

/// chain,iteration,<params> with every retained and burn-in draw.
void write_samples_csv(const std::filesystem::path& path, const PosteriorSamples& samples);
PosteriorSamples read_samples_csv(const std::filesystem::path& path);

/// One row per parameter: mean, median, quantiles, R-hat, ESS and the
/// 10^x back-transform of the four log10 parameters.
void write_summary_csv(const std::filesystem::path& path, const Diagnostics& diag);
std::string summary_table(const Diagnostics& diag);

void write_sampler_info(const std::filesystem::path& path, const PosteriorSamples& samples);

/// Simulates both experiments at `draws` evenly spaced posterior samples and
/// writes predictive_rna.csv, predictive_ed.csv and predictive.svg next to
/// the observed values.
void write_predictive(const std::filesystem::path& dir, const PosteriorSamples& samples, const RunConfig& cfg,
                      int draws, double burn_in_fraction);

}  // namespace virolfi
