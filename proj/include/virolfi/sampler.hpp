#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "virolfi/bolfi.hpp"

namespace virolfi {

struct SamplerConfig {
  int chains = 4;
  int n = 25000;                  // draws per chain after adaptation
  double burn_in_fraction = 0.2;  // dropped before diagnostics
  double initial_scale = 0.05;    // proposal sd in box units
  int adapt_batch = 500;
  int adapt_max_batches = 40;
  double target_accept_low = 0.2;
  double target_accept_high = 0.4;
  // Pre-run rounds that estimate the proposal covariance; 0 keeps the
  // axis-aligned proposal. Skipped when adapt_max_batches is 0.
  int adapt_covariance_rounds = 2;
  int adapt_covariance_draws = 5000;
  int init_attempts = 100000;
  bool parallel_chains = true;

  void validate() const;
};

/// Log density on R^dim; -inf marks zero density.
using LogTarget = std::function<double(const Eigen::VectorXd&)>;

struct PosteriorSamples {
  std::vector<Eigen::MatrixXd> chains;  // n x dim each
  std::vector<double> acceptance_rates;
  std::vector<double> proposal_scales;  // frozen scale multiplier per chain
  std::vector<int> adaptation_batches;

  int dim() const { return chains.empty() ? 0 : static_cast<int>(chains.front().cols()); }
  int draws_per_chain() const { return chains.empty() ? 0 : static_cast<int>(chains.front().rows()); }
};

class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Random-walk Metropolis. Proposals are N(0, (scale * widths_j)^2) per
/// coordinate, so `widths` defines the box unit of every dimension. Each chain
/// first adapts its scale in batches until the acceptance rate falls inside
/// the target band, then runs `n` plain Metropolis steps with the scale frozen.
PosteriorSamples metropolis(const LogTarget& target, const std::vector<Eigen::VectorXd>& init,
                            const Eigen::VectorXd& widths, const SamplerConfig& cfg, std::uint64_t seed);

struct ParamSummary {
  double mean = 0.0;
  double sd = 0.0;
  double median = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  double rhat = 1.0;
  double ess = 0.0;
};

struct Diagnostics {
  std::vector<ParamSummary> params;
  int retained_per_chain = 0;
  int total_retained = 0;
  std::vector<std::string> warnings;
};

/// Split-chain R-hat, multi-chain autocorrelation ESS (Geyer initial
/// monotone sequence, capped at the draw count) and quantiles, computed after
/// dropping the first `burn_in_fraction` of every chain.
Diagnostics compute_diagnostics(const PosteriorSamples& samples, double burn_in_fraction = 0.2);

double split_rhat(const std::vector<Eigen::VectorXd>& chains);
double effective_sample_size(const std::vector<Eigen::VectorXd>& chains);
/// Linear-interpolation quantile (R type 7) of unsorted values.
double quantile(std::vector<double> values, double prob);

/// Prior draws that the classifier accepts and where the posterior is finite.
std::vector<ParamVector> posterior_init_points(const InferenceResult& result, int count, Rng& rng, int max_attempts);

/// Posterior sampling of a fitted surrogate: initial points, Metropolis in
/// prior-box units, and the target unnormalized_log_posterior.
PosteriorSamples sample_posterior(const InferenceResult& result, const SamplerConfig& cfg, std::uint64_t seed);

}  // namespace virolfi
