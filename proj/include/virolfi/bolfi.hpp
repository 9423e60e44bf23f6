#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "virolfi/discrepancy.hpp"
#include "virolfi/experiment.hpp"
#include "virolfi/gp.hpp"
#include "virolfi/gp_classifier.hpp"
#include "virolfi/model_params.hpp"
#include "virolfi/rng.hpp"

namespace virolfi {

struct AcquisitionConfig {
  int n_init = 100;
  int n_evidence = 1000;
  int t_update = 10;
  int hyper_restarts = 3;
  std::array<double, kNumParams> sigma_acq{0.05, 0.05, 0.05, 0.05, 0.05, 0.05};  // box units
  double eta_delta = 0.1;
  int acq_candidates = 500;  // quasi-random screening points
  int acq_starts = 20;       // local searches
  int acq_budget = 2000;     // surrogate evaluations per acquisition
  int threshold_starts = 1000;      // local refinements of the surrogate-mean minimum
  int threshold_local_evals = 60;   // simplex evaluations per refinement
  int min_successes = 10;

  void validate() const;
};

struct EvidenceEntry {
  int index = 0;  // attempt number, 0-based
  bool from_init = true;
  std::uint64_t seed = 0;  // simulator stream key
  ParamVector theta;
  bool failed = false;
  std::string failure_stage;
  std::string failure_detail;
  DiscrepancyBreakdown breakdown;
  double wall_seconds = 0.0;
};

struct EvidenceSet {
  std::vector<EvidenceEntry> entries;

  int size() const { return static_cast<int>(entries.size()); }
  int successes() const;
  int failures() const { return size() - successes(); }
};

/// GP regression on d_norm of successful runs plus a GP classifier on the
/// success/failure outcome of every run, both over unit-box coordinates.
class Surrogate {
 public:
  Surrogate() = default;
  explicit Surrogate(PriorSpec prior);

  Eigen::VectorXd to_unit(const ParamVector& theta) const;
  ParamVector from_unit(const Eigen::Ref<const Eigen::VectorXd>& u) const;

  /// Combined prediction: classifier-invalid points get the sentinel mean and
  /// zero variance.
  PredictiveDist predict(const ParamVector& theta) const;
  PredictiveDist predict_unit(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  double valid_prob_unit(const Eigen::Ref<const Eigen::VectorXd>& u) const;

  void add(const EvidenceEntry& entry);
  bool ready() const { return regressor.fitted(); }

  PriorSpec prior;
  GPRegressor regressor;
  GPClassifier classifier;
};

struct InferenceResult {
  Surrogate surrogate;
  double h = 0.0;
  EvidenceSet evidence;
  PriorSpec prior;
  AcquisitionConfig config;
};

class BolfiError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exploration weight 2 log(t^(d/2+2) pi^2 / (3 delta)).
double eta_squared(int t, int d, double delta);

/// LCB minimizer over the prior box followed by a Gaussian perturbation
/// (sigma_acq, clipped to the box). `t` is the number of completed attempts.
ParamVector acquire_next(const Surrogate& surrogate, const EvidenceSet& evidence, int t, const AcquisitionConfig& cfg,
                         Rng& rng);

/// Minimum of the classifier-masked surrogate mean over the evidence inputs
/// and `threshold_starts` short simplex descents from quasi-random points.
double compute_threshold(const Surrogate& surrogate, const EvidenceSet& evidence, const AcquisitionConfig& cfg,
                         Rng& rng);

/// Phi((h - mu) / sqrt(v + noise)); 0 in the classifier-invalid region.
double approx_likelihood(const InferenceResult& result, const ParamVector& theta);
double log_approx_likelihood(const InferenceResult& result, const ParamVector& theta);
double unnormalized_log_posterior(const InferenceResult& result, const ParamVector& theta);

/// Outcome of one simulator call as the engine sees it.
struct Observation {
  DiscrepancyBreakdown breakdown;
  std::string failure_stage;
  std::string failure_detail;
};

/// Simulator plus discrepancy; the second argument is the stream key.
using DiscrepancyFn = std::function<Observation(const ParamVector&, std::uint64_t)>;

DiscrepancyFn make_experiment_discrepancy(Dataset observed, ExperimentDesigns designs, DiscrepancyConfig cfg = {});

struct RunHooks {
  /// Called after each attempt has been incorporated (not for replayed ones).
  std::function<void(const EvidenceEntry&)> on_entry;
  /// Logged attempts to replay instead of acquiring and simulating.
  const std::vector<EvidenceEntry>* replay = nullptr;
};

/// Stream keys used by the engine, derived from the master seed.
enum class EngineStream : std::uint64_t { Prior = 1, Simulate = 2, Acquire = 3, Hyper = 4, Threshold = 5 };
std::uint64_t engine_seed(std::uint64_t master, EngineStream stream, std::uint64_t index);

/// Runs the acquisition loop to cfg.n_evidence attempts. Throws BolfiError
/// when fewer than cfg.min_successes initial simulations succeed.
InferenceResult run_bolfi(const DiscrepancyFn& simulate, const PriorSpec& prior, const AcquisitionConfig& cfg,
                          std::uint64_t seed, const RunHooks& hooks = {});

/// Rebuilds the surrogate from an evidence set exactly as run_bolfi would.
InferenceResult replay_evidence(const std::vector<EvidenceEntry>& entries, const PriorSpec& prior,
                                const AcquisitionConfig& cfg, std::uint64_t seed);

}  // namespace virolfi
