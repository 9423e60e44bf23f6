#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "virolfi/rng.hpp"

namespace virolfi {

/// Squared-exponential ARD hyperparameters. Inputs live in the unit box, so
/// length scales are in box units.
struct KernelHyper {
  double signal_var = 1.0;
  Eigen::VectorXd length_scales;
  double noise_var = 1e-2;

  int dim() const { return static_cast<int>(length_scales.size()); }

  /// [log signal_var, log length_scales..., log noise_var].
  Eigen::VectorXd to_log() const;
  static KernelHyper from_log(const Eigen::VectorXd& log_hyper);
  static KernelHyper isotropic(int dim, double signal_var, double length_scale, double noise_var);

  void validate() const;
};

/// signal_var * exp(-sum_j (a_j - b_j)^2 / l_j^2).
double kernel(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
              const KernelHyper& hyper);

/// Gram matrix over the rows of `x` (noise-free).
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& x, const KernelHyper& hyper);
/// k(x_i, q) for every row i of `x`.
Eigen::VectorXd kernel_vector(const Eigen::MatrixXd& x, const Eigen::Ref<const Eigen::VectorXd>& q,
                              const KernelHyper& hyper);

struct PredictiveDist {
  double mean = 0.0;
  double variance = 0.0;         // latent variance plus observation noise
  double latent_variance = 0.0;  // k(q,q) - k^T K^-1 k
  double valid_prob = 1.0;
  bool valid = true;
};

class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Result of a stand-alone evidence evaluation.
struct EvidenceEval {
  double value = 0.0;
  Eigen::VectorXd gradient;  // w.r.t. KernelHyper::to_log()
  bool ok = false;
};

/// Log marginal likelihood -1/2 y^T a - sum log diag L - n/2 log 2pi and its
/// gradient w.r.t. the log-hyperparameters, 1/2 tr((a a^T - K^-1) dK).
EvidenceEval evaluate_evidence(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const KernelHyper& hyper,
                               bool with_gradient);

/// Zero-mean GP regression with a Cholesky factor of K + noise I (+ jitter).
class GPRegressor {
 public:
  GPRegressor() = default;
  explicit GPRegressor(KernelHyper hyper);

  /// Replaces the training data and refactorizes. Throws FactorizationError
  /// when even the largest jitter fails.
  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
  /// Appends one observation by extending the factor (falls back to a full
  /// refactorization when the new pivot is not safely positive).
  void add_point(const Eigen::VectorXd& x, double y);
  void set_hyper(const KernelHyper& hyper);

  bool fitted() const { return x_.rows() > 0; }
  int size() const { return static_cast<int>(x_.rows()); }

  PredictiveDist predict(const Eigen::Ref<const Eigen::VectorXd>& q) const;
  double predict_mean(const Eigen::Ref<const Eigen::VectorXd>& q) const;

  double log_marginal_likelihood() const;
  Eigen::VectorXd log_marginal_likelihood_gradient() const;

  const KernelHyper& hyper() const { return hyper_; }
  const Eigen::MatrixXd& inputs() const { return x_; }
  const Eigen::VectorXd& targets() const { return y_; }
  /// Absolute jitter currently added to the diagonal.
  double jitter() const { return jitter_; }

 private:
  void factorize();

  KernelHyper hyper_;
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  Eigen::MatrixXd chol_;  // lower triangle used
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

/// Box on the log-hyperparameters used by the optimizer.
struct HyperBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  static HyperBounds defaults(int dim);
};

struct HyperOptOutcome {
  KernelHyper hyper;
  double evidence_before = 0.0;
  double evidence_after = 0.0;
  bool improved = false;
  int failed_restarts = 0;
};

/// Multi-restart box-constrained BFGS on the log-hyperparameters. The first
/// restart starts at the incumbent; the rest are drawn from `rng`. The model
/// is only changed when the best restart does not lower the evidence.
HyperOptOutcome optimize_hyperparams(GPRegressor& model, int restarts, Rng& rng,
                                     const HyperBounds& bounds = HyperBounds{});

}  // namespace virolfi
