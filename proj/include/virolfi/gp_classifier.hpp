#pragma once

#include <vector>

#include <Eigen/Dense>

namespace virolfi {

struct ClassifierHyper {
  double signal_var = 4.0;
  double length_scale = 0.3;  // shared across dimensions, box units
};

/// Latent GP with probit link and a Laplace approximation of the latent
/// posterior. Labels are +1 (valid simulation) and -1 (failure).
class GPClassifier {
 public:
  GPClassifier() = default;
  GPClassifier(int dim, ClassifierHyper hyper);

  /// Fits from scratch.
  void fit(const Eigen::MatrixXd& x, const std::vector<int>& labels);
  /// Fits with Newton started from `f_start` (e.g. a stored latent mode).
  void fit(const Eigen::MatrixXd& x, const std::vector<int>& labels, const Eigen::VectorXd& f_start);
  /// Appends one observation and refits, starting Newton from the previous
  /// latent mode.
  void add_point(const Eigen::VectorXd& x, int label);
  void set_hyper(const ClassifierHyper& hyper);

  /// Probability that a simulation at `q` succeeds: Phi(m / sqrt(1 + V)).
  double predict(const Eigen::Ref<const Eigen::VectorXd>& q) const;
  /// Latent predictive mean and variance at `q`.
  std::pair<double, double> predict_latent(const Eigen::Ref<const Eigen::VectorXd>& q) const;
  /// predict(q) >= 0.5, decided from the sign of the latent mean alone (O(n)).
  bool predicts_valid(const Eigen::Ref<const Eigen::VectorXd>& q) const;

  bool fitted() const { return x_.rows() > 0; }
  /// Only one class seen: the prediction is that class with certainty.
  bool is_constant() const { return constant_; }
  double log_evidence() const { return log_evidence_; }
  int newton_iterations() const { return newton_iterations_; }

  const ClassifierHyper& hyper() const { return hyper_; }
  const Eigen::MatrixXd& inputs() const { return x_; }
  const std::vector<int>& labels() const { return labels_; }
  const Eigen::VectorXd& latent_mode() const { return f_; }

 private:
  void refit(const Eigen::VectorXd& f_start);

  int dim_ = 0;
  ClassifierHyper hyper_;
  Eigen::MatrixXd x_;
  std::vector<int> labels_;
  bool constant_ = true;
  double constant_prob_ = 1.0;

  Eigen::MatrixXd k_;
  Eigen::VectorXd f_;
  Eigen::VectorXd dlp_;      // gradient of log p(y|f) at the mode
  Eigen::VectorXd sqrt_w_;
  Eigen::MatrixXd chol_b_;   // chol(I + sW K sW)
  double log_evidence_ = 0.0;
  int newton_iterations_ = 0;
};

struct ClassifierOptOutcome {
  ClassifierHyper hyper;
  double evidence_before = 0.0;
  double evidence_after = 0.0;
  bool improved = false;
};

/// Nelder-Mead on (log signal_var, log length_scale) maximizing the Laplace
/// evidence. The incumbent is kept unless the evidence improves.
ClassifierOptOutcome optimize_classifier_hyper(GPClassifier& clf, int max_evaluations = 40);

}  // namespace virolfi
