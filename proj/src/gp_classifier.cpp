#include "virolfi/gp_classifier.hpp"

#include <cmath>
#include <stdexcept>

#include "virolfi/gp.hpp"
#include "virolfi/normal.hpp"
#include "virolfi/optim.hpp"

namespace virolfi {
namespace {

constexpr int kMaxNewton = 60;
constexpr double kNewtonTol = 1e-10;
constexpr double kJitter = 1e-8;

KernelHyper as_kernel(const ClassifierHyper& h, int dim) {
  return KernelHyper::isotropic(dim, h.signal_var, h.length_scale, 1.0);
}

struct Likelihood {
  Eigen::VectorXd log_p, dlp, w;
};

Likelihood probit(const Eigen::VectorXd& f, const std::vector<int>& y) {
  const Eigen::Index n = f.size();
  Likelihood l{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double yi = y[i];
    const double z = yi * f[i];
    const double r = normal_pdf_over_cdf(z);
    l.log_p[i] = log_normal_cdf(z);
    l.dlp[i] = yi * r;
    l.w[i] = r * r + z * r;
  }
  return l;
}

}  // namespace

GPClassifier::GPClassifier(int dim, ClassifierHyper hyper) : dim_(dim), hyper_(hyper) {
  if (dim < 1) throw std::invalid_argument("GPClassifier: dimension must be >= 1");
  if (!(hyper.signal_var > 0.0) || !(hyper.length_scale > 0.0))
    throw std::invalid_argument("GPClassifier: hyperparameters must be positive");
}

void GPClassifier::fit(const Eigen::MatrixXd& x, const std::vector<int>& labels) {
  fit(x, labels, Eigen::VectorXd::Zero(x.rows()));
}

void GPClassifier::fit(const Eigen::MatrixXd& x, const std::vector<int>& labels, const Eigen::VectorXd& f_start) {
  if (f_start.size() != x.rows()) throw std::invalid_argument("GPClassifier::fit: latent start size mismatch");
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw std::invalid_argument("GPClassifier::fit: size mismatch");
  if (x.rows() > 0 && x.cols() != dim_) throw std::invalid_argument("GPClassifier::fit: dimension mismatch");
  for (int y : labels)
    if (y != 1 && y != -1) throw std::invalid_argument("GPClassifier::fit: labels must be +1 or -1");
  x_ = x;
  labels_ = labels;
  refit(f_start);
}

void GPClassifier::add_point(const Eigen::VectorXd& x, int label) {
  if (x.size() != dim_) throw std::invalid_argument("GPClassifier::add_point: dimension mismatch");
  if (label != 1 && label != -1) throw std::invalid_argument("GPClassifier::add_point: label must be +1 or -1");
  const Eigen::Index n = x_.rows();
  x_.conservativeResize(n + 1, dim_);
  x_.row(n) = x.transpose();
  labels_.push_back(label);
  Eigen::VectorXd start = Eigen::VectorXd::Zero(n + 1);
  if (f_.size() == n) start.head(n) = f_;
  refit(start);
}

void GPClassifier::set_hyper(const ClassifierHyper& hyper) {
  if (!(hyper.signal_var > 0.0) || !(hyper.length_scale > 0.0))
    throw std::invalid_argument("GPClassifier: hyperparameters must be positive");
  hyper_ = hyper;
  if (fitted()) refit(f_.size() == x_.rows() ? f_ : Eigen::VectorXd::Zero(x_.rows()));
}

void GPClassifier::refit(const Eigen::VectorXd& f_start) {
  const Eigen::Index n = x_.rows();
  newton_iterations_ = 0;
  bool has_pos = false, has_neg = false;
  for (int y : labels_) (y > 0 ? has_pos : has_neg) = true;
  constant_ = !(has_pos && has_neg);
  if (constant_) {
    constant_prob_ = has_neg ? 0.0 : 1.0;
    f_ = Eigen::VectorXd::Zero(n);
    log_evidence_ = 0.0;
    return;
  }

  k_ = kernel_matrix(x_, as_kernel(hyper_, dim_));
  k_.diagonal().array() += kJitter * hyper_.signal_var;

  // a with K a = f_start, so the objective is consistent at the start point.
  Eigen::VectorXd f = f_start, a = Eigen::VectorXd::Zero(n);
  if (f.cwiseAbs().maxCoeff() > 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(k_);
    if (llt.info() == Eigen::Success) {
      a = llt.solve(f);
      f = k_ * a;
    } else {
      f.setZero();
    }
  }
  auto psi = [&](const Eigen::VectorXd& aa, const Eigen::VectorXd& ff) {
    return -0.5 * aa.dot(ff) + probit(ff, labels_).log_p.sum();
  };

  double obj = psi(a, f);
  for (int it = 0; it < kMaxNewton; ++it) {
    ++newton_iterations_;
    const Likelihood lik = probit(f, labels_);
    const Eigen::VectorXd sw = lik.w.array().sqrt();
    Eigen::MatrixXd b = sw.asDiagonal() * k_ * sw.asDiagonal();
    b.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(b);
    const Eigen::VectorXd bvec = lik.w.cwiseProduct(f) + lik.dlp;
    const Eigen::VectorXd a_new = bvec - sw.cwiseProduct(llt.solve(sw.cwiseProduct(k_ * bvec)));

    // Newton step with halving if the objective does not increase.
    const Eigen::VectorXd da = a_new - a;
    double step = 1.0, new_obj = obj;
    Eigen::VectorXd a_try, f_try;
    for (int ls = 0; ls < 20; ++ls) {
      a_try = a + step * da;
      f_try = k_ * a_try;
      new_obj = psi(a_try, f_try);
      if (new_obj >= obj - 1e-12 * std::abs(obj)) break;
      step *= 0.5;
    }
    if (new_obj < obj - 1e-12 * std::abs(obj)) break;
    const double change = new_obj - obj;
    a = a_try;
    f = f_try;
    obj = new_obj;
    if (std::abs(change) < kNewtonTol) break;
  }

  const Likelihood lik = probit(f, labels_);
  sqrt_w_ = lik.w.array().sqrt();
  Eigen::MatrixXd b = sqrt_w_.asDiagonal() * k_ * sqrt_w_.asDiagonal();
  b.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(b);
  chol_b_ = llt.matrixL();
  f_ = f;
  dlp_ = lik.dlp;
  log_evidence_ = -0.5 * a.dot(f) + lik.log_p.sum() - chol_b_.diagonal().array().log().sum();
}

std::pair<double, double> GPClassifier::predict_latent(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  if (!fitted()) throw std::logic_error("GPClassifier::predict on an unfitted model");
  if (constant_) return {constant_prob_ > 0.5 ? INFINITY : -INFINITY, 0.0};
  const Eigen::VectorXd ks = kernel_vector(x_, q, as_kernel(hyper_, dim_));
  const double mean = ks.dot(dlp_);
  const Eigen::VectorXd v = chol_b_.triangularView<Eigen::Lower>().solve(sqrt_w_.cwiseProduct(ks));
  const double var = std::max(0.0, hyper_.signal_var - v.squaredNorm());
  return {mean, var};
}

double GPClassifier::predict(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  if (!fitted()) throw std::logic_error("GPClassifier::predict on an unfitted model");
  if (constant_) return constant_prob_;
  const auto [mean, var] = predict_latent(q);
  return normal_cdf(mean / std::sqrt(1.0 + var));
}

bool GPClassifier::predicts_valid(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  if (!fitted()) throw std::logic_error("GPClassifier::predict on an unfitted model");
  if (constant_) return constant_prob_ >= 0.5;
  return kernel_vector(x_, q, as_kernel(hyper_, dim_)).dot(dlp_) >= 0.0;
}

ClassifierOptOutcome optimize_classifier_hyper(GPClassifier& clf, int max_evaluations) {
  ClassifierOptOutcome out;
  out.hyper = clf.hyper();
  out.evidence_before = clf.log_evidence();
  out.evidence_after = out.evidence_before;
  if (!clf.fitted() || clf.is_constant()) return out;

  Eigen::VectorXd lower(2), upper(2), x0(2);
  lower << std::log(1e-2), std::log(0.02);
  upper << std::log(1e3), std::log(5.0);
  x0 << std::log(clf.hyper().signal_var), std::log(clf.hyper().length_scale);
  x0 = x0.cwiseMax(lower).cwiseMin(upper);

  GPClassifier work = clf;
  auto objective = [&](const Eigen::VectorXd& v) {
    work.set_hyper({std::exp(v[0]), std::exp(v[1])});
    return -work.log_evidence();
  };
  NelderMeadOptions opts;
  opts.max_evaluations = max_evaluations;
  opts.initial_step = 0.5;
  opts.x_tolerance = 1e-3;
  opts.f_tolerance = 1e-6;
  const OptimResult res = nelder_mead(objective, x0, opts, lower, upper);

  const ClassifierHyper best{std::exp(res.x[0]), std::exp(res.x[1])};
  GPClassifier trial = clf;
  trial.set_hyper(best);
  if (std::isfinite(trial.log_evidence()) && trial.log_evidence() > out.evidence_before) {
    clf = std::move(trial);
    out.hyper = best;
    out.evidence_after = clf.log_evidence();
    out.improved = true;
  }
  return out;
}

}  // namespace virolfi
