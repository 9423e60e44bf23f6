#include "virolfi/gp.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "virolfi/logging.hpp"
#include "virolfi/optim.hpp"

namespace virolfi {
namespace {

constexpr std::array<double, 6> kJitterLadder = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// Cholesky of k + jitter*I, walking up the ladder (relative to signal_var).
bool factor_with_jitter(const Eigen::MatrixXd& k, double signal_var, Eigen::MatrixXd& chol, double& jitter) {
  for (double rel : kJitterLadder) {
    jitter = rel * signal_var;
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(kj);
    if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0) {
      chol = llt.matrixL();
      return true;
    }
  }
  return false;
}

// Solves (L L^T) z = b.
template <typename Rhs>
Eigen::MatrixXd chol_solve(const Eigen::MatrixXd& chol, const Rhs& b) {
  const auto lower = chol.triangularView<Eigen::Lower>();
  return lower.transpose().solve(lower.solve(b));
}

}  // namespace

Eigen::VectorXd KernelHyper::to_log() const {
  Eigen::VectorXd v(dim() + 2);
  v[0] = std::log(signal_var);
  v.segment(1, dim()) = length_scales.array().log();
  v[dim() + 1] = std::log(noise_var);
  return v;
}

KernelHyper KernelHyper::from_log(const Eigen::VectorXd& log_hyper) {
  if (log_hyper.size() < 3) throw std::invalid_argument("KernelHyper::from_log: need at least 3 entries");
  const Eigen::Index d = log_hyper.size() - 2;
  KernelHyper h;
  h.signal_var = std::exp(log_hyper[0]);
  h.length_scales = log_hyper.segment(1, d).array().exp();
  h.noise_var = std::exp(log_hyper[d + 1]);
  return h;
}

KernelHyper KernelHyper::isotropic(int dim, double signal_var, double length_scale, double noise_var) {
  KernelHyper h;
  h.signal_var = signal_var;
  h.length_scales = Eigen::VectorXd::Constant(dim, length_scale);
  h.noise_var = noise_var;
  return h;
}

void KernelHyper::validate() const {
  if (!(signal_var > 0.0) || !(noise_var > 0.0) || !std::isfinite(signal_var) || !std::isfinite(noise_var))
    throw std::invalid_argument("kernel hyperparameters must be positive and finite");
  if (length_scales.size() == 0 || !(length_scales.array() > 0.0).all() || !length_scales.allFinite())
    throw std::invalid_argument("length scales must be positive and finite");
}

double kernel(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
              const KernelHyper& hyper) {
  return hyper.signal_var * std::exp(-((a - b).array() / hyper.length_scales.array()).square().sum());
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& x, const KernelHyper& hyper) {
  const Eigen::Index n = x.rows();
  const Eigen::MatrixXd scaled = x.array().rowwise() / hyper.length_scales.transpose().array();
  const Eigen::VectorXd sq = scaled.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * scaled * scaled.transpose();
  d2.colwise() += sq;
  d2.rowwise() += sq.transpose();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double v = i == j ? hyper.signal_var : hyper.signal_var * std::exp(-std::max(0.0, d2(i, j)));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::VectorXd kernel_vector(const Eigen::MatrixXd& x, const Eigen::Ref<const Eigen::VectorXd>& q,
                              const KernelHyper& hyper) {
  const Eigen::ArrayXd inv_l = hyper.length_scales.array().inverse();
  Eigen::VectorXd k(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    k[i] = hyper.signal_var * std::exp(-((x.row(i).transpose() - q).array() * inv_l).square().sum());
  return k;
}

EvidenceEval evaluate_evidence(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const KernelHyper& hyper,
                               bool with_gradient) {
  EvidenceEval out;
  const Eigen::Index n = x.rows(), d = x.cols();
  const Eigen::MatrixXd kf = kernel_matrix(x, hyper);
  Eigen::MatrixXd k = kf;
  k.diagonal().array() += hyper.noise_var;
  Eigen::MatrixXd chol;
  double jitter = 0.0;
  if (!factor_with_jitter(k, hyper.signal_var, chol, jitter)) return out;

  const Eigen::VectorXd alpha = chol_solve(chol, y);
  out.value = -0.5 * y.dot(alpha) - chol.diagonal().array().log().sum() - 0.5 * static_cast<double>(n) * kLog2Pi;
  out.ok = std::isfinite(out.value);
  if (!with_gradient || !out.ok) return out;

  const Eigen::MatrixXd k_inv = chol_solve(chol, Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd w = alpha * alpha.transpose() - k_inv;

  out.gradient.resize(d + 2);
  const Eigen::MatrixXd wk = w.cwiseProduct(kf);
  out.gradient[0] = 0.5 * wk.sum();
  for (Eigen::Index j = 0; j < d; ++j) {
    const double l2 = hyper.length_scales[j] * hyper.length_scales[j];
    double acc = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) {
      for (Eigen::Index r = 0; r < n; ++r) {
        const double diff = x(r, j) - x(c, j);
        acc += wk(r, c) * diff * diff;
      }
    }
    out.gradient[1 + j] = acc / l2;  // 1/2 * sum W.*K.*(2 diff^2 / l^2)
  }
  out.gradient[d + 1] = 0.5 * hyper.noise_var * w.trace();
  out.ok = out.gradient.allFinite();
  return out;
}

GPRegressor::GPRegressor(KernelHyper hyper) : hyper_(std::move(hyper)) { hyper_.validate(); }

void GPRegressor::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw std::invalid_argument("GPRegressor::fit: input/target count mismatch");
  if (x.rows() > 0 && x.cols() != hyper_.dim()) throw std::invalid_argument("GPRegressor::fit: input dimension mismatch");
  x_ = x;
  y_ = y;
  factorize();
}

void GPRegressor::set_hyper(const KernelHyper& hyper) {
  hyper.validate();
  hyper_ = hyper;
  if (fitted()) factorize();
}

void GPRegressor::factorize() {
  if (!fitted()) {
    chol_.resize(0, 0);
    alpha_.resize(0);
    return;
  }
  Eigen::MatrixXd k = kernel_matrix(x_, hyper_);
  k.diagonal().array() += hyper_.noise_var;
  if (!factor_with_jitter(k, hyper_.signal_var, chol_, jitter_)) {
    std::ostringstream msg;
    msg << "GP covariance not positive definite even with jitter " << kJitterLadder.back() * hyper_.signal_var;
    throw FactorizationError(msg.str());
  }
  alpha_ = chol_solve(chol_, y_);
}

void GPRegressor::add_point(const Eigen::VectorXd& x, double y) {
  if (x.size() != hyper_.dim()) throw std::invalid_argument("GPRegressor::add_point: dimension mismatch");
  const Eigen::Index n = x_.rows();
  x_.conservativeResize(n + 1, hyper_.dim());
  x_.row(n) = x.transpose();
  y_.conservativeResize(n + 1);
  y_[n] = y;
  if (n == 0) {
    factorize();
    return;
  }
  const Eigen::VectorXd kvec = kernel_vector(x_.topRows(n), x, hyper_);
  const Eigen::VectorXd l = chol_.topLeftCorner(n, n).triangularView<Eigen::Lower>().solve(kvec);
  const double pivot = hyper_.signal_var + hyper_.noise_var + jitter_ - l.squaredNorm();
  if (!(pivot > 1e-12 * hyper_.signal_var)) {
    factorize();
    return;
  }
  chol_.conservativeResize(n + 1, n + 1);
  chol_.row(n).head(n) = l.transpose();
  chol_.col(n).head(n).setZero();
  chol_(n, n) = std::sqrt(pivot);
  alpha_ = chol_solve(chol_, y_);
}

PredictiveDist GPRegressor::predict(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  if (!fitted()) throw std::logic_error("GPRegressor::predict on an unfitted model");
  const Eigen::VectorXd kvec = kernel_vector(x_, q, hyper_);
  PredictiveDist p;
  p.mean = kvec.dot(alpha_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(kvec);
  p.latent_variance = std::max(0.0, hyper_.signal_var - v.squaredNorm());
  p.variance = p.latent_variance + hyper_.noise_var;
  return p;
}

double GPRegressor::predict_mean(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  if (!fitted()) throw std::logic_error("GPRegressor::predict_mean on an unfitted model");
  return kernel_vector(x_, q, hyper_).dot(alpha_);
}

double GPRegressor::log_marginal_likelihood() const {
  if (!fitted()) throw std::logic_error("log_marginal_likelihood on an unfitted model");
  return -0.5 * y_.dot(alpha_) - chol_.diagonal().array().log().sum() -
         0.5 * static_cast<double>(y_.size()) * kLog2Pi;
}

Eigen::VectorXd GPRegressor::log_marginal_likelihood_gradient() const {
  if (!fitted()) throw std::logic_error("log_marginal_likelihood_gradient on an unfitted model");
  EvidenceEval e = evaluate_evidence(x_, y_, hyper_, true);
  if (!e.ok) throw FactorizationError("evidence gradient unavailable");
  return e.gradient;
}

HyperBounds HyperBounds::defaults(int dim) {
  HyperBounds b;
  b.lower.resize(dim + 2);
  b.upper.resize(dim + 2);
  b.lower[0] = std::log(1e-4);
  b.upper[0] = std::log(1e4);
  b.lower.segment(1, dim).setConstant(std::log(1e-2));
  b.upper.segment(1, dim).setConstant(std::log(1e2));
  b.lower[dim + 1] = std::log(1e-8);
  b.upper[dim + 1] = std::log(1e2);
  return b;
}

HyperOptOutcome optimize_hyperparams(GPRegressor& model, int restarts, Rng& rng, const HyperBounds& bounds_in) {
  if (!model.fitted()) throw std::logic_error("optimize_hyperparams on an unfitted model");
  const int dim = model.hyper().dim();
  const HyperBounds bounds = bounds_in.lower.size() == 0 ? HyperBounds::defaults(dim) : bounds_in;
  const Eigen::MatrixXd& x = model.inputs();
  const Eigen::VectorXd& y = model.targets();

  HyperOptOutcome out;
  out.hyper = model.hyper();
  out.evidence_before = model.log_marginal_likelihood();
  out.evidence_after = out.evidence_before;

  const double var_y = std::max(1e-6, (y.array() - y.mean()).square().mean());
  auto objective = [&](const Eigen::VectorXd& log_h, Eigen::VectorXd& grad) {
    EvidenceEval e = evaluate_evidence(x, y, KernelHyper::from_log(log_h), true);
    if (!e.ok) {
      grad = Eigen::VectorXd::Zero(log_h.size());
      return std::numeric_limits<double>::infinity();
    }
    grad = -e.gradient;
    return -e.value;
  };

  double best = -out.evidence_before;
  Eigen::VectorXd best_x;
  for (int r = 0; r < std::max(1, restarts); ++r) {
    Eigen::VectorXd start(dim + 2);
    if (r == 0) {
      start = model.hyper().to_log();
    } else {
      start[0] = std::log(var_y) + rng.uniform(-1.0, 1.0) * std::log(10.0);
      for (int j = 0; j < dim; ++j) start[1 + j] = rng.uniform(std::log(0.05), std::log(2.0));
      start[dim + 1] = std::log(var_y) + rng.uniform(std::log(1e-4), 0.0);
    }
    start = start.cwiseMax(bounds.lower).cwiseMin(bounds.upper);
    OptimResult res = minimize_bfgs_box(objective, start, bounds.lower, bounds.upper);
    if (!std::isfinite(res.f)) {
      ++out.failed_restarts;
      continue;
    }
    if (res.f < best) {
      best = res.f;
      best_x = res.x;
    }
  }
  if (out.failed_restarts == std::max(1, restarts)) {
    log::warn("all hyperparameter restarts failed; keeping previous hyperparameters");
    return out;
  }
  if (best_x.size() > 0) {
    const KernelHyper candidate = KernelHyper::from_log(best_x);
    GPRegressor trial = model;
    try {
      trial.set_hyper(candidate);
    } catch (const FactorizationError&) {
      log::warn("optimized hyperparameters could not be factorized; keeping previous ones");
      return out;
    }
    if (trial.log_marginal_likelihood() >= out.evidence_before) {
      model = std::move(trial);
      out.hyper = candidate;
      out.evidence_after = model.log_marginal_likelihood();
      out.improved = true;
    }
  }
  return out;
}

}  // namespace virolfi
