#include "virolfi/bolfi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "virolfi/logging.hpp"
#include "virolfi/normal.hpp"
#include "virolfi/optim.hpp"

namespace virolfi {
namespace {

constexpr int kDim = static_cast<int>(kNumParams);
constexpr int kPerturbRetries = 20;
constexpr int kEvidenceStarts = 20;

KernelHyper initial_regression_hyper() { return KernelHyper::isotropic(kDim, 1.0, 0.5, 1e-2); }

Eigen::VectorXd unit_lower() { return Eigen::VectorXd::Zero(kDim); }
Eigen::VectorXd unit_upper() { return Eigen::VectorXd::Ones(kDim); }

// Cranley-Patterson rotated Halton point.
Eigen::VectorXd shifted_halton(std::uint64_t index, const Eigen::VectorXd& shift) {
  Eigen::VectorXd u = halton_point(index, kDim) + shift;
  for (int j = 0; j < kDim; ++j) u[j] -= std::floor(u[j]);
  return u;
}

Eigen::VectorXd random_shift(Rng& rng) {
  Eigen::VectorXd shift(kDim);
  for (int j = 0; j < kDim; ++j) shift[j] = rng.uniform();
  return shift;
}

// Surrogate mean with the classifier mask and the prior support applied.
double masked_mean(const Surrogate& s, const Eigen::VectorXd& u) {
  if (!s.prior.contains(s.from_unit(u))) return kFailureSentinel;
  if (s.classifier.fitted() && !s.classifier.predicts_valid(u)) return kFailureSentinel;
  return s.regressor.predict_mean(u);
}

struct Scored {
  double value;
  Eigen::VectorXd u;
};

// The `k` lowest finite scores, ascending.
std::vector<Scored> best_k(std::vector<Scored> pool, std::size_t k) {
  std::erase_if(pool, [](const Scored& s) { return !(s.value < kFailureSentinel); });
  k = std::min(k, pool.size());
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end(),
                    [](const Scored& a, const Scored& b) { return a.value < b.value; });
  pool.resize(k);
  return pool;
}

// Indices of successful entries ordered by d_norm.
std::vector<std::size_t> successes_by_discrepancy(const EvidenceSet& evidence) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < evidence.entries.size(); ++i)
    if (!evidence.entries[i].failed) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return evidence.entries[a].breakdown.d_norm < evidence.entries[b].breakdown.d_norm;
  });
  return idx;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void AcquisitionConfig::validate() const {
  if (n_init < 1) throw ConfigError("bolfi.n_init must be at least 1");
  if (!(n_init < n_evidence)) throw ConfigError("bolfi.n_init must be smaller than bolfi.n_evidence");
  if (t_update < 1) throw ConfigError("bolfi.t_update must be at least 1");
  if (hyper_restarts < 1) throw ConfigError("bolfi.hyper_restarts must be at least 1");
  for (double s : sigma_acq)
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("bolfi.sigma_acq entries must be positive");
  if (!(eta_delta > 0.0 && eta_delta < 1.0)) throw ConfigError("bolfi.eta_delta must lie in (0, 1)");
  if (acq_candidates < 1 || acq_starts < 1) throw ConfigError("acquisition candidate and start counts must be positive");
  if (acq_budget < acq_candidates + acq_starts) throw ConfigError("bolfi.acq_budget too small for the candidate set");
  if (threshold_starts < 0 || threshold_local_evals < 0) throw ConfigError("threshold settings must be non-negative");
  if (min_successes < 1) throw ConfigError("bolfi.min_successes must be at least 1");
}

int EvidenceSet::successes() const {
  return static_cast<int>(std::count_if(entries.begin(), entries.end(), [](const auto& e) { return !e.failed; }));
}

Surrogate::Surrogate(PriorSpec p)
    : prior(std::move(p)), regressor(initial_regression_hyper()), classifier(kDim, ClassifierHyper{}) {
  prior.validate();
}

Eigen::VectorXd Surrogate::to_unit(const ParamVector& theta) const {
  const auto u = prior.to_unit(theta);
  return Eigen::Map<const Eigen::VectorXd>(u.data(), kDim);
}

ParamVector Surrogate::from_unit(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  std::array<double, kNumParams> a{};
  for (int j = 0; j < kDim; ++j) a[j] = u[j];
  return prior.from_unit(a);
}

double Surrogate::valid_prob_unit(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  return classifier.fitted() ? classifier.predict(u) : 1.0;
}

PredictiveDist Surrogate::predict_unit(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  const double prob = valid_prob_unit(u);
  if (prob < 0.5) {
    PredictiveDist out;
    out.mean = kFailureSentinel;
    out.variance = 0.0;
    out.latent_variance = 0.0;
    out.valid_prob = prob;
    out.valid = false;
    return out;
  }
  PredictiveDist out = regressor.predict(u);
  out.valid_prob = prob;
  out.valid = true;
  return out;
}

PredictiveDist Surrogate::predict(const ParamVector& theta) const { return predict_unit(to_unit(theta)); }

void Surrogate::add(const EvidenceEntry& entry) {
  const Eigen::VectorXd u = to_unit(entry.theta);
  if (classifier.fitted())
    classifier.add_point(u, entry.failed ? -1 : 1);
  else
    classifier.fit(u.transpose(), {entry.failed ? -1 : 1});
  if (entry.failed) return;
  if (regressor.fitted())
    regressor.add_point(u, entry.breakdown.d_norm);
  else
    regressor.fit(u.transpose(), Eigen::VectorXd::Constant(1, entry.breakdown.d_norm));
}

double eta_squared(int t, int d, double delta) {
  const double tt = std::max(t, 1);
  return 2.0 * ((0.5 * d + 2.0) * std::log(tt) + std::log(std::numbers::pi * std::numbers::pi / (3.0 * delta)));
}

ParamVector acquire_next(const Surrogate& surrogate, const EvidenceSet& evidence, int t, const AcquisitionConfig& cfg,
                         Rng& rng) {
  if (!surrogate.regressor.fitted()) return sample_prior(rng, surrogate.prior);
  const double eta2 = eta_squared(t, kDim, cfg.eta_delta);
  auto lcb = [&](const Eigen::VectorXd& u) {
    if (!surrogate.prior.contains(surrogate.from_unit(u))) return kFailureSentinel;
    if (surrogate.classifier.fitted() && !surrogate.classifier.predicts_valid(u)) return kFailureSentinel;
    const PredictiveDist p = surrogate.regressor.predict(u);
    const double a = p.mean - std::sqrt(eta2 * p.latent_variance);
    return std::isfinite(a) ? a : kFailureSentinel;
  };

  const Eigen::VectorXd shift = random_shift(rng);
  std::vector<Scored> pool;
  pool.reserve(static_cast<std::size_t>(cfg.acq_candidates) + kEvidenceStarts);
  for (int i = 0; i < cfg.acq_candidates; ++i) {
    Eigen::VectorXd u = shifted_halton(static_cast<std::uint64_t>(i) + 1, shift);
    pool.push_back({lcb(u), std::move(u)});
  }
  const auto ranked = successes_by_discrepancy(evidence);
  for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(kEvidenceStarts); ++i) {
    Eigen::VectorXd u = surrogate.to_unit(evidence.entries[ranked[i]].theta);
    pool.push_back({lcb(u), std::move(u)});
  }

  auto starts = best_k(std::move(pool), static_cast<std::size_t>(cfg.acq_starts));
  Scored best{kFailureSentinel, Eigen::VectorXd()};
  if (!starts.empty()) {
    NelderMeadOptions nm;
    nm.max_evaluations = std::max(1, (cfg.acq_budget - cfg.acq_candidates) / static_cast<int>(starts.size()));
    nm.initial_step = 0.05;
    for (const auto& s : starts) {
      OptimResult r = nelder_mead(lcb, s.u, nm, unit_lower(), unit_upper());
      if (s.value < best.value) best = s;
      if (r.f < best.value) best = {r.f, r.x};
    }
  }
  if (!(best.value < kFailureSentinel)) {
    log::warn("acquisition found no valid point; drawing from the prior");
    return sample_prior(rng, surrogate.prior);
  }

  for (int attempt = 0; attempt < kPerturbRetries; ++attempt) {
    Eigen::VectorXd u = best.u;
    for (int j = 0; j < kDim; ++j) u[j] = std::clamp(u[j] + cfg.sigma_acq[j] * rng.normal(), 0.0, 1.0);
    const ParamVector theta = surrogate.from_unit(u);
    if (surrogate.prior.contains(theta)) return theta;
  }
  return surrogate.from_unit(best.u);
}

double compute_threshold(const Surrogate& surrogate, const EvidenceSet& evidence, const AcquisitionConfig& cfg,
                         Rng& rng) {
  if (!surrogate.regressor.fitted()) throw std::logic_error("compute_threshold on an unfitted surrogate");
  auto f = [&](const Eigen::VectorXd& u) { return masked_mean(surrogate, u); };

  double h = kFailureSentinel;
  const Eigen::VectorXd shift = random_shift(rng);
  NelderMeadOptions nm;
  nm.max_evaluations = cfg.threshold_local_evals;
  nm.initial_step = 0.05;
  for (int i = 0; i < cfg.threshold_starts; ++i) {
    const Eigen::VectorXd u = shifted_halton(static_cast<std::uint64_t>(i) + 1, shift);
    const double start = f(u);
    h = std::min(h, start);
    if (start < kFailureSentinel && cfg.threshold_local_evals > 0) h = std::min(h, nelder_mead(f, u, nm, unit_lower(), unit_upper()).f);
  }
  for (const auto& e : evidence.entries) h = std::min(h, f(surrogate.to_unit(e.theta)));
  if (!(h < kFailureSentinel)) throw BolfiError("surrogate mean is invalid everywhere; no likelihood threshold");
  return h;
}

double approx_likelihood(const InferenceResult& result, const ParamVector& theta) {
  const double lp = log_approx_likelihood(result, theta);
  return lp == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(lp);
}

double log_approx_likelihood(const InferenceResult& result, const ParamVector& theta) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (!theta.is_valid()) return kNegInf;
  const Surrogate& s = result.surrogate;
  const Eigen::VectorXd u = s.to_unit(theta);
  if (s.classifier.fitted() && !s.classifier.predicts_valid(u)) return kNegInf;
  const PredictiveDist p = s.regressor.predict(u);
  const double sd = std::sqrt(p.variance);
  if (!(sd > 0.0)) return p.mean <= result.h ? 0.0 : kNegInf;
  return log_normal_cdf((result.h - p.mean) / sd);
}

double unnormalized_log_posterior(const InferenceResult& result, const ParamVector& theta) {
  const double lp = log_prior_density(theta, result.prior);
  if (lp == -std::numeric_limits<double>::infinity()) return lp;
  return lp + log_approx_likelihood(result, theta);
}

DiscrepancyFn make_experiment_discrepancy(Dataset observed, ExperimentDesigns designs, DiscrepancyConfig cfg) {
  cfg.validate();
  return [observed = std::move(observed), designs = std::move(designs), cfg](const ParamVector& theta,
                                                                             std::uint64_t seed) {
    Rng rng(seed);
    const SimulationResult sim = simulate_experiments(theta, designs, rng);
    Observation obs;
    obs.breakdown = total_discrepancy(sim, observed, cfg);
    if (const auto* fail = std::get_if<SimFailure>(&sim)) {
      obs.failure_stage = std::string(failure_stage_name(fail->stage));
      obs.failure_detail = fail->detail;
    }
    return obs;
  };
}

std::uint64_t engine_seed(std::uint64_t master, EngineStream stream, std::uint64_t index) {
  return derive_seed(master, {static_cast<std::uint64_t>(stream), index});
}

namespace {

InferenceResult drive(const DiscrepancyFn& simulate, const PriorSpec& prior, const AcquisitionConfig& cfg,
                      std::uint64_t seed, const RunHooks& hooks, int attempts) {
  InferenceResult result;
  result.prior = prior;
  result.config = cfg;
  result.surrogate = Surrogate(prior);
  Surrogate& s = result.surrogate;
  EvidenceSet& ev = result.evidence;
  const HyperBounds bounds = HyperBounds::defaults(kDim);
  const std::size_t replayed = hooks.replay ? hooks.replay->size() : 0;

  for (int t = 0; t < attempts; ++t) {
    const auto ut = static_cast<std::uint64_t>(t);
    EvidenceEntry entry;
    if (static_cast<std::size_t>(t) < replayed) {
      entry = (*hooks.replay)[static_cast<std::size_t>(t)];
      if (entry.index != t) throw BolfiError("replayed run log is out of order at attempt " + std::to_string(t));
    } else {
      const auto start = std::chrono::steady_clock::now();
      entry.index = t;
      entry.from_init = t < cfg.n_init;
      if (entry.from_init) {
        Rng rng(engine_seed(seed, EngineStream::Prior, ut));
        entry.theta = sample_prior(rng, prior);
      } else {
        Rng rng(engine_seed(seed, EngineStream::Acquire, ut));
        entry.theta = acquire_next(s, ev, t, cfg, rng);
      }
      entry.seed = engine_seed(seed, EngineStream::Simulate, ut);
      Observation obs = simulate(entry.theta, entry.seed);
      entry.breakdown = obs.breakdown;
      entry.failed = obs.breakdown.failed || !std::isfinite(obs.breakdown.d_norm);
      if (entry.failed) {
        entry.breakdown.failed = true;
        entry.failure_stage = obs.failure_stage.empty() ? "unknown" : obs.failure_stage;
        entry.failure_detail = obs.failure_detail;
      }
      entry.wall_seconds = seconds_since(start);
    }

    s.add(entry);
    ev.entries.push_back(entry);

    const int done = t + 1;
    if (done == cfg.n_init && ev.successes() < cfg.min_successes) {
      throw BolfiError("only " + std::to_string(ev.successes()) + " of " + std::to_string(cfg.n_init) +
                       " initial simulations succeeded (need " + std::to_string(cfg.min_successes) + ")");
    }
    if (done >= cfg.n_init && done % cfg.t_update == 0) {
      if (s.regressor.size() >= 5) {
        Rng rng(engine_seed(seed, EngineStream::Hyper, ut));
        const HyperOptOutcome out = optimize_hyperparams(s.regressor, cfg.hyper_restarts, rng, bounds);
        log::debug("attempt " + std::to_string(done) + ": regression evidence " + std::to_string(out.evidence_after));
      }
      optimize_classifier_hyper(s.classifier);
    }
    if (static_cast<std::size_t>(t) >= replayed && hooks.on_entry) hooks.on_entry(entry);
    if (done % 50 == 0) {
      log::info("attempt " + std::to_string(done) + "/" + std::to_string(attempts) + ", " +
                std::to_string(ev.successes()) + " successful");
    }
  }

  Rng rng(engine_seed(seed, EngineStream::Threshold, 0));
  result.h = compute_threshold(s, ev, cfg, rng);
  return result;
}

}  // namespace

InferenceResult run_bolfi(const DiscrepancyFn& simulate, const PriorSpec& prior, const AcquisitionConfig& cfg,
                          std::uint64_t seed, const RunHooks& hooks) {
  cfg.validate();
  prior.validate();
  return drive(simulate, prior, cfg, seed, hooks, cfg.n_evidence);
}

InferenceResult replay_evidence(const std::vector<EvidenceEntry>& entries, const PriorSpec& prior,
                                const AcquisitionConfig& cfg, std::uint64_t seed) {
  if (entries.empty()) throw BolfiError("no evidence to replay");
  cfg.validate();
  prior.validate();
  RunHooks hooks;
  hooks.replay = &entries;
  auto no_sim = [](const ParamVector&, std::uint64_t) -> Observation {
    throw BolfiError("replay requested a new simulation");
  };
  return drive(no_sim, prior, cfg, seed, hooks, static_cast<int>(entries.size()));
}

}  // namespace virolfi
