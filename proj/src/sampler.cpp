#include "virolfi/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <optional>

#include "virolfi/logging.hpp"

namespace virolfi {
namespace {

struct ChainOutput {
  Eigen::MatrixXd draws;
  double acceptance = 0.0;
  double scale = 0.0;
  int batches = 0;
};

class Walker {
 public:
  Walker(const LogTarget& target, Eigen::VectorXd x, const Eigen::VectorXd& widths, Rng& rng)
      : target_(target),
        x_(std::move(x)),
        widths_(widths),
        shape_(Eigen::MatrixXd::Identity(widths.size(), widths.size())),
        rng_(rng),
        lp_(target(x_)) {}

  bool step(double scale) {
    Eigen::VectorXd z(x_.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = rng_.normal();
    const Eigen::VectorXd y = x_ + scale * widths_.cwiseProduct(shape_ * z);
    const double u = rng_.uniform();
    const double lq = target_(y);
    if (lq == -std::numeric_limits<double>::infinity() || std::isnan(lq)) return false;
    if (std::log(u) < lq - lp_) {
      x_ = y;
      lp_ = lq;
      return true;
    }
    return false;
  }

  // Lower-triangular factor of the proposal covariance in box units.
  void set_shape(Eigen::MatrixXd shape) { shape_ = std::move(shape); }

  const Eigen::VectorXd& state() const { return x_; }
  double log_density() const { return lp_; }

 private:
  const LogTarget& target_;
  Eigen::VectorXd x_;
  const Eigen::VectorXd& widths_;
  Eigen::MatrixXd shape_;
  Rng& rng_;
  double lp_;
};

// Batches of steps, rescaling after each until the acceptance rate lands in
// the target band. Returns the number of batches used.
int tune_scale(Walker& w, double& scale, const SamplerConfig& cfg) {
  const double mid = 0.5 * (cfg.target_accept_low + cfg.target_accept_high);
  int batches = 0;
  for (int b = 0; b < cfg.adapt_max_batches; ++b) {
    int accepted = 0;
    for (int i = 0; i < cfg.adapt_batch; ++i) accepted += w.step(scale);
    ++batches;
    const double rate = static_cast<double>(accepted) / cfg.adapt_batch;
    if (rate >= cfg.target_accept_low && rate <= cfg.target_accept_high) break;
    // Multiplicative correction toward the band centre, clamped to [1/4, 4].
    scale *= rate <= 0.0 ? 0.25 : std::clamp(rate / mid, 0.25, 4.0);
  }
  return batches;
}

// Sample covariance of the walk in box units, with a small ridge so the
// factor exists even when a coordinate never moved.
std::optional<Eigen::MatrixXd> learn_shape(Walker& w, double scale, const Eigen::VectorXd& widths, int draws) {
  const Eigen::Index dim = widths.size();
  Eigen::MatrixXd z(draws, dim);
  for (int i = 0; i < draws; ++i) {
    w.step(scale);
    z.row(i) = w.state().cwiseQuotient(widths).transpose();
  }
  const Eigen::RowVectorXd mean = z.colwise().mean();
  const Eigen::MatrixXd centred = z.rowwise() - mean;
  Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(draws - 1);
  cov.diagonal().array() += 1e-8;
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success || !cov.allFinite()) return std::nullopt;
  return Eigen::MatrixXd(llt.matrixL());
}

ChainOutput run_chain(const LogTarget& target, const Eigen::VectorXd& init, const Eigen::VectorXd& widths,
                      const SamplerConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  Walker w(target, init, widths, rng);
  if (!std::isfinite(w.log_density())) throw SamplerError("initial point has non-finite target");

  ChainOutput out;
  double scale = cfg.initial_scale;
  out.batches = tune_scale(w, scale, cfg);
  if (cfg.adapt_max_batches > 0) {
    for (int round = 0; round < cfg.adapt_covariance_rounds; ++round) {
      const auto shape = learn_shape(w, scale, widths, cfg.adapt_covariance_draws);
      if (!shape) break;
      w.set_shape(*shape);
      scale = 2.38 / std::sqrt(static_cast<double>(widths.size()));
      out.batches += tune_scale(w, scale, cfg);
    }
  }
  out.scale = scale;

  out.draws.resize(cfg.n, init.size());
  int accepted = 0;
  for (int i = 0; i < cfg.n; ++i) {
    accepted += w.step(scale);
    out.draws.row(i) = w.state().transpose();
  }
  out.acceptance = static_cast<double>(accepted) / cfg.n;
  return out;
}

double mean_of(const Eigen::VectorXd& v) { return v.mean(); }

double variance_of(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double m = v.mean();
  return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

std::vector<Eigen::VectorXd> split_halves(const std::vector<Eigen::VectorXd>& chains) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& c : chains) {
    const Eigen::Index half = c.size() / 2;
    out.emplace_back(c.head(half));
    out.emplace_back(c.tail(half));
  }
  return out;
}

bool all_constant(const std::vector<Eigen::VectorXd>& chains) {
  const double first = chains.front()[0];
  for (const auto& c : chains)
    if ((c.array() != first).any()) return false;
  return true;
}

// Autocovariance of one chain at `lag`, biased (divided by n).
double autocovariance(const Eigen::VectorXd& c, double mean, Eigen::Index lag) {
  const Eigen::Index n = c.size();
  const auto a = c.head(n - lag).array() - mean;
  const auto b = c.tail(n - lag).array() - mean;
  return (a * b).sum() / static_cast<double>(n);
}

}  // namespace

void SamplerConfig::validate() const {
  if (chains < 1) throw ConfigError("sampler.chains must be at least 1");
  if (n < 10) throw ConfigError("sampler.n must be at least 10");
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) throw ConfigError("sampler.burn_in must lie in [0, 1)");
  if (!(initial_scale > 0.0)) throw ConfigError("sampler.initial_scale must be positive");
  if (adapt_batch < 1 || adapt_max_batches < 0) throw ConfigError("sampler adaptation settings must be positive");
  if (adapt_covariance_rounds < 0 || (adapt_covariance_rounds > 0 && adapt_covariance_draws < 100))
    throw ConfigError("sampler.adapt_covariance_draws must be at least 100 when covariance rounds are enabled");
  if (!(0.0 < target_accept_low && target_accept_low < target_accept_high && target_accept_high < 1.0))
    throw ConfigError("sampler acceptance band must satisfy 0 < low < high < 1");
  if (init_attempts < 1) throw ConfigError("sampler.init_attempts must be positive");
}

PosteriorSamples metropolis(const LogTarget& target, const std::vector<Eigen::VectorXd>& init,
                            const Eigen::VectorXd& widths, const SamplerConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (init.size() != static_cast<std::size_t>(cfg.chains)) throw SamplerError("need one initial point per chain");
  if (std::none_of(init.begin(), init.end(), [&](const auto& x) { return std::isfinite(target(x)); }))
    throw SamplerError("every initial point has non-finite target");
  for (const auto& x : init)
    if (x.size() != widths.size()) throw SamplerError("initial point dimension does not match widths");

  std::vector<ChainOutput> outputs(init.size());
  if (cfg.parallel_chains && init.size() > 1) {
    std::vector<std::future<ChainOutput>> jobs;
    for (std::size_t c = 0; c < init.size(); ++c)
      jobs.push_back(std::async(std::launch::async, run_chain, std::cref(target), std::cref(init[c]),
                                std::cref(widths), std::cref(cfg), derive_seed(seed, {c})));
    for (std::size_t c = 0; c < jobs.size(); ++c) outputs[c] = jobs[c].get();
  } else {
    for (std::size_t c = 0; c < init.size(); ++c) outputs[c] = run_chain(target, init[c], widths, cfg, derive_seed(seed, {c}));
  }

  PosteriorSamples s;
  for (auto& o : outputs) {
    s.chains.push_back(std::move(o.draws));
    s.acceptance_rates.push_back(o.acceptance);
    s.proposal_scales.push_back(o.scale);
    s.adaptation_batches.push_back(o.batches);
  }
  return s;
}

double split_rhat(const std::vector<Eigen::VectorXd>& chains) {
  if (chains.empty() || chains.front().size() < 4) throw std::invalid_argument("split_rhat needs chains of length >= 4");
  if (all_constant(chains)) return 1.0;
  const auto halves = split_halves(chains);
  const double n = static_cast<double>(halves.front().size());
  Eigen::VectorXd means(halves.size()), vars(halves.size());
  for (std::size_t j = 0; j < halves.size(); ++j) {
    means[j] = mean_of(halves[j]);
    vars[j] = variance_of(halves[j]);
  }
  const double w = vars.mean();
  const double b = n * variance_of(means);
  if (!(w > 0.0)) return b > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

double effective_sample_size(const std::vector<Eigen::VectorXd>& chains) {
  if (chains.empty() || chains.front().size() < 4) throw std::invalid_argument("ESS needs chains of length >= 4");
  const double m = static_cast<double>(chains.size());
  const Eigen::Index n = chains.front().size();
  const double total = m * static_cast<double>(n);
  if (all_constant(chains)) return total;

  std::vector<double> means, vars;
  for (const auto& c : chains) {
    means.push_back(mean_of(c));
    vars.push_back(variance_of(c));
  }
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / m;
  double b = 0.0;
  if (chains.size() > 1) {
    Eigen::Map<const Eigen::VectorXd> mv(means.data(), static_cast<Eigen::Index>(means.size()));
    b = static_cast<double>(n) * variance_of(mv);
  }
  const double nn = static_cast<double>(n);
  const double var_plus = (nn - 1.0) / nn * w + b / nn;
  if (!(var_plus > 0.0)) return total;

  auto rho = [&](Eigen::Index lag) {
    if (lag == 0) return 1.0;
    double acov = 0.0;
    for (std::size_t j = 0; j < chains.size(); ++j) acov += autocovariance(chains[j], means[j], lag);
    acov /= m;
    return 1.0 - (w - acov) / var_plus;
  };

  // Geyer initial positive sequence with the monotone correction.
  double tau_sum = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; 2 * k + 1 < n; ++k) {
    double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    tau_sum += pair;
  }
  const double tau = -1.0 + 2.0 * tau_sum;
  return tau > 0.0 ? std::min(total / tau, total) : total;
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("quantile probability outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Diagnostics compute_diagnostics(const PosteriorSamples& samples, double burn_in_fraction) {
  if (samples.chains.size() < 2) throw std::invalid_argument("diagnostics need at least 2 chains");
  const int n = samples.draws_per_chain();
  const int skip = static_cast<int>(std::floor(burn_in_fraction * n));
  const int kept = n - skip;
  if (kept < 100) throw std::invalid_argument("diagnostics need at least 100 retained draws per chain");

  Diagnostics d;
  d.retained_per_chain = kept;
  d.total_retained = kept * static_cast<int>(samples.chains.size());
  for (int j = 0; j < samples.dim(); ++j) {
    std::vector<Eigen::VectorXd> per_chain;
    std::vector<double> pooled;
    for (const auto& c : samples.chains) {
      per_chain.emplace_back(c.col(j).tail(kept));
      pooled.insert(pooled.end(), per_chain.back().data(), per_chain.back().data() + kept);
    }
    ParamSummary s;
    Eigen::Map<const Eigen::VectorXd> all(pooled.data(), static_cast<Eigen::Index>(pooled.size()));
    s.mean = all.mean();
    s.sd = std::sqrt(variance_of(all));
    s.median = quantile(pooled, 0.5);
    s.q025 = quantile(pooled, 0.025);
    s.q975 = quantile(pooled, 0.975);
    s.rhat = split_rhat(per_chain);
    s.ess = effective_sample_size(per_chain);
    if (all_constant(per_chain)) {
      d.warnings.push_back("dimension " + std::to_string(j) + " is constant across all chains");
      log::warn(d.warnings.back());
    }
    d.params.push_back(s);
  }
  return d;
}

std::vector<ParamVector> posterior_init_points(const InferenceResult& result, int count, Rng& rng, int max_attempts) {
  std::vector<ParamVector> points;
  for (int attempt = 0; attempt < max_attempts && static_cast<int>(points.size()) < count; ++attempt) {
    const ParamVector theta = sample_prior(rng, result.prior);
    if (!std::isfinite(unnormalized_log_posterior(result, theta))) continue;
    points.push_back(theta);
  }
  if (static_cast<int>(points.size()) < count)
    throw SamplerError("found only " + std::to_string(points.size()) + " valid initial points in " +
                       std::to_string(max_attempts) + " prior draws");
  return points;
}

PosteriorSamples sample_posterior(const InferenceResult& result, const SamplerConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng init_rng(derive_seed(seed, {0xC4A1}));
  const auto starts = posterior_init_points(result, cfg.chains, init_rng, cfg.init_attempts);
  std::vector<Eigen::VectorXd> init;
  for (const auto& t : starts) {
    const auto a = t.to_array();
    init.emplace_back(Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(kNumParams)));
  }
  Eigen::VectorXd widths(static_cast<Eigen::Index>(kNumParams));
  for (std::size_t j = 0; j < kNumParams; ++j) widths[static_cast<Eigen::Index>(j)] = result.prior.bounds[j].width();
  const LogTarget target = [&result](const Eigen::VectorXd& x) {
    std::array<double, kNumParams> a{};
    for (std::size_t j = 0; j < kNumParams; ++j) a[j] = x[static_cast<Eigen::Index>(j)];
    return unnormalized_log_posterior(result, ParamVector::from_array(a));
  };
  return metropolis(target, init, widths, cfg, derive_seed(seed, {0x5A3B}));
}

}  // namespace virolfi
