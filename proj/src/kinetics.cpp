#include "virolfi/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace virolfi {
namespace {

double stage_rate(int n, double tau, StageRateMode mode) {
  return mode == StageRateMode::PhaseMean ? static_cast<double>(n) / tau : 1.0 / tau;
}

struct Layout {
  int n_e;
  int n_i;
  std::size_t e0() const { return 1; }
  std::size_t i0() const { return 1 + static_cast<std::size_t>(n_e); }
  std::size_t v() const { return 1 + static_cast<std::size_t>(n_e + n_i); }
  std::size_t v_rna() const { return v() + 1; }
  std::size_t size() const { return v_rna() + 1; }
};

// Merges samples, the rinse and t_end into one sorted list of stop times.
std::vector<double> event_times(const KineticsConfig& cfg) {
  std::vector<double> events(cfg.sample_times);
  if (cfg.rinse_at_zero) events.push_back(0.0);
  events.push_back(cfg.t_end);
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());
  events.erase(std::remove_if(events.begin(), events.end(), [&](double t) { return t < cfg.t_start; }), events.end());
  return events;
}

}  // namespace

StateVector StateVector::zeros(int n_e, int n_i) {
  StateVector s;
  s.eclipse.assign(static_cast<std::size_t>(n_e), 0.0);
  s.infectious.assign(static_cast<std::size_t>(n_i), 0.0);
  return s;
}

double StateVector::cell_total() const {
  return t_cells + std::accumulate(eclipse.begin(), eclipse.end(), 0.0) + infectious_total();
}

double StateVector::infectious_total() const { return std::accumulate(infectious.begin(), infectious.end(), 0.0); }

std::vector<double> StateVector::flatten() const {
  std::vector<double> flat;
  flat.reserve(size());
  flat.push_back(t_cells);
  flat.insert(flat.end(), eclipse.begin(), eclipse.end());
  flat.insert(flat.end(), infectious.begin(), infectious.end());
  flat.push_back(v);
  flat.push_back(v_rna);
  return flat;
}

StateVector StateVector::unflatten(std::span<const double> flat, int n_e, int n_i) {
  const Layout lay{n_e, n_i};
  if (flat.size() != lay.size()) throw std::invalid_argument("StateVector::unflatten: size mismatch");
  StateVector s;
  s.t_cells = flat[0];
  s.eclipse.assign(flat.begin() + lay.e0(), flat.begin() + lay.i0());
  s.infectious.assign(flat.begin() + lay.i0(), flat.begin() + lay.v());
  s.v = flat[lay.v()];
  s.v_rna = flat[lay.v_rna()];
  return s;
}

void KineticsConfig::validate() const {
  constants.validate();
  if (!(t_end > t_start)) throw ConfigError("kinetics: t_end must exceed t_start");
  if (sample_times.empty()) throw ConfigError("kinetics: no sample times");
  for (std::size_t k = 0; k < sample_times.size(); ++k) {
    const double t = sample_times[k];
    if (t < t_start || t > t_end) throw ConfigError("kinetics: sample time outside [t_start, t_end]");
    if (k > 0 && !(t > sample_times[k - 1])) throw ConfigError("kinetics: sample times must be strictly increasing");
  }
  if (rinse_at_zero && !(t_start < 0.0 && t_end > 0.0)) throw ConfigError("kinetics: rinse at t = 0 needs t_start < 0");
  if (rinse_residual_fraction < 0.0 || rinse_residual_fraction > 1.0) throw ConfigError("kinetics: rinse residual outside [0,1]");
  if (media_exchange_fraction < 0.0 || media_exchange_fraction >= 1.0)
    throw ConfigError("kinetics: media exchange fraction outside [0,1)");
  if (!(max_step > 0.0) || !(max_rate_step > 0.0)) throw ConfigError("kinetics: step limits must be positive");
  if (initial_v < 0.0 || initial_v_rna < 0.0) throw ConfigError("kinetics: negative initial virus");
}

void derivatives(std::span<const double> y, std::span<double> dydt, const LinearParams& params,
                 const FixedConstants& constants, StageRateMode mode) {
  const Layout lay{constants.n_e, constants.n_i};
  const double k_e = stage_rate(constants.n_e, params.tau_e, mode);
  const double k_i = stage_rate(constants.n_i, params.tau_i, mode);

  const double t_cells = y[0];
  const double v = y[lay.v()];
  const double entry = params.beta * t_cells * v / constants.s;  // virions lost to cell entry per hour
  const double infection = params.gamma * entry;                 // cells infected per hour

  dydt[0] = -infection;

  double inflow = infection;
  for (std::size_t k = lay.e0(); k < lay.i0(); ++k) {
    const double out = k_e * y[k];
    dydt[k] = inflow - out;
    inflow = out;
  }
  double producing = 0.0;
  for (std::size_t k = lay.i0(); k < lay.v(); ++k) {
    const double out = k_i * y[k];
    dydt[k] = inflow - out;
    inflow = out;
    producing += y[k];
  }
  dydt[lay.v()] = params.p * producing - constants.c * v - entry;
  dydt[lay.v_rna()] = params.p_rna * producing - constants.c_rna * y[lay.v_rna()] - entry;
}

StateVector derivatives(const StateVector& state, const LinearParams& params, const FixedConstants& constants,
                        StageRateMode mode) {
  if (state.eclipse.size() != static_cast<std::size_t>(constants.n_e) ||
      state.infectious.size() != static_cast<std::size_t>(constants.n_i))
    throw std::invalid_argument("derivatives: state stage counts do not match constants");
  const std::vector<double> y = state.flatten();
  std::vector<double> dy(y.size());
  derivatives(y, dy, params, constants, mode);
  return StateVector::unflatten(dy, constants.n_e, constants.n_i);
}

IntegrationResult integrate(const KineticsConfig& config, const LinearParams& params) {
  config.validate();
  const FixedConstants& k = config.constants;
  const Layout lay{k.n_e, k.n_i};
  const std::size_t n = lay.size();
  const double tol_neg = 1e-9 * k.n_cells;

  // Linear rates that do not change along the trajectory; the infection rate
  // gamma*beta*V/s is added per step because V spans many decades.
  const double static_fastest = std::max({stage_rate(k.n_e, params.tau_e, config.stage_rate_mode),
                                          stage_rate(k.n_i, params.tau_i, config.stage_rate_mode),
                                          k.c + params.beta * k.n_cells / k.s, k.c_rna});
  const double infection_per_virion = params.gamma * params.beta / k.s;

  std::vector<double> y(n, 0.0), k1(n), k2(n), k3(n), k4(n), tmp(n);
  y[0] = k.n_cells;
  y[lay.v()] = config.initial_v;
  y[lay.v_rna()] = config.initial_v_rna;

  Trajectory traj;
  traj.times.reserve(config.sample_times.size());
  traj.states.reserve(config.sample_times.size());
  std::size_t next_sample = 0;

  auto check = [&](double t) -> std::variant<std::monostate, IntegrationFailure> {
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(y[i])) return IntegrationFailure{t, i, "non-finite state"};
      if (y[i] < -tol_neg) {
        std::ostringstream msg;
        msg << "state " << i << " = " << y[i] << " below -tol_neg";
        return IntegrationFailure{t, i, msg.str()};
      }
    }
    return std::monostate{};
  };

  auto handle_events = [&](double t) {
    if (config.rinse_at_zero && t == 0.0) {
      y[lay.v()] *= config.rinse_residual_fraction;
      y[lay.v_rna()] *= config.rinse_residual_fraction;
    }
    if (next_sample < config.sample_times.size() && config.sample_times[next_sample] == t) {
      std::vector<double> clamped(y);
      for (double& x : clamped) x = std::max(0.0, x);
      traj.times.push_back(t);
      traj.states.push_back(StateVector::unflatten(clamped, k.n_e, k.n_i));
      ++next_sample;
      if (config.media_exchange) {
        y[lay.v()] *= 1.0 - config.media_exchange_fraction;
        y[lay.v_rna()] *= 1.0 - config.media_exchange_fraction;
      }
    }
  };

  double t = config.t_start;
  handle_events(t);
  for (double stop : event_times(config)) {
    if (stop <= t) continue;
    while (t < stop) {
      const double fastest = std::max(static_fastest, infection_per_virion * std::max(0.0, y[lay.v()]));
      double h = std::min(config.max_step, config.max_rate_step / fastest);
      // Land exactly on the event; avoid a sliver step right before it.
      const bool last = t + 1.5 * h >= stop;
      if (last) h = (t + h >= stop) ? stop - t : 0.5 * (stop - t);
      derivatives(y, k1, params, k, config.stage_rate_mode);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
      derivatives(tmp, k2, params, k, config.stage_rate_mode);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
      derivatives(tmp, k3, params, k, config.stage_rate_mode);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
      derivatives(tmp, k4, params, k, config.stage_rate_mode);
      for (std::size_t i = 0; i < n; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      t = (last && t + h >= stop - 1e-12 * std::max(1.0, std::abs(stop))) ? stop : t + h;
      if (auto status = check(t); std::holds_alternative<IntegrationFailure>(status))
        return std::get<IntegrationFailure>(status);
    }
    t = stop;
    handle_events(t);
  }
  return traj;
}

StateVector apply_media_exchange(StateVector state, double fraction) {
  if (fraction < 0.0 || fraction >= 1.0) throw std::invalid_argument("apply_media_exchange: fraction outside [0,1)");
  state.v *= 1.0 - fraction;
  state.v_rna *= 1.0 - fraction;
  return state;
}

std::vector<double> apply_log10_noise(std::span<const double> values, std::span<const double> offsets) {
  if (values.size() != offsets.size()) throw std::invalid_argument("apply_log10_noise: size mismatch");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) throw std::domain_error("RNA noise needs strictly positive values");
    out[i] = offsets[i] == 0.0 ? values[i] : std::pow(10.0, std::log10(values[i]) + offsets[i]);
  }
  return out;
}

std::vector<double> add_rna_noise(std::span<const double> values, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("add_rna_noise: negative sigma");
  std::vector<double> offsets(values.size(), 0.0);
  if (sigma > 0.0) {
    for (double& e : offsets) e = sigma * rng.normal();
  }
  return apply_log10_noise(values, offsets);
}

}  // namespace virolfi
