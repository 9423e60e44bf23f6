#include "virolfi/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include <boost/program_options.hpp>

#include "virolfi/dataset.hpp"

namespace po = boost::program_options;

namespace virolfi {
namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": not a number: '" + s + "'");
  return v;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& s) {
  Int v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": not an integer: '" + s + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": not a boolean: '" + s + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    out.push_back(to_double(key, a == std::string::npos ? std::string() : item.substr(a, b - a + 1)));
  }
  return out;
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Field>
Key real_key(std::string name, Field field) {
  return {name, [name, field](RunConfig& c, const std::string& s) { field(c) = to_double(name, s); },
          [field](const RunConfig& c) { return fmt(field(c)); }};
}

template <typename Field>
Key int_key(std::string name, Field field) {
  return {name, [name, field](RunConfig& c, const std::string& s) { field(c) = to_int<int>(name, s); },
          [field](const RunConfig& c) { return std::to_string(field(c)); }};
}

template <typename Field>
Key bool_key(std::string name, Field field) {
  return {name, [name, field](RunConfig& c, const std::string& s) { field(c) = to_bool(name, s); },
          [field](const RunConfig& c) { return std::string(field(c) ? "true" : "false"); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    for (std::size_t i = 0; i < kNumParams; ++i) {
      const std::string base = "prior." + std::string(param_name(i));
      k.push_back(real_key(base + ".lower", [i](auto& c) -> auto& { return c.prior.bounds[i].lower; }));
      k.push_back(real_key(base + ".upper", [i](auto& c) -> auto& { return c.prior.bounds[i].upper; }));
    }
    k.push_back(bool_key("prior.adaptive_p_upper", [](auto& c) -> auto& { return c.prior.adaptive_p_upper; }));
    k.push_back(real_key("prior.p_upper_adaptive", [](auto& c) -> auto& { return c.prior.p_upper_adaptive; }));

    k.push_back(int_key("constants.n_e", [](auto& c) -> auto& { return c.experiment.constants.n_e; }));
    k.push_back(int_key("constants.n_i", [](auto& c) -> auto& { return c.experiment.constants.n_i; }));
    k.push_back(real_key("constants.c", [](auto& c) -> auto& { return c.experiment.constants.c; }));
    k.push_back(real_key("constants.c_rna", [](auto& c) -> auto& { return c.experiment.constants.c_rna; }));
    k.push_back(real_key("constants.n_cells", [](auto& c) -> auto& { return c.experiment.constants.n_cells; }));
    k.push_back(real_key("constants.s", [](auto& c) -> auto& { return c.experiment.constants.s; }));
    k.push_back(real_key("constants.v_inoc", [](auto& c) -> auto& { return c.experiment.constants.v_inoc; }));
    k.push_back(real_key("constants.v_vir", [](auto& c) -> auto& { return c.experiment.constants.v_vir; }));
    k.push_back(real_key("constants.moi_sc", [](auto& c) -> auto& { return c.experiment.constants.moi_sc; }));
    k.push_back(real_key("constants.sigma_sc_rna",
                         [](auto& c) -> auto& { return c.experiment.constants.sigma_sc_rna; }));
    k.push_back(real_key("constants.sigma_mc_rna",
                         [](auto& c) -> auto& { return c.experiment.constants.sigma_mc_rna; }));

    k.push_back(real_key("experiment.sc_t_start", [](auto& c) -> auto& { return c.experiment.sc_t_start; }));
    k.push_back(real_key("experiment.sc_rinse_residual_fraction",
                         [](auto& c) -> auto& { return c.experiment.sc_rinse_residual_fraction; }));
    k.push_back(real_key("experiment.sc_extra_rna", [](auto& c) -> auto& { return c.experiment.sc_extra_rna; }));
    k.push_back(
        real_key("experiment.mc_inoculum_sin", [](auto& c) -> auto& { return c.experiment.mc_inoculum_sin; }));
    k.push_back(real_key("experiment.mc_extra_rna", [](auto& c) -> auto& { return c.experiment.mc_extra_rna; }));
    k.push_back(bool_key("experiment.media_exchange", [](auto& c) -> auto& { return c.experiment.media_exchange; }));
    k.push_back(real_key("experiment.media_exchange_fraction",
                         [](auto& c) -> auto& { return c.experiment.media_exchange_fraction; }));
    k.push_back(
        bool_key("experiment.ed_uses_noisy_v", [](auto& c) -> auto& { return c.experiment.ed_uses_noisy_v; }));

    k.push_back(real_key("ode.max_step", [](auto& c) -> auto& { return c.experiment.max_step; }));
    k.push_back(real_key("ode.max_rate_step", [](auto& c) -> auto& { return c.experiment.max_rate_step; }));
    k.push_back({"ode.stage_rate_mode",
                 [](RunConfig& c, const std::string& s) {
                   if (s == "phase_mean")
                     c.experiment.stage_rate_mode = StageRateMode::PhaseMean;
                   else if (s == "per_stage")
                     c.experiment.stage_rate_mode = StageRateMode::PerStage;
                   else
                     throw ConfigError("ode.stage_rate_mode: expected phase_mean or per_stage, got '" + s + "'");
                 },
                 [](const RunConfig& c) {
                   return std::string(c.experiment.stage_rate_mode == StageRateMode::PhaseMean ? "phase_mean"
                                                                                               : "per_stage");
                 }});

    k.push_back(real_key("discrepancy.mean", [](auto& c) -> auto& { return c.discrepancy.mean; }));
    k.push_back(real_key("discrepancy.scale", [](auto& c) -> auto& { return c.discrepancy.scale; }));
    k.push_back(
        real_key("discrepancy.ed_normalizer", [](auto& c) -> auto& { return c.discrepancy.ed_normalizer; }));

    k.push_back(int_key("bolfi.n_init", [](auto& c) -> auto& { return c.bolfi.n_init; }));
    k.push_back(int_key("bolfi.n_evidence", [](auto& c) -> auto& { return c.bolfi.n_evidence; }));
    k.push_back(int_key("bolfi.t_update", [](auto& c) -> auto& { return c.bolfi.t_update; }));
    k.push_back(int_key("bolfi.hyper_restarts", [](auto& c) -> auto& { return c.bolfi.hyper_restarts; }));
    k.push_back({"bolfi.sigma_acq",
                 [](RunConfig& c, const std::string& s) {
                   const auto v = to_list("bolfi.sigma_acq", s);
                   if (v.size() == 1)
                     c.bolfi.sigma_acq.fill(v[0]);
                   else if (v.size() == kNumParams)
                     std::copy(v.begin(), v.end(), c.bolfi.sigma_acq.begin());
                   else
                     throw ConfigError("bolfi.sigma_acq: expected 1 or 6 values");
                 },
                 [](const RunConfig& c) {
                   std::string out;
                   for (std::size_t i = 0; i < kNumParams; ++i) out += (i ? "," : "") + fmt(c.bolfi.sigma_acq[i]);
                   return out;
                 }});
    k.push_back(real_key("bolfi.eta_delta", [](auto& c) -> auto& { return c.bolfi.eta_delta; }));
    k.push_back(int_key("bolfi.acq_candidates", [](auto& c) -> auto& { return c.bolfi.acq_candidates; }));
    k.push_back(int_key("bolfi.acq_starts", [](auto& c) -> auto& { return c.bolfi.acq_starts; }));
    k.push_back(int_key("bolfi.acq_budget", [](auto& c) -> auto& { return c.bolfi.acq_budget; }));
    k.push_back(int_key("bolfi.threshold_starts", [](auto& c) -> auto& { return c.bolfi.threshold_starts; }));
    k.push_back(
        int_key("bolfi.threshold_local_evals", [](auto& c) -> auto& { return c.bolfi.threshold_local_evals; }));
    k.push_back(int_key("bolfi.min_successes", [](auto& c) -> auto& { return c.bolfi.min_successes; }));

    k.push_back(int_key("sampler.chains", [](auto& c) -> auto& { return c.sampler.chains; }));
    k.push_back(int_key("sampler.n", [](auto& c) -> auto& { return c.sampler.n; }));
    k.push_back(real_key("sampler.burn_in", [](auto& c) -> auto& { return c.sampler.burn_in_fraction; }));
    k.push_back(real_key("sampler.initial_scale", [](auto& c) -> auto& { return c.sampler.initial_scale; }));
    k.push_back(int_key("sampler.adapt_batch", [](auto& c) -> auto& { return c.sampler.adapt_batch; }));
    k.push_back(int_key("sampler.adapt_max_batches", [](auto& c) -> auto& { return c.sampler.adapt_max_batches; }));
    k.push_back(
        real_key("sampler.target_accept_low", [](auto& c) -> auto& { return c.sampler.target_accept_low; }));
    k.push_back(
        real_key("sampler.target_accept_high", [](auto& c) -> auto& { return c.sampler.target_accept_high; }));
    k.push_back(int_key("sampler.adapt_covariance_rounds",
                        [](auto& c) -> auto& { return c.sampler.adapt_covariance_rounds; }));
    k.push_back(int_key("sampler.adapt_covariance_draws",
                        [](auto& c) -> auto& { return c.sampler.adapt_covariance_draws; }));
    k.push_back(int_key("sampler.init_attempts", [](auto& c) -> auto& { return c.sampler.init_attempts; }));

    k.push_back(int_key("slices.points_1d", [](auto& c) -> auto& { return c.slices.points_1d; }));
    k.push_back(int_key("slices.points_2d", [](auto& c) -> auto& { return c.slices.points_2d; }));
    k.push_back({"slices.anchor",
                 [](RunConfig& c, const std::string& s) {
                   if (s.empty() || s == "best") {
                     c.slices.has_anchor = false;
                     return;
                   }
                   const auto v = to_list("slices.anchor", s);
                   if (v.size() != kNumParams) throw ConfigError("slices.anchor: expected 6 values or 'best'");
                   for (std::size_t i = 0; i < kNumParams; ++i) c.slices.anchor[i] = v[i];
                   c.slices.has_anchor = true;
                 },
                 [](const RunConfig& c) {
                   if (!c.slices.has_anchor) return std::string("best");
                   std::string out;
                   for (std::size_t i = 0; i < kNumParams; ++i) out += (i ? "," : "") + fmt(c.slices.anchor[i]);
                   return out;
                 }});

    k.push_back({"seed", [](RunConfig& c, const std::string& s) { c.seed = to_int<std::uint64_t>("seed", s); },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    k.push_back({"data.dir", [](RunConfig& c, const std::string& s) { c.data_dir = s; },
                 [](const RunConfig& c) { return c.data_dir.string(); }});
    return k;
  }();
  return table;
}

}  // namespace

void RunConfig::validate() const {
  prior.validate();
  experiment.validate();
  discrepancy.validate();
  bolfi.validate();
  sampler.validate();
  if (slices.points_1d < 2 || slices.points_2d < 2) throw ConfigError("slice grids need at least 2 points per axis");
  if (slices.has_anchor && !prior.contains(slices.anchor)) throw ConfigError("slices.anchor lies outside the prior");
}

std::filesystem::path RunConfig::resolved_data_dir() const {
  return data_dir.empty() ? bundled_data_dir() : data_dir;
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  po::options_description desc;
  for (const auto& k : keys()) desc.add_options()(k.name.c_str(), po::value<std::string>());
  po::variables_map vm;
  try {
    po::store(po::parse_config_file(in, desc, false), vm);
  } catch (const po::error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  RunConfig cfg;
  for (const auto& k : keys()) {
    if (!vm.count(k.name)) continue;
    std::string value = vm[k.name].as<std::string>();
    k.set(cfg, value);
  }
  if (vm.count("prior.p.upper") && !vm.count("prior.p_upper_adaptive"))
    cfg.prior.p_upper_adaptive = cfg.prior.bounds[static_cast<std::size_t>(Param::PLog10)].upper;
  if (!cfg.data_dir.empty() && cfg.data_dir.is_relative() && !base_dir.empty()) cfg.data_dir = base_dir / cfg.data_dir;
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, path.parent_path());
}

std::string format_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : keys()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

}  // namespace virolfi
