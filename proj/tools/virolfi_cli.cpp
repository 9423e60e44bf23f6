// Command-line driver: simulate, infer, sample, report.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "virolfi/bolfi.hpp"
#include "virolfi/config.hpp"
#include "virolfi/dataset.hpp"
#include "virolfi/experiment.hpp"
#include "virolfi/exports.hpp"
#include "virolfi/logging.hpp"
#include "virolfi/run_log.hpp"
#include "virolfi/sampler.hpp"

namespace fs = std::filesystem;
using namespace virolfi;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitSimulation = 3;

// Exit code carried out of a subcommand.
struct Exit {
  int code;
  std::string message;
};

RunConfig config_or_default(const std::string& path) {
  if (path.empty()) {
    RunConfig cfg;
    cfg.validate();
    return cfg;
  }
  return load_config(path);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_trajectory(const fs::path& path, const Trajectory& tr, double volume) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# noiseless ODE state at the sample times (amounts; V and V_RNA also per ml)\n";
  out << "time_h,target_cells,eclipse_cells,infectious_cells,v_iv,v_rna,v_iv_per_ml,v_rna_per_ml\n";
  char buf[320];
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const StateVector& s = tr.states[i];
    double e = 0.0;
    for (double x : s.eclipse) e += x;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", tr.times[i], s.t_cells, e,
                  s.infectious_total(), s.v, s.v_rna, s.v / volume, s.v_rna / volume);
    out << buf;
  }
}

int cmd_simulate(const std::vector<double>& theta_values, std::uint64_t seed, const std::string& out_dir,
                 const std::string& config_path) {
  const RunConfig cfg = config_or_default(config_path);
  if (theta_values.size() != kNumParams) throw Exit{kExitUsage, "--theta needs 6 values"};
  ParamVector theta;
  for (std::size_t i = 0; i < kNumParams; ++i) theta[i] = theta_values[i];
  for (std::size_t i = 0; i < kNumParams; ++i) {
    if (!std::isfinite(theta[i]) || !cfg.prior.bounds[i].contains(theta[i])) {
      std::ostringstream msg;
      msg << param_name(i) << " = " << theta[i] << " lies outside the prior box [" << cfg.prior.bounds[i].lower << ", "
          << cfg.prior.bounds[i].upper << "]";
      throw Exit{kExitUsage, msg.str()};
    }
  }

  const Dataset observed = load_observed(DatasetPaths::in_directory(cfg.resolved_data_dir()));
  const ExperimentDesigns designs = build_designs(observed, cfg.experiment);
  Rng rng(seed);
  const SimulationResult sim = simulate_experiments(theta, designs, rng);
  if (const auto* fail = std::get_if<SimFailure>(&sim)) {
    throw Exit{kExitSimulation, "simulation failed at stage " + std::string(failure_stage_name(fail->stage)) + ": " +
                                    fail->detail};
  }
  const auto& out = std::get<SimulationOutput>(sim);
  fs::create_directories(out_dir);
  write_dataset(DatasetPaths::in_directory(out_dir), out.data);
  write_trajectory(fs::path(out_dir) / "trajectory_sc.csv", out.sc_trajectory, cfg.experiment.constants.s);
  write_trajectory(fs::path(out_dir) / "trajectory_mc.csv", out.mc_trajectory, cfg.experiment.constants.s);
  return 0;
}

int cmd_infer(const std::string& config_path, const std::string& out_dir, bool resume, const std::string& data_override) {
  RunConfig cfg = load_config(config_path);
  if (!data_override.empty()) cfg.data_dir = fs::absolute(data_override);
  const fs::path out(out_dir);
  fs::create_directories(out);
  const fs::path log_path = out / "run_log.csv";
  const fs::path cfg_path = out / "config.conf";
  const std::string cfg_text = format_config(cfg);

  std::vector<EvidenceEntry> previous;
  if (resume) {
    if (!fs::exists(log_path)) throw Exit{kExitUsage, "--resume: no run_log.csv in " + out.string()};
    if (fs::exists(cfg_path) && read_text(cfg_path) != cfg_text)
      throw Exit{kExitUsage, "--resume: configuration differs from the one in " + cfg_path.string()};
    previous = read_run_log(log_path);
    if (static_cast<int>(previous.size()) > cfg.bolfi.n_evidence) previous.resize(static_cast<std::size_t>(cfg.bolfi.n_evidence));
    log::info("resuming after " + std::to_string(previous.size()) + " logged attempts");
  }
  write_text(cfg_path, cfg_text);

  const Dataset observed = load_observed(DatasetPaths::in_directory(cfg.resolved_data_dir()));
  const ExperimentDesigns designs = build_designs(observed, cfg.experiment);
  const DiscrepancyFn fn = make_experiment_discrepancy(observed, designs, cfg.discrepancy);

  RunLogWriter writer = resume ? RunLogWriter(log_path, previous) : RunLogWriter(log_path);
  RunHooks hooks;
  hooks.replay = resume ? &previous : nullptr;
  hooks.on_entry = [&writer](const EvidenceEntry& e) { writer.append(e); };

  const auto start = std::chrono::steady_clock::now();
  InferenceResult result;
  try {
    result = run_bolfi(fn, cfg.prior, cfg.bolfi, cfg.seed, hooks);
  } catch (const BolfiError& e) {
    throw Exit{kExitSimulation, e.what()};
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  write_timing_csv(out / "timing.csv", result.evidence.entries);
  save_model(out / "model.json", result, cfg);
  // Slices come from the serialized state so every later command sees the
  // same surrogate.
  const LoadedModel model = load_model(out / "model.json");
  write_slices(out, model.result, cfg.slices);

  std::printf("attempts %d, successful %d, failed %d, threshold %.6g, wall %.1f s\n", result.evidence.size(),
              result.evidence.successes(), result.evidence.failures(), result.h, wall);
  return 0;
}

int cmd_sample(const std::string& model_dir, int chains, int n, const std::string& out_dir, std::uint64_t seed,
               bool seed_given) {
  const fs::path model_path = fs::path(model_dir) / "model.json";
  if (!fs::exists(model_path)) throw Exit{kExitUsage, "no model.json in " + model_dir};
  LoadedModel model = load_model(model_path);
  RunConfig cfg = model.config;
  if (chains > 0) cfg.sampler.chains = chains;
  if (n > 0) cfg.sampler.n = n;
  if (seed_given) cfg.seed = seed;
  cfg.validate();

  const PosteriorSamples samples = sample_posterior(model.result, cfg.sampler, cfg.seed);
  const fs::path out(out_dir);
  fs::create_directories(out);
  write_text(out / "config.conf", format_config(cfg));
  write_samples_csv(out / "samples.csv", samples);
  write_sampler_info(out / "sampler.csv", samples);
  if (samples.chains.size() >= 2) {
    const Diagnostics diag = compute_diagnostics(samples, cfg.sampler.burn_in_fraction);
    write_summary_csv(out / "diagnostics.csv", diag);
    std::cout << summary_table(diag);
  }
  return 0;
}

int cmd_report(const std::string& samples_dir, const std::string& out_dir, int draws) {
  const fs::path dir(samples_dir);
  const fs::path out = out_dir.empty() ? dir : fs::path(out_dir);
  if (!fs::exists(dir / "samples.csv")) throw Exit{kExitUsage, "no samples.csv in " + samples_dir};
  const PosteriorSamples samples = read_samples_csv(dir / "samples.csv");
  RunConfig cfg;
  if (fs::exists(dir / "config.conf")) cfg = load_config(dir / "config.conf");
  fs::create_directories(out);
  if (samples.chains.size() < 2) throw Exit{kExitUsage, "report needs at least 2 chains"};
  const Diagnostics diag = compute_diagnostics(samples, cfg.sampler.burn_in_fraction);
  write_summary_csv(out / "summary.csv", diag);
  const std::string table = summary_table(diag);
  write_text(out / "summary.md", table);
  std::cout << table;
  if (draws > 0) write_predictive(out, samples, cfg, draws, cfg.sampler.burn_in_fraction);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"virolfi: likelihood-free inference for within-host influenza kinetics"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "simulate both experiments at one parameter set");
  std::vector<double> theta;
  std::uint64_t sim_seed = 1;
  std::string sim_out, sim_config;
  sim->add_option("--theta", theta, "gamma,beta,p,prna,tauE,tauI (log10 for the first four, hours)")
      ->required()
      ->expected(6)
      ->delimiter(',');
  sim->add_option("--seed", sim_seed, "random seed")->required();
  sim->add_option("--out", sim_out, "output directory")->required();
  sim->add_option("--config", sim_config, "configuration file (defaults if omitted)");

  auto* infer = app.add_subcommand("infer", "run the BOLFI acquisition loop");
  std::string infer_config, infer_out, infer_data;
  bool resume = false;
  infer->add_option("--config", infer_config, "configuration file")->required();
  infer->add_option("--out", infer_out, "output directory")->required();
  infer->add_option("--data", infer_data, "directory with the four measurement tables (overrides data.dir)");
  infer->add_flag("--resume", resume, "continue from the run log in --out");

  auto* sample = app.add_subcommand("sample", "Metropolis sampling of a fitted surrogate posterior");
  std::string model_dir, sample_out;
  int chains = 0, n = 0;
  std::uint64_t sample_seed = 0;
  sample->add_option("--model", model_dir, "directory holding model.json")->required();
  sample->add_option("--chains", chains, "number of chains (config default 4)");
  sample->add_option("--n", n, "draws per chain after adaptation");
  sample->add_option("--out", sample_out, "output directory")->required();
  auto* seed_opt = sample->add_option("--seed", sample_seed, "random seed (config seed if omitted)");

  auto* report = app.add_subcommand("report", "posterior summary table and predictive check");
  std::string samples_dir, report_out;
  int draws = 50;
  report->add_option("--samples", samples_dir, "directory holding samples.csv")->required();
  report->add_option("--out", report_out, "output directory (defaults to --samples)");
  report->add_option("--draws", draws, "posterior draws for the predictive check (0 disables)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sim) return cmd_simulate(theta, sim_seed, sim_out, sim_config);
    if (*infer) return cmd_infer(infer_config, infer_out, resume, infer_data);
    if (*sample) return cmd_sample(model_dir, chains, n, sample_out, sample_seed, seed_opt->count() > 0);
    if (*report) return cmd_report(samples_dir, report_out, draws);
  } catch (const Exit& e) {
    std::cerr << "virolfi: " << e.message << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "virolfi: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
