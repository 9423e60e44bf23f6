#include "virolfi/experiment.hpp"

#include <cmath>
#include <sstream>

namespace virolfi {
namespace {

constexpr double kTimeMatchTol = 1e-3;

enum StreamTag : std::uint64_t { kNoise = 0, kRnaPick = 1, kEdPick = 2, kPlate = 3 };

struct Blocks {
  std::vector<RnaPoint> rna;
  std::vector<EdRow> ed;
  Trajectory trajectory;
};

std::variant<Blocks, SimFailure> simulate_one(const LinearParams& lin, const ExtinctionResult& ext,
                                              const ExperimentDesign& design, std::uint64_t master,
                                              std::uint64_t exp_tag) {
  const FixedConstants& k = design.kinetics.constants;
  KineticsConfig kin = design.kinetics;
  kin.initial_v = sin_to_iv(design.inoculum_sin, ext.p_est);
  kin.initial_v_rna = kin.initial_v + design.extra_rna;

  IntegrationResult integrated = integrate(kin, lin);
  if (auto* fail = std::get_if<IntegrationFailure>(&integrated)) {
    std::ostringstream msg;
    msg << (design.mode == ExperimentMode::SingleCycle ? "SC" : "MC") << " t=" << fail->time << ": " << fail->reason;
    return SimFailure{FailureStage::Integration, msg.str()};
  }
  Blocks out;
  out.trajectory = std::move(std::get<Trajectory>(integrated));

  const std::size_t steps = design.steps();
  std::vector<double> conc(steps), rna(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    conc[s] = out.trajectory.states[s].v / k.s;
    rna[s] = out.trajectory.states[s].v_rna / k.s;
    if (!(rna[s] > 0.0)) {
      std::ostringstream msg;
      msg << "RNA concentration vanished at t=" << design.sample_times[s];
      return SimFailure{FailureStage::Integration, msg.str()};
    }
  }

  // Log10 offsets of every realization; realization r sees offsets[r][step].
  std::vector<std::vector<double>> offsets(kRealizations, std::vector<double>(steps));
  for (int r = 0; r < kRealizations; ++r) {
    Rng noise(derive_seed(master, {exp_tag, kNoise, static_cast<std::uint64_t>(r)}));
    for (double& e : offsets[r]) e = design.rna_sigma * noise.normal();
  }

  out.rna = design.rna_rows;
  std::size_t row = 0;
  for (std::size_t s = 0; s < steps; ++s) {
    Rng pick(derive_seed(master, {exp_tag, kRnaPick, s}));
    const auto chosen = choose_without_replacement(kRealizations, design.rna_replicates_per_time[s], pick);
    for (int r : chosen) {
      const double e = offsets[r][s];
      out.rna[row++].value = e == 0.0 ? rna[s] : std::pow(10.0, std::log10(rna[s]) + e);
    }
  }

  out.ed = design.ed_rows;
  row = 0;
  for (std::size_t s = 0; s < steps; ++s) {
    const int count = design.ed_replicates_per_time[s];
    if (count == 0) continue;
    Rng pick(derive_seed(master, {exp_tag, kEdPick, s}));
    const auto chosen = choose_without_replacement(kRealizations, count, pick);
    for (int r : chosen) {
      EdRow& target = out.ed[row++];
      PlateDesign plate{target.exponents, 4, k.v_inoc};
      double c = conc[s];
      if (design.ed_uses_noisy_v && offsets[r][s] != 0.0) c *= std::pow(10.0, offsets[r][s]);
      Rng plate_rng(derive_seed(master, {exp_tag, kPlate, s, static_cast<std::uint64_t>(r)}));
      PlateResult result = simulate_plate(c, plate, ext.p_ext, k.v_vir, plate_rng);
      if (auto* fail = std::get_if<PlateFailure>(&result)) {
        std::ostringstream msg;
        msg << (design.mode == ExperimentMode::SingleCycle ? "SC" : "MC") << " t=" << design.sample_times[s] << ": "
            << fail->reason;
        return SimFailure{FailureStage::Plate, msg.str()};
      }
      target.counts = std::get<EDOutcome>(result).counts;
    }
  }
  return out;
}

}  // namespace

void ExperimentSettings::validate() const {
  constants.validate();
  if (!(sc_t_start < 0.0)) throw ConfigError("single-cycle start time must be negative (inoculation before t = 0)");
  if (sc_rinse_residual_fraction < 0.0 || sc_rinse_residual_fraction > 1.0)
    throw ConfigError("rinse residual fraction outside [0, 1]");
  if (!(mc_inoculum_sin > 0.0)) throw ConfigError("multiple-cycle inoculum must be positive");
  if (sc_extra_rna < 0.0 || mc_extra_rna < 0.0) throw ConfigError("extra inoculum RNA must be non-negative");
  if (media_exchange_fraction < 0.0 || media_exchange_fraction >= 1.0)
    throw ConfigError("media exchange fraction outside [0, 1)");
}

std::string_view failure_stage_name(FailureStage stage) {
  switch (stage) {
    case FailureStage::Constraint: return "constraint";
    case FailureStage::Extinction: return "extinction";
    case FailureStage::Integration: return "integration";
    case FailureStage::Plate: return "plate";
  }
  return "unknown";
}

ExperimentDesign build_design(ExperimentMode mode, const std::vector<RnaPoint>& rna, const std::vector<EdRow>& ed,
                              const ExperimentSettings& settings) {
  settings.validate();
  if (rna.empty()) throw ConfigError("experiment design needs at least one RNA row");
  const char* label = mode == ExperimentMode::SingleCycle ? "single-cycle" : "multiple-cycle";

  ExperimentDesign d;
  d.mode = mode;
  d.rna_rows = rna;
  d.ed_rows = ed;
  for (const auto& p : rna) {
    if (d.sample_times.empty() || std::abs(p.time - d.sample_times.back()) > kTimeMatchTol) {
      d.sample_times.push_back(p.time);
      d.rna_replicates_per_time.push_back(0);
    }
    ++d.rna_replicates_per_time.back();
    d.rna_row_step.push_back(d.sample_times.size() - 1);
  }
  d.ed_replicates_per_time.assign(d.sample_times.size(), 0);
  for (const auto& row : ed) {
    std::size_t best = 0;
    double best_gap = INFINITY;
    for (std::size_t s = 0; s < d.sample_times.size(); ++s) {
      const double gap = std::abs(row.time - d.sample_times[s]);
      if (gap < best_gap) best_gap = gap, best = s;
    }
    if (best_gap > kTimeMatchTol) {
      std::ostringstream msg;
      msg << label << " ED row at t=" << row.time << " has no matching RNA sample time";
      throw ConfigError(msg.str());
    }
    if (!d.ed_row_step.empty() && best < d.ed_row_step.back()) throw ConfigError("ED rows must be sorted by time");
    ++d.ed_replicates_per_time[best];
    d.ed_row_step.push_back(best);
  }
  for (std::size_t s = 0; s < d.sample_times.size(); ++s) {
    if (d.rna_replicates_per_time[s] > kRealizations || d.ed_replicates_per_time[s] > kRealizations) {
      std::ostringstream msg;
      msg << label << " step t=" << d.sample_times[s] << " has more than " << kRealizations << " replicates";
      throw ConfigError(msg.str());
    }
  }

  KineticsConfig& kin = d.kinetics;
  kin.constants = settings.constants;
  kin.sample_times = d.sample_times;
  kin.t_end = d.sample_times.back();
  kin.media_exchange = settings.media_exchange;
  kin.media_exchange_fraction = settings.media_exchange_fraction;
  kin.max_step = settings.max_step;
  kin.max_rate_step = settings.max_rate_step;
  kin.stage_rate_mode = settings.stage_rate_mode;
  d.ed_uses_noisy_v = settings.ed_uses_noisy_v;
  if (mode == ExperimentMode::SingleCycle) {
    kin.t_start = settings.sc_t_start;
    kin.rinse_at_zero = true;
    kin.rinse_residual_fraction = settings.sc_rinse_residual_fraction;
    d.inoculum_sin = settings.constants.moi_sc * settings.constants.n_cells;
    d.extra_rna = settings.sc_extra_rna;
    d.rna_sigma = settings.constants.sigma_sc_rna;
    if (!(d.sample_times.front() > 0.0)) throw ConfigError("single-cycle samples must start after the t = 0 rinse");
  } else {
    kin.t_start = std::min(0.0, d.sample_times.front());
    kin.rinse_at_zero = false;
    d.inoculum_sin = settings.mc_inoculum_sin;
    d.extra_rna = settings.mc_extra_rna;
    d.rna_sigma = settings.constants.sigma_mc_rna;
  }
  if (kin.t_end <= kin.t_start) kin.t_end = kin.t_start + 1.0;
  kin.validate();
  return d;
}

ExperimentDesigns build_designs(const Dataset& observed, const ExperimentSettings& settings) {
  return {build_design(ExperimentMode::SingleCycle, observed.sc_rna, observed.sc_ed, settings),
          build_design(ExperimentMode::MultipleCycle, observed.mc_rna, observed.mc_ed, settings)};
}

std::vector<int> choose_without_replacement(int n, int k, Rng& rng) {
  if (k < 0 || k > n) throw std::invalid_argument("choose_without_replacement: k outside [0, n]");
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[i] = i;
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.uniform() * (n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

SimulationResult simulate_experiments(const ParamVector& theta, const ExperimentDesigns& designs, Rng& rng) {
  const std::uint64_t master = rng.next_u64();
  if (!theta.is_valid()) return SimFailure{FailureStage::Constraint, "non-finite or non-positive parameters"};
  LinearParams lin;
  try {
    lin = to_linear(theta);
  } catch (const ConstraintViolation& e) {
    return SimFailure{FailureStage::Constraint, e.what()};
  }

  const ExtinctionResult ext = extinction_probability(lin, designs.sc.kinetics.constants);
  if (!ext.converged) {
    std::ostringstream msg;
    msg << "extinction fixed point did not converge (residual " << ext.residual << ")";
    return SimFailure{FailureStage::Extinction, msg.str()};
  }
  if (ext.no_establishment()) {
    std::ostringstream msg;
    msg << "no establishment: p_est = " << ext.p_est;
    return SimFailure{FailureStage::Extinction, msg.str()};
  }

  SimulationOutput out;
  out.p_est = ext.p_est;
  auto sc = simulate_one(lin, ext, designs.sc, master, 0);
  if (auto* fail = std::get_if<SimFailure>(&sc)) return *fail;
  auto mc = simulate_one(lin, ext, designs.mc, master, 1);
  if (auto* fail = std::get_if<SimFailure>(&mc)) return *fail;

  auto& scb = std::get<Blocks>(sc);
  auto& mcb = std::get<Blocks>(mc);
  out.data.sc_rna = std::move(scb.rna);
  out.data.sc_ed = std::move(scb.ed);
  out.data.mc_rna = std::move(mcb.rna);
  out.data.mc_ed = std::move(mcb.ed);
  out.sc_trajectory = std::move(scb.trajectory);
  out.mc_trajectory = std::move(mcb.trajectory);
  return out;
}

}  // namespace virolfi
