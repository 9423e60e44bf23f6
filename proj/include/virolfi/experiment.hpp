#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "virolfi/dataset.hpp"
#include "virolfi/ed_assay.hpp"
#include "virolfi/kinetics.hpp"
#include "virolfi/model_params.hpp"
#include "virolfi/rng.hpp"

namespace virolfi {

/// Independent noisy realizations simulated per parameter set; replicate rows
/// of every time step are drawn from these without replacement.
inline constexpr int kRealizations = 6;

enum class ExperimentMode { SingleCycle, MultipleCycle };

/// Experiment-level settings not tied to one parameter set.
struct ExperimentSettings {
  FixedConstants constants;
  StageRateMode stage_rate_mode = StageRateMode::PhaseMean;
  double max_step = 0.01;
  double max_rate_step = 0.05;
  bool media_exchange = true;
  double media_exchange_fraction = 0.05;

  double sc_t_start = -1.0;
  double sc_rinse_residual_fraction = 0.25;
  double sc_extra_rna = 1.0e8;    // non-infectious vRNA in the SC inoculum
  double mc_inoculum_sin = 100.0;  // SIN added at t = 0 for MC
  double mc_extra_rna = 2.0e5;    // non-infectious vRNA in the MC inoculum

  /// Endpoint-dilution plates read the noisy realization instead of the ODE
  /// output when set.
  bool ed_uses_noisy_v = false;

  void validate() const;
};

struct ExperimentDesign {
  ExperimentMode mode = ExperimentMode::SingleCycle;
  std::vector<double> sample_times;
  std::vector<int> rna_replicates_per_time;
  std::vector<int> ed_replicates_per_time;
  /// Row layout of the observed blocks; simulated data reuse it verbatim.
  std::vector<RnaPoint> rna_rows;
  std::vector<EdRow> ed_rows;
  std::vector<std::size_t> rna_row_step;  // time-step index of every RNA row
  std::vector<std::size_t> ed_row_step;   // time-step index of every ED row
  /// Initial conditions are filled per parameter set; everything else is fixed.
  KineticsConfig kinetics;
  double inoculum_sin = 0.0;
  double extra_rna = 0.0;
  double rna_sigma = 0.0;
  bool ed_uses_noisy_v = false;

  std::size_t steps() const { return sample_times.size(); }
};

struct ExperimentDesigns {
  ExperimentDesign sc;
  ExperimentDesign mc;
};

/// Groups observed rows into time steps (RNA and ED times are matched to
/// within 1e-3 h) and builds both designs.
ExperimentDesigns build_designs(const Dataset& observed, const ExperimentSettings& settings);

ExperimentDesign build_design(ExperimentMode mode, const std::vector<RnaPoint>& rna, const std::vector<EdRow>& ed,
                              const ExperimentSettings& settings);

enum class FailureStage { Constraint, Extinction, Integration, Plate };
std::string_view failure_stage_name(FailureStage stage);

struct SimFailure {
  FailureStage stage = FailureStage::Constraint;
  std::string detail;
};

struct SimulationOutput {
  Dataset data;
  Trajectory sc_trajectory;
  Trajectory mc_trajectory;
  double p_est = 0.0;
};

using SimulationResult = std::variant<SimulationOutput, SimFailure>;

/// Full SC + MC simulation of one parameter set. All randomness is derived
/// from one draw of `rng`, so the result depends only on theta and the
/// stream position.
SimulationResult simulate_experiments(const ParamVector& theta, const ExperimentDesigns& designs, Rng& rng);

/// Draws `k` distinct indices from [0, n) uniformly (partial Fisher-Yates).
std::vector<int> choose_without_replacement(int n, int k, Rng& rng);

}  // namespace virolfi
