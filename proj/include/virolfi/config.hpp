#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "virolfi/bolfi.hpp"
#include "virolfi/discrepancy.hpp"
#include "virolfi/experiment.hpp"
#include "virolfi/model_params.hpp"
#include "virolfi/sampler.hpp"

namespace virolfi {

struct SliceConfig {
  int points_1d = 100;
  int points_2d = 25;
  /// Slices pass through this point; unset means the best evidence point.
  bool has_anchor = false;
  ParamVector anchor;
};

/// Everything a run needs. The seed and this struct fully determine every
/// artifact apart from wall-clock timings.
struct RunConfig {
  PriorSpec prior = PriorSpec::defaults();
  ExperimentSettings experiment;
  DiscrepancyConfig discrepancy;
  AcquisitionConfig bolfi;
  SamplerConfig sampler;
  SliceConfig slices;
  std::uint64_t seed = 1;
  std::filesystem::path data_dir;  // empty means the bundled tables

  void validate() const;
  std::filesystem::path resolved_data_dir() const;
};

/// Parses `key = value` lines ('#' starts a comment; [section] headers
/// prefix the following keys). Unknown keys and malformed values raise
/// ConfigError. Relative data.dir values resolve against `base_dir`.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text form accepted by parse_config; every key is written.
std::string format_config(const RunConfig& cfg);

}  // namespace virolfi
