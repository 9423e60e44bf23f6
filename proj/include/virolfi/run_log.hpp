#pragma once

#include <filesystem>
#include <fstream>
#include <vector>

#include "virolfi/bolfi.hpp"

namespace virolfi {

/// Appends one CSV row per attempt and flushes after each row, so an
/// interrupted run leaves a readable prefix. Wall times go to a separate
/// timing table; the log itself is a deterministic function of the seed.
class RunLogWriter {
 public:
  /// Truncates `path` and writes the header.
  explicit RunLogWriter(const std::filesystem::path& path);
  /// Rewrites `path` with `entries` and keeps it open for appending.
  RunLogWriter(const std::filesystem::path& path, const std::vector<EvidenceEntry>& entries);

  void append(const EvidenceEntry& entry);

 private:
  std::ofstream out_;
};

/// Reads a run log. A truncated last line (no newline) is dropped with a
/// warning; any other malformed row is a ParseError.
std::vector<EvidenceEntry> read_run_log(const std::filesystem::path& path);

/// index,phase,status,wall_seconds for every attempt.
void write_timing_csv(const std::filesystem::path& path, const std::vector<EvidenceEntry>& entries);

}  // namespace virolfi
