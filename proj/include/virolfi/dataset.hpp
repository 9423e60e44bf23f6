#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "virolfi/ed_assay.hpp"

namespace virolfi {

struct RnaPoint {
  double time = 0.0;   // h
  double value = 0.0;  // vRNA/ml
  friend bool operator==(const RnaPoint&, const RnaPoint&) = default;
};

struct EdRow {
  double time = 0.0;  // h
  DilutionExponents exponents{};
  ColumnCounts counts{};
  friend bool operator==(const EdRow&, const EdRow&) = default;
};

/// The four measurement blocks. Observed and simulated data share this type.
struct Dataset {
  std::vector<RnaPoint> sc_rna;
  std::vector<RnaPoint> mc_rna;
  std::vector<EdRow> sc_ed;
  std::vector<EdRow> mc_ed;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

struct DatasetPaths {
  std::filesystem::path sc_rna, mc_rna, sc_ed, mc_ed;

  /// sc_rna.csv, mc_rna.csv, sc_ed.csv, mc_ed.csv inside `dir`.
  static DatasetPaths in_directory(const std::filesystem::path& dir);
};

/// Directory holding the bundled measurement tables.
std::filesystem::path bundled_data_dir();

std::vector<RnaPoint> read_rna_csv(const std::filesystem::path& path);
std::vector<EdRow> read_ed_csv(const std::filesystem::path& path, int max_count = 4);
void write_rna_csv(const std::filesystem::path& path, const std::vector<RnaPoint>& rows, const std::string& comment = {});
void write_ed_csv(const std::filesystem::path& path, const std::vector<EdRow>& rows, const std::string& comment = {});

Dataset load_observed(const DatasetPaths& paths);
void write_dataset(const DatasetPaths& paths, const Dataset& data);

/// Same row counts per block and the same time and dilution schedule per row.
bool same_shape(const Dataset& a, const Dataset& b);

}  // namespace virolfi
