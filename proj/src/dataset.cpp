#include "virolfi/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace virolfi {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const std::string& file, int line) {
  double value = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value))
    throw ParseError(file, line, "not a finite number: '" + s + "'");
  return value;
}

int parse_int(const std::string& s, const std::string& file, int line) {
  int value = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ParseError(file, line, "not an integer: '" + s + "'");
  return value;
}

// Calls `row(fields, line_number)` for every non-blank, non-comment line.
template <typename F>
void for_each_row(const std::filesystem::path& path, F&& row) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::string line;
  int number = 0;
  bool any = false;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    any = true;
    row(split_fields(t), number);
  }
  if (!any) throw ParseError(path.string(), number, "no data rows");
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_comment(std::ofstream& out, const std::string& comment) {
  std::stringstream ss(comment);
  std::string line;
  while (std::getline(ss, line)) out << "# " << line << '\n';
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

bool same_ed_schedule(const std::vector<EdRow>& a, const std::vector<EdRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].time != b[i].time || a[i].exponents != b[i].exponents) return false;
  }
  return true;
}

bool same_rna_schedule(const std::vector<RnaPoint>& a, const std::vector<RnaPoint>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].time != b[i].time) return false;
  }
  return true;
}

}  // namespace

ParseError::ParseError(const std::string& file, int line, const std::string& what)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

DatasetPaths DatasetPaths::in_directory(const std::filesystem::path& dir) {
  return {dir / "sc_rna.csv", dir / "mc_rna.csv", dir / "sc_ed.csv", dir / "mc_ed.csv"};
}

std::filesystem::path bundled_data_dir() {
  if (const char* env = std::getenv("VIROLFI_DATA_DIR"); env && *env) return env;
  return VIROLFI_DATA_DIR;
}

std::vector<RnaPoint> read_rna_csv(const std::filesystem::path& path) {
  const std::string file = path.string();
  std::vector<RnaPoint> rows;
  for_each_row(path, [&](const std::vector<std::string>& f, int line) {
    if (f.size() != 2) throw ParseError(file, line, "expected 2 fields (time, vRNA/ml), got " + std::to_string(f.size()));
    RnaPoint p{parse_double(f[0], file, line), parse_double(f[1], file, line)};
    if (!(p.value > 0.0)) throw ParseError(file, line, "RNA value must be positive");
    if (!rows.empty() && p.time < rows.back().time) throw ParseError(file, line, "times must be non-decreasing");
    rows.push_back(p);
  });
  return rows;
}

std::vector<EdRow> read_ed_csv(const std::filesystem::path& path, int max_count) {
  const std::string file = path.string();
  std::vector<EdRow> rows;
  for_each_row(path, [&](const std::vector<std::string>& f, int line) {
    if (f.size() != 1 + 2 * kPlateColumns)
      throw ParseError(file, line, "expected 17 fields (time, 8 exponents, 8 counts), got " + std::to_string(f.size()));
    EdRow row;
    row.time = parse_double(f[0], file, line);
    for (std::size_t j = 0; j < kPlateColumns; ++j) {
      row.exponents[j] = parse_int(f[1 + j], file, line);
      row.counts[j] = parse_int(f[1 + kPlateColumns + j], file, line);
      if (row.counts[j] < 0 || row.counts[j] > max_count)
        throw ParseError(file, line, "count outside [0, " + std::to_string(max_count) + "]");
      if (j > 0 && !(row.exponents[j] < row.exponents[j - 1]))
        throw ParseError(file, line, "dilution exponents must strictly decrease");
    }
    if (!rows.empty() && row.time < rows.back().time) throw ParseError(file, line, "times must be non-decreasing");
    rows.push_back(row);
  });
  return rows;
}

void write_rna_csv(const std::filesystem::path& path, const std::vector<RnaPoint>& rows, const std::string& comment) {
  auto out = open_for_write(path);
  write_comment(out, comment);
  out << "# columns: time_h,vrna_per_ml\n";
  for (const auto& r : rows) out << format_double(r.time) << ',' << format_double(r.value) << '\n';
}

void write_ed_csv(const std::filesystem::path& path, const std::vector<EdRow>& rows, const std::string& comment) {
  auto out = open_for_write(path);
  write_comment(out, comment);
  out << "# columns: time_h,e1..e8 (dilution 10^e),c1..c8 (infected wells)\n";
  for (const auto& r : rows) {
    out << format_double(r.time);
    for (int e : r.exponents) out << ',' << e;
    for (int c : r.counts) out << ',' << c;
    out << '\n';
  }
}

Dataset load_observed(const DatasetPaths& paths) {
  Dataset d;
  d.sc_rna = read_rna_csv(paths.sc_rna);
  d.mc_rna = read_rna_csv(paths.mc_rna);
  d.sc_ed = read_ed_csv(paths.sc_ed);
  d.mc_ed = read_ed_csv(paths.mc_ed);
  return d;
}

void write_dataset(const DatasetPaths& paths, const Dataset& data) {
  write_rna_csv(paths.sc_rna, data.sc_rna, "single-cycle total viral RNA");
  write_rna_csv(paths.mc_rna, data.mc_rna, "multiple-cycle total viral RNA");
  write_ed_csv(paths.sc_ed, data.sc_ed, "single-cycle endpoint-dilution plates");
  write_ed_csv(paths.mc_ed, data.mc_ed, "multiple-cycle endpoint-dilution plates");
}

bool same_shape(const Dataset& a, const Dataset& b) {
  return same_rna_schedule(a.sc_rna, b.sc_rna) && same_rna_schedule(a.mc_rna, b.mc_rna) &&
         same_ed_schedule(a.sc_ed, b.sc_ed) && same_ed_schedule(a.mc_ed, b.mc_ed);
}

}  // namespace virolfi
