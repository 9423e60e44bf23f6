#include "virolfi/run_log.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "virolfi/dataset.hpp"
#include "virolfi/logging.hpp"

namespace virolfi {
namespace {

constexpr const char* kHeader =
    "index,phase,seed,gamma,beta,p,prna,tauE,tauI,status,stage,d1,d2,d3,d4,d13,d24,d,d_norm,d_masked,detail";
constexpr std::size_t kColumns = 21;

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Keeps the detail column free of separators and line breaks.
std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return out;
}

double parse_number(const std::string& s, const std::string& file, int line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(file, line, "bad number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, std::size_t max_fields) {
  std::vector<std::string> f;
  std::size_t start = 0;
  while (f.size() + 1 < max_fields) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) break;
    f.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  f.push_back(line.substr(start));
  return f;
}

}  // namespace

RunLogWriter::RunLogWriter(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  out_ << kHeader << '\n';
  out_.flush();
}

RunLogWriter::RunLogWriter(const std::filesystem::path& path, const std::vector<EvidenceEntry>& entries)
    : RunLogWriter(path) {
  for (const auto& e : entries) append(e);
}

void RunLogWriter::append(const EvidenceEntry& e) {
  const auto& b = e.breakdown;
  out_ << e.index << ',' << (e.from_init ? "init" : "acquire") << ',' << e.seed;
  for (std::size_t i = 0; i < kNumParams; ++i) out_ << ',' << fmt(e.theta[i]);
  out_ << ',' << (e.failed ? "failed" : "ok") << ',' << (e.failed ? e.failure_stage : "");
  for (double v : {b.d1, b.d2, b.d3, b.d4, b.d13, b.d24, b.d, b.d_norm, b.d_masked}) out_ << ',' << fmt(v);
  out_ << ',' << sanitize(e.failure_detail) << '\n';
  out_.flush();
}

std::vector<EvidenceEntry> read_run_log(const std::filesystem::path& path) {
  const std::string file = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(file, 0, "cannot open run log");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::vector<EvidenceEntry> entries;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    ++line_no;
    if (nl == std::string::npos) {
      log::warn(file + ": dropping incomplete last line " + std::to_string(line_no));
      break;
    }
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line_no == 1) {
      if (line != kHeader) throw ParseError(file, 1, "unexpected run-log header");
      continue;
    }
    const auto f = split(line, kColumns);
    if (f.size() != kColumns) throw ParseError(file, line_no, "expected " + std::to_string(kColumns) + " columns");

    EvidenceEntry e;
    int index = 0;
    if (std::from_chars(f[0].data(), f[0].data() + f[0].size(), index).ec != std::errc())
      throw ParseError(file, line_no, "bad index");
    e.index = index;
    if (f[1] != "init" && f[1] != "acquire") throw ParseError(file, line_no, "phase must be init or acquire");
    e.from_init = f[1] == "init";
    if (std::from_chars(f[2].data(), f[2].data() + f[2].size(), e.seed).ec != std::errc())
      throw ParseError(file, line_no, "bad seed");
    for (std::size_t i = 0; i < kNumParams; ++i) e.theta[i] = parse_number(f[3 + i], file, line_no);
    if (f[9] != "ok" && f[9] != "failed") throw ParseError(file, line_no, "status must be ok or failed");
    e.failed = f[9] == "failed";
    e.failure_stage = f[10];
    auto& b = e.breakdown;
    double* fields[] = {&b.d1, &b.d2, &b.d3, &b.d4, &b.d13, &b.d24, &b.d, &b.d_norm, &b.d_masked};
    for (std::size_t k = 0; k < 9; ++k) *fields[k] = parse_number(f[11 + k], file, line_no);
    b.failed = e.failed;
    e.failure_detail = f[20];
    if (e.index != static_cast<int>(entries.size())) throw ParseError(file, line_no, "attempt indices must be 0, 1, 2, ...");
    entries.push_back(std::move(e));
  }
  if (line_no == 0) throw ParseError(file, 0, "empty run log");
  return entries;
}

void write_timing_csv(const std::filesystem::path& path, const std::vector<EvidenceEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "index,phase,status,wall_seconds\n";
  for (const auto& e : entries)
    out << e.index << ',' << (e.from_init ? "init" : "acquire") << ',' << (e.failed ? "failed" : "ok") << ','
        << fmt(e.wall_seconds) << '\n';
}

}  // namespace virolfi
