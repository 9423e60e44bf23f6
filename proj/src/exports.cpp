#include "virolfi/exports.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

#include "virolfi/dataset.hpp"
#include "virolfi/experiment.hpp"
#include "virolfi/logging.hpp"

namespace virolfi {
namespace {

using nlohmann::json;
constexpr int kDim = static_cast<int>(kNumParams);

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Short fixed-precision number for SVG coordinates and tables.
std::string num(double x, int digits = 2) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, int cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != static_cast<std::size_t>(cols)) throw std::runtime_error("model: input row has wrong width");
    for (int j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

bool is_log10_param(std::size_t i) { return i < static_cast<std::size_t>(Param::TauE); }

SlicePoint evaluate(const InferenceResult& result, const ParamVector& theta) {
  SlicePoint p;
  p.theta = theta.to_array();
  p.in_prior = result.prior.contains(theta);
  p.pred = result.surrogate.predict(theta);
  return p;
}

// Maps data coordinates onto a rectangle of an SVG canvas.
struct Panel {
  double x0, y0, w, h;
  double xmin, xmax, ymin, ymax;
  double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

void panel_frame(std::ostream& svg, const Panel& p, const std::string& xlabel, const std::string& ylabel) {
  svg << "<rect x=\"" << num(p.x0) << "\" y=\"" << num(p.y0) << "\" width=\"" << num(p.w) << "\" height=\""
      << num(p.h) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  svg << "<text x=\"" << num(p.x0 + p.w / 2) << "\" y=\"" << num(p.y0 + p.h + 28)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << "</text>\n";
  svg << "<text x=\"" << num(p.x0 - 38) << "\" y=\"" << num(p.y0 + p.h / 2) << "\" font-size=\"12\" transform=\"rotate(-90 "
      << num(p.x0 - 38) << ' ' << num(p.y0 + p.h / 2) << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = p.xmin + (p.xmax - p.xmin) * k / 4.0;
    const double yv = p.ymin + (p.ymax - p.ymin) * k / 4.0;
    svg << "<text x=\"" << num(p.px(xv)) << "\" y=\"" << num(p.y0 + p.h + 13)
        << "\" text-anchor=\"middle\" font-size=\"9\">" << num(xv) << "</text>\n";
    svg << "<text x=\"" << num(p.x0 - 4) << "\" y=\"" << num(p.py(yv) + 3) << "\" text-anchor=\"end\" font-size=\"9\">"
        << num(yv, 1) << "</text>\n";
  }
}

void polyline(std::ostream& svg, const Panel& p, const std::vector<std::pair<double, double>>& pts,
              const std::string& style) {
  if (pts.size() < 2) return;
  svg << "<polyline fill=\"none\" " << style << " points=\"";
  for (const auto& [x, y] : pts) svg << num(p.px(x)) << ',' << num(p.py(y)) << ' ';
  svg << "\"/>\n";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) f.push_back(item);
  return f;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error(where + ": bad number '" + s + "'");
  return v;
}

}  // namespace

void save_model(const std::filesystem::path& path, const InferenceResult& result, const RunConfig& cfg) {
  const Surrogate& s = result.surrogate;
  json j;
  j["format"] = "virolfi-model";
  j["version"] = 1;
  j["config"] = format_config(cfg);
  j["threshold"] = result.h;
  j["attempts"] = result.evidence.size();
  j["successes"] = result.evidence.successes();
  const KernelHyper& kh = s.regressor.hyper();
  j["regressor"] = {{"signal_var", kh.signal_var},
                    {"length_scales", vector_to_json(kh.length_scales)},
                    {"noise_var", kh.noise_var},
                    {"inputs", matrix_to_json(s.regressor.inputs())},
                    {"targets", vector_to_json(s.regressor.targets())}};
  j["classifier"] = {{"signal_var", s.classifier.hyper().signal_var},
                     {"length_scale", s.classifier.hyper().length_scale},
                     {"inputs", matrix_to_json(s.classifier.inputs())},
                     {"labels", s.classifier.labels()},
                     {"latent_mode", vector_to_json(s.classifier.latent_mode())}};
  auto out = open_out(path);
  out << j.dump(1) << '\n';
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  try {
    if (j.at("format") != "virolfi-model" || j.at("version") != 1) throw std::runtime_error("unsupported model format");
    LoadedModel m;
    std::istringstream cfg_text(j.at("config").get<std::string>());
    m.config = parse_config(cfg_text);
    InferenceResult& r = m.result;
    r.prior = m.config.prior;
    r.config = m.config.bolfi;
    r.h = j.at("threshold").get<double>();
    m.attempts = j.at("attempts").get<int>();
    m.successes = j.at("successes").get<int>();
    r.surrogate = Surrogate(r.prior);

    const json& g = j.at("regressor");
    KernelHyper kh;
    kh.signal_var = g.at("signal_var").get<double>();
    kh.length_scales = vector_from_json(g.at("length_scales"));
    kh.noise_var = g.at("noise_var").get<double>();
    r.surrogate.regressor = GPRegressor(kh);
    r.surrogate.regressor.fit(matrix_from_json(g.at("inputs"), kDim), vector_from_json(g.at("targets")));

    const json& c = j.at("classifier");
    ClassifierHyper ch{c.at("signal_var").get<double>(), c.at("length_scale").get<double>()};
    r.surrogate.classifier = GPClassifier(kDim, ch);
    const Eigen::MatrixXd cx = matrix_from_json(c.at("inputs"), kDim);
    if (cx.rows() > 0)
      r.surrogate.classifier.fit(cx, c.at("labels").get<std::vector<int>>(), vector_from_json(c.at("latent_mode")));
    return m;
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

ParamVector best_evidence_point(const InferenceResult& result) {
  const Surrogate& s = result.surrogate;
  const Eigen::MatrixXd& x = s.regressor.inputs();
  if (x.rows() == 0) throw std::runtime_error("surrogate has no successful evidence");
  double best = std::numeric_limits<double>::infinity();
  ParamVector arg = s.from_unit(x.row(0).transpose());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::VectorXd u = x.row(i).transpose();
    const ParamVector theta = s.from_unit(u);
    if (!result.prior.contains(theta)) continue;
    const PredictiveDist p = s.predict_unit(u);
    if (p.valid && p.mean < best) best = p.mean, arg = theta;
  }
  return arg;
}

std::vector<SlicePoint> slice_1d(const InferenceResult& result, const ParamVector& anchor, std::size_t dim, int points) {
  const Bounds& b = result.prior.bounds[dim];
  std::vector<SlicePoint> out;
  for (int k = 0; k < points; ++k) {
    ParamVector theta = anchor;
    theta[dim] = b.lower + b.width() * k / (points - 1);
    out.push_back(evaluate(result, theta));
  }
  return out;
}

std::vector<SlicePoint> slice_2d(const InferenceResult& result, const ParamVector& anchor, std::size_t dim_a,
                                 std::size_t dim_b, int points) {
  const Bounds& ba = result.prior.bounds[dim_a];
  const Bounds& bb = result.prior.bounds[dim_b];
  std::vector<SlicePoint> out;
  for (int a = 0; a < points; ++a) {
    for (int c = 0; c < points; ++c) {
      ParamVector theta = anchor;
      theta[dim_a] = ba.lower + ba.width() * a / (points - 1);
      theta[dim_b] = bb.lower + bb.width() * c / (points - 1);
      out.push_back(evaluate(result, theta));
    }
  }
  return out;
}

double slice_minimizer(const std::vector<SlicePoint>& slice, std::size_t dim) {
  double best = std::numeric_limits<double>::infinity();
  double arg = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : slice) {
    if (p.in_prior && p.pred.valid && p.pred.mean < best) best = p.pred.mean, arg = p.theta[dim];
  }
  return arg;
}

void write_slices(const std::filesystem::path& dir, const InferenceResult& result, const SliceConfig& cfg) {
  const ParamVector anchor = cfg.has_anchor ? cfg.anchor : best_evidence_point(result);
  std::string anchor_text;
  for (std::size_t i = 0; i < kNumParams; ++i) anchor_text += (i ? "," : "") + fmt(anchor[i]);

  std::vector<std::vector<SlicePoint>> slices;
  {
    auto out = open_out(dir / "slices_1d.csv");
    out << "# surrogate d_norm slices through " << anchor_text << "; threshold " << fmt(result.h) << '\n';
    out << "param,value,mean,sd,lower95,upper95,valid_prob,valid,in_prior\n";
    for (std::size_t d = 0; d < kNumParams; ++d) {
      slices.push_back(slice_1d(result, anchor, d, cfg.points_1d));
      for (const auto& p : slices.back()) {
        const double sd = std::sqrt(p.pred.variance);
        out << param_name(d) << ',' << fmt(p.theta[d]) << ',' << fmt(p.pred.mean) << ',' << fmt(sd) << ','
            << fmt(p.pred.mean - 1.96 * sd) << ',' << fmt(p.pred.mean + 1.96 * sd) << ',' << fmt(p.pred.valid_prob)
            << ',' << (p.pred.valid ? 1 : 0) << ',' << (p.in_prior ? 1 : 0) << '\n';
      }
    }
  }
  {
    auto out = open_out(dir / "slices_2d.csv");
    out << "# surrogate d_norm slices through " << anchor_text << '\n';
    out << "param_a,param_b,value_a,value_b,mean,sd,valid_prob,valid,in_prior\n";
    for (std::size_t a = 0; a < kNumParams; ++a) {
      for (std::size_t b = a + 1; b < kNumParams; ++b) {
        for (const auto& p : slice_2d(result, anchor, a, b, cfg.points_2d)) {
          out << param_name(a) << ',' << param_name(b) << ',' << fmt(p.theta[a]) << ',' << fmt(p.theta[b]) << ','
              << fmt(p.pred.mean) << ',' << fmt(std::sqrt(p.pred.variance)) << ',' << fmt(p.pred.valid_prob) << ','
              << (p.pred.valid ? 1 : 0) << ',' << (p.in_prior ? 1 : 0) << '\n';
        }
      }
    }
  }

  auto svg = open_out(dir / "slices_1d.svg");
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"560\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"960\" height=\"560\" fill=\"white\"/>\n";
  for (std::size_t d = 0; d < kNumParams; ++d) {
    const auto& sl = slices[d];
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : sl) {
      if (!p.pred.valid) continue;
      const double sd = std::sqrt(p.pred.variance);
      lo = std::min(lo, p.pred.mean - 1.96 * sd);
      hi = std::max(hi, p.pred.mean + 1.96 * sd);
    }
    if (!(lo < hi)) lo = -1.0, hi = 1.0;
    const Bounds& b = result.prior.bounds[d];
    const Panel panel{70.0 + 310.0 * (d % 3), 30.0 + 270.0 * (d / 3), 240.0, 190.0, b.lower, b.upper, lo, hi};
    panel_frame(svg, panel, std::string(param_name(d)), "d_norm");
    // Valid runs of consecutive points are drawn as separate segments.
    std::vector<std::pair<double, double>> mean, upper, lower;
    auto flush = [&] {
      if (!mean.empty()) {
        std::vector<std::pair<double, double>> band = upper;
        band.insert(band.end(), lower.rbegin(), lower.rend());
        svg << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
        for (const auto& [x, y] : band) svg << num(panel.px(x)) << ',' << num(panel.py(y)) << ' ';
        svg << "\"/>\n";
        polyline(svg, panel, mean, "stroke=\"#08519c\" stroke-width=\"1.5\"");
      }
      mean.clear(), upper.clear(), lower.clear();
    };
    for (const auto& p : sl) {
      if (!p.pred.valid) {
        flush();
        svg << "<line x1=\"" << num(panel.px(p.theta[d])) << "\" x2=\"" << num(panel.px(p.theta[d])) << "\" y1=\""
            << num(panel.y0 + panel.h) << "\" y2=\"" << num(panel.y0 + panel.h - 6) << "\" stroke=\"#999\"/>\n";
        continue;
      }
      const double sd = std::sqrt(p.pred.variance);
      mean.emplace_back(p.theta[d], p.pred.mean);
      upper.emplace_back(p.theta[d], p.pred.mean + 1.96 * sd);
      lower.emplace_back(p.theta[d], p.pred.mean - 1.96 * sd);
    }
    flush();
    svg << "<line x1=\"" << num(panel.px(anchor[d])) << "\" x2=\"" << num(panel.px(anchor[d])) << "\" y1=\""
        << num(panel.y0) << "\" y2=\"" << num(panel.y0 + panel.h) << "\" stroke=\"#d62728\" stroke-dasharray=\"4 3\"/>\n";
  }
  svg << "</svg>\n";
}

void write_samples_csv(const std::filesystem::path& path, const PosteriorSamples& samples) {
  auto out = open_out(path);
  out << "chain,iteration";
  for (std::size_t i = 0; i < kNumParams; ++i) out << ',' << param_name(i);
  out << '\n';
  for (std::size_t c = 0; c < samples.chains.size(); ++c) {
    const Eigen::MatrixXd& m = samples.chains[c];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      out << c << ',' << i;
      for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << fmt(m(i, j));
      out << '\n';
    }
  }
}

PosteriorSamples read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open samples file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty samples file");
  std::map<int, std::vector<std::vector<double>>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (f.size() != 2 + kNumParams) throw std::runtime_error(where + ": expected 8 columns");
    const int chain = static_cast<int>(parse_double(f[0], where));
    std::vector<double> draw;
    for (std::size_t j = 0; j < kNumParams; ++j) draw.push_back(parse_double(f[2 + j], where));
    rows[chain].push_back(std::move(draw));
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": no samples");
  PosteriorSamples s;
  for (const auto& [chain, draws] : rows) {
    if (draws.size() != rows.begin()->second.size()) throw std::runtime_error(path.string() + ": chains differ in length");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(draws.size()), kDim);
    for (std::size_t i = 0; i < draws.size(); ++i)
      for (int j = 0; j < kDim; ++j) m(static_cast<Eigen::Index>(i), j) = draws[i][static_cast<std::size_t>(j)];
    s.chains.push_back(std::move(m));
  }
  return s;
}

void write_summary_csv(const std::filesystem::path& path, const Diagnostics& diag) {
  auto out = open_out(path);
  out << "param,mean,median,q025,q975,sd,rhat,ess,mean_linear,median_linear,q025_linear,q975_linear\n";
  for (std::size_t i = 0; i < diag.params.size(); ++i) {
    const ParamSummary& s = diag.params[i];
    auto lin = [&](double x) { return is_log10_param(i) ? std::pow(10.0, x) : x; };
    out << param_name(i) << ',' << fmt(s.mean) << ',' << fmt(s.median) << ',' << fmt(s.q025) << ',' << fmt(s.q975)
        << ',' << fmt(s.sd) << ',' << fmt(s.rhat) << ',' << fmt(s.ess) << ',' << fmt(lin(s.mean)) << ','
        << fmt(lin(s.median)) << ',' << fmt(lin(s.q025)) << ',' << fmt(lin(s.q975)) << '\n';
  }
}

std::string summary_table(const Diagnostics& diag) {
  std::ostringstream out;
  out << "| param | mean [95% CI] | median | linear median | R-hat | ESS |\n";
  out << "|---|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < diag.params.size(); ++i) {
    const ParamSummary& s = diag.params[i];
    char lin[64];
    if (is_log10_param(i))
      std::snprintf(lin, sizeof lin, "10^%.2f = %.4g", s.median, std::pow(10.0, s.median));
    else
      std::snprintf(lin, sizeof lin, "%.3f h", s.median);
    out << "| " << param_name(i) << " | " << num(s.mean, 3) << " [" << num(s.q025, 3) << ", " << num(s.q975, 3)
        << "] | " << num(s.median, 3) << " | " << lin << " | " << num(s.rhat, 4) << " | " << num(s.ess, 0) << " |\n";
  }
  out << "\n" << diag.total_retained << " retained draws (" << diag.retained_per_chain << " per chain)\n";
  for (const auto& w : diag.warnings) out << "warning: " << w << '\n';
  return out.str();
}

void write_sampler_info(const std::filesystem::path& path, const PosteriorSamples& samples) {
  auto out = open_out(path);
  out << "chain,acceptance_rate,proposal_scale,adaptation_batches\n";
  for (std::size_t c = 0; c < samples.chains.size(); ++c) {
    out << c << ',' << fmt(c < samples.acceptance_rates.size() ? samples.acceptance_rates[c] : NAN) << ','
        << fmt(c < samples.proposal_scales.size() ? samples.proposal_scales[c] : NAN) << ','
        << (c < samples.adaptation_batches.size() ? samples.adaptation_batches[c] : 0) << '\n';
  }
}

void write_predictive(const std::filesystem::path& dir, const PosteriorSamples& samples, const RunConfig& cfg,
                      int draws, double burn_in_fraction) {
  const Dataset observed = load_observed(DatasetPaths::in_directory(cfg.resolved_data_dir()));
  const ExperimentDesigns designs = build_designs(observed, cfg.experiment);

  std::vector<ParamVector> pool;
  for (const auto& m : samples.chains) {
    const auto skip = static_cast<Eigen::Index>(std::floor(burn_in_fraction * static_cast<double>(m.rows())));
    for (Eigen::Index i = skip; i < m.rows(); ++i) {
      std::array<double, kNumParams> a{};
      for (int j = 0; j < kDim; ++j) a[static_cast<std::size_t>(j)] = m(i, j);
      pool.push_back(ParamVector::from_array(a));
    }
  }
  if (pool.empty()) throw std::runtime_error("no retained posterior draws for the predictive check");
  draws = std::min<int>(draws, static_cast<int>(pool.size()));

  auto rna = open_out(dir / "predictive_rna.csv");
  auto ed = open_out(dir / "predictive_ed.csv");
  rna << "experiment,source,draw,time,vrna_per_ml\n";
  ed << "experiment,source,draw,time,infected_wells\n";
  auto emit = [&](const Dataset& d, const std::string& source, int draw) {
    for (const auto& [name, block] : {std::pair{"sc", &d.sc_rna}, std::pair{"mc", &d.mc_rna}})
      for (const auto& p : *block) rna << name << ',' << source << ',' << draw << ',' << fmt(p.time) << ',' << fmt(p.value) << '\n';
    for (const auto& [name, block] : {std::pair{"sc", &d.sc_ed}, std::pair{"mc", &d.mc_ed}}) {
      for (const auto& row : *block) {
        int total = 0;
        for (int c : row.counts) total += c;
        ed << name << ',' << source << ',' << draw << ',' << fmt(row.time) << ',' << total << '\n';
      }
    }
  };
  emit(observed, "observed", -1);

  std::vector<Dataset> simulated;
  int failed = 0;
  for (int k = 0; k < draws; ++k) {
    const std::size_t idx = draws == 1 ? 0 : static_cast<std::size_t>(k) * (pool.size() - 1) / static_cast<std::size_t>(draws - 1);
    Rng rng(derive_seed(cfg.seed, {0x9E01, static_cast<std::uint64_t>(k)}));
    const SimulationResult sim = simulate_experiments(pool[idx], designs, rng);
    if (const auto* fail = std::get_if<SimFailure>(&sim)) {
      ++failed;
      log::info("predictive draw " + std::to_string(k) + " failed: " + fail->detail);
      continue;
    }
    simulated.push_back(std::get<SimulationOutput>(sim).data);
    emit(simulated.back(), "simulated", k);
  }
  if (failed > 0) log::warn(std::to_string(failed) + " of " + std::to_string(draws) + " predictive simulations failed");

  // Two panels: log10 vRNA over time, SC and MC.
  auto svg = open_out(dir / "predictive.svg");
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"340\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"900\" height=\"340\" fill=\"white\"/>\n";
  for (int e = 0; e < 2; ++e) {
    auto block = [e](const Dataset& d) -> const std::vector<RnaPoint>& { return e == 0 ? d.sc_rna : d.mc_rna; };
    double tmin = INFINITY, tmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    auto extend = [&](const std::vector<RnaPoint>& pts) {
      for (const auto& p : pts) {
        tmin = std::min(tmin, p.time), tmax = std::max(tmax, p.time);
        ymin = std::min(ymin, std::log10(p.value)), ymax = std::max(ymax, std::log10(p.value));
      }
    };
    extend(block(observed));
    for (const auto& d : simulated) extend(block(d));
    if (!(tmin < tmax)) tmax = tmin + 1.0;
    if (!(ymin < ymax)) ymax = ymin + 1.0;
    const Panel panel{70.0 + 430.0 * e, 30.0, 370.0, 250.0, tmin, tmax, std::floor(ymin), std::ceil(ymax)};
    panel_frame(svg, panel, e == 0 ? "single-cycle time (h)" : "multiple-cycle time (h)", "log10 vRNA/ml");
    for (const auto& d : simulated) {
      std::vector<std::pair<double, double>> line;
      for (const auto& p : block(d)) {
        if (!line.empty() && std::abs(line.back().first - p.time) < 1e-3) continue;
        line.emplace_back(p.time, std::log10(p.value));
      }
      polyline(svg, panel, line, "stroke=\"#6baed6\" stroke-opacity=\"0.4\"");
    }
    for (const auto& p : block(observed)) {
      svg << "<circle cx=\"" << num(panel.px(p.time)) << "\" cy=\"" << num(panel.py(std::log10(p.value)))
          << "\" r=\"2.5\" fill=\"black\"/>\n";
    }
  }
  svg << "</svg>\n";
}

}  // namespace virolfi
