#include <fstream>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"
#include "toy_model.hpp"
#include "virolfi/exports.hpp"

using namespace virolfi;
using namespace virolfi::testing;

namespace {

RunConfig toy_config() {
  RunConfig cfg;
  cfg.bolfi = toy_run().config;
  cfg.seed = 17;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("slices evaluate the surrogate directly") {
  const InferenceResult& r = toy_run();
  const ParamVector anchor = best_evidence_point(r);
  for (std::size_t d = 0; d < kNumParams; ++d) {
    const auto sl = slice_1d(r, anchor, d, 25);
    REQUIRE(sl.size() == 25);
    CHECK(sl.front().theta[d] == r.prior.bounds[d].lower);
    CHECK(sl.back().theta[d] == doctest::Approx(r.prior.bounds[d].upper).epsilon(1e-15));
    for (const auto& p : sl) {
      const PredictiveDist direct = r.surrogate.predict(ParamVector::from_array(p.theta));
      CHECK(std::abs(p.pred.mean - direct.mean) <= 1e-12 * std::max(1.0, std::abs(direct.mean)));
      CHECK(std::abs(p.pred.variance - direct.variance) <= 1e-12);
      for (std::size_t o = 0; o < kNumParams; ++o)
        if (o != d) CHECK(p.theta[o] == anchor[o]);
    }
    const double m = slice_minimizer(sl, d);
    double best = INFINITY;
    for (const auto& p : sl)
      if (p.pred.valid && p.in_prior) best = std::min(best, p.pred.mean);
    for (const auto& p : sl)
      if (p.theta[d] == m) CHECK(p.pred.mean == best);
  }
  const auto two = slice_2d(r, anchor, 0, 4, 7);
  CHECK(two.size() == 49);
}

TEST_CASE("model files round trip") {
  const auto dir = scratch_dir("model");
  const RunConfig cfg = toy_config();
  save_model(dir / "model.json", toy_run(), cfg);
  const LoadedModel m = load_model(dir / "model.json");
  CHECK(format_config(m.config) == format_config(cfg));
  CHECK(m.result.h == toy_run().h);
  CHECK(m.attempts == 60);
  CHECK(m.successes == toy_run().evidence.successes());
  CHECK(m.result.surrogate.regressor.size() == m.successes);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const ParamVector th = sample_prior(rng, toy_run().prior);
    const PredictiveDist a = toy_run().surrogate.predict(th), b = m.result.surrogate.predict(th);
    CHECK(a.valid == b.valid);
    CHECK(b.mean == doctest::Approx(a.mean).epsilon(1e-9));
    CHECK(b.valid_prob == doctest::Approx(a.valid_prob).epsilon(1e-8));
  }
  save_model(dir / "again.json", toy_run(), cfg);
  CHECK(slurp(dir / "again.json") == slurp(dir / "model.json"));
}

TEST_CASE("slice files have the documented layout") {
  const auto dir = scratch_dir("slices");
  SliceConfig sc;
  sc.points_1d = 11;
  sc.points_2d = 4;
  write_slices(dir, toy_run(), sc);
  std::ifstream in(dir / "slices_1d.csv");
  std::string comment, header, line;
  std::getline(in, comment);
  std::getline(in, header);
  CHECK(comment.rfind("# ", 0) == 0);
  CHECK(header == "param,value,mean,sd,lower95,upper95,valid_prob,valid,in_prior");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 66);
  std::ifstream in2(dir / "slices_2d.csv");
  rows = 0;
  while (std::getline(in2, line)) ++rows;
  CHECK(rows == 2 + 15 * 16);
  CHECK(std::filesystem::file_size(dir / "slices_1d.svg") > 0);
}

TEST_CASE("posterior sampling of the surrogate and sample files") {
  SamplerConfig sc;
  sc.chains = 2;
  sc.n = 2000;
  const PosteriorSamples s = sample_posterior(toy_run(), sc, 3);
  REQUIRE(s.chains.size() == 2);
  for (const auto& c : s.chains)
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      const ParamVector th = ParamVector::from_array({c(i, 0), c(i, 1), c(i, 2), c(i, 3), c(i, 4), c(i, 5)});
      CHECK(std::isfinite(unnormalized_log_posterior(toy_run(), th)));
    }
  const PosteriorSamples again = sample_posterior(toy_run(), sc, 3);
  CHECK(again.chains[1] == s.chains[1]);

  const auto dir = scratch_dir("samples");
  write_samples_csv(dir / "samples.csv", s);
  const PosteriorSamples back = read_samples_csv(dir / "samples.csv");
  REQUIRE(back.chains.size() == 2);
  CHECK(back.chains[0] == s.chains[0]);

  const Diagnostics diag = compute_diagnostics(s);
  write_summary_csv(dir / "summary.csv", diag);
  std::ifstream in(dir / "summary.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "param,mean,median,q025,q975,sd,rhat,ess,mean_linear,median_linear,q025_linear,q975_linear");
  CHECK(first.rfind("gamma,", 0) == 0);
  CHECK(summary_table(diag).find("tauI") != std::string::npos);

  std::ofstream(dir / "empty.csv");
  CHECK_THROWS(read_samples_csv(dir / "empty.csv"));
}

TEST_CASE("linear columns back-transform the log10 parameters") {
  PosteriorSamples s;
  for (int c = 0; c < 2; ++c) {
    Eigen::MatrixXd m(200, 6);
    for (int i = 0; i < 200; ++i) m.row(i) << 0.0, -7.0, 1.0, 3.22, 5.0, 20.0;
    s.chains.push_back(m);
  }
  const auto dir = scratch_dir("linear");
  write_summary_csv(dir / "summary.csv", compute_diagnostics(s));
  std::ifstream in(dir / "summary.csv");
  std::string line;
  std::getline(in, line);
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  REQUIRE(rows.size() == 6);
  auto field = [](const std::string& row, int k) {
    std::stringstream ss(row);
    std::string f;
    for (int i = 0; i <= k; ++i) std::getline(ss, f, ',');
    return std::stod(f);
  };
  CHECK(field(rows[3], 9) == doctest::Approx(std::pow(10.0, 3.22)).epsilon(1e-12));
  CHECK(field(rows[4], 9) == doctest::Approx(5.0));
}
