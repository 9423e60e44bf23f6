#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "virolfi/model_params.hpp"
#include "virolfi/rng.hpp"

using namespace virolfi;

namespace {

// Kolmogorov-Smirnov distance between a sample and Uniform(lo, hi).
double ks_uniform(std::vector<double> xs, double lo, double hi) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = (xs[i] - lo) / (hi - lo);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

}  // namespace

TEST_CASE("prior draws respect the beta range of the default box") {
  const PriorSpec prior = PriorSpec::defaults();
  Rng rng(7);
  for (int i = 0; i < 5000; ++i) {
    const ParamVector th = sample_prior(rng, prior);
    CHECK(th.beta_log10 >= -8.0);
    CHECK(th.beta_log10 <= -6.0);
    CHECK(th.p_log10 < th.prna_log10);
    CHECK(prior.contains(th));
  }
}

TEST_CASE("collapsed bounds give the lower bound") {
  PriorSpec prior = PriorSpec::defaults();
  prior.adaptive_p_upper = false;
  for (auto& b : prior.bounds) b.upper = b.lower + 1e-12;
  prior.bounds[3] = {2.0, 2.0 + 1e-12};
  Rng rng(3);
  const ParamVector th = sample_prior(rng, prior);
  for (std::size_t i = 0; i < kNumParams; ++i) CHECK(std::abs(th[i] - prior.bounds[i].lower) < 1e-9);
}

TEST_CASE("marginals are uniform by a KS test when the p < prna coupling cannot bind") {
  PriorSpec prior = PriorSpec::defaults();
  prior.bounds[2] = {0.5, 2.0};  // p always below the prna box
  prior.p_upper_adaptive = 2.0;
  Rng rng(11);
  std::vector<std::vector<double>> cols(kNumParams);
  for (int i = 0; i < 10000; ++i) {
    const ParamVector th = sample_prior(rng, prior);
    for (std::size_t j = 0; j < kNumParams; ++j) cols[j].push_back(th[j]);
  }
  for (std::size_t j = 0; j < kNumParams; ++j) {
    CAPTURE(j);
    CHECK(ks_uniform(cols[j], prior.bounds[j].lower, prior.bounds[j].upper) < 0.02);
  }
}

TEST_CASE("log10 to linear conversion") {
  ParamVector th{0.0, -6.818, 1.690, 3.22, 5.0, 20.0};
  const LinearParams lin = to_linear(th);
  CHECK(lin.gamma == 1.0);
  CHECK(lin.p == doctest::Approx(48.9779).epsilon(1e-5));
  CHECK(lin.beta == doctest::Approx(1.5205e-7).epsilon(1e-4));
  CHECK(lin.tau_e == 5.0);
  CHECK(lin.tau_i == 20.0);

  th.p_log10 = 3.0;
  th.prna_log10 = 2.0;
  CHECK_THROWS_AS(to_linear(th), ConstraintViolation);
  CHECK(to_linear_unchecked(th).p == doctest::Approx(1000.0));
}

TEST_CASE("adaptive p bound only decreases") {
  const PriorSpec prior = PriorSpec::defaults();
  REQUIRE(prior.p_upper() == 3.0);
  CHECK(update_adaptive_bound(prior, 2.8).p_upper() == doctest::Approx(2.8));
  CHECK(update_adaptive_bound(prior, 3.5).p_upper() == 3.0);
  const PriorSpec a = update_adaptive_bound(prior, 2.9);
  const PriorSpec b = update_adaptive_bound(a, 3.1);
  CHECK(a.p_upper() == doctest::Approx(2.9));
  CHECK(b.p_upper() == doctest::Approx(2.9));
  // A bound below the p box is clamped just above its lower end.
  const PriorSpec c = update_adaptive_bound(prior, 0.1);
  CHECK(c.p_upper() > prior.bounds[2].lower);
}

TEST_CASE("prior log density") {
  const PriorSpec prior = PriorSpec::defaults();
  double expected = 0.0;
  for (const auto& b : prior.bounds) expected -= std::log(b.upper - b.lower);
  CHECK(log_prior_density(prior.center(), prior) == doctest::Approx(expected).epsilon(1e-14));

  ParamVector th = prior.center();
  th.beta_log10 = -9.0;
  CHECK(std::isinf(log_prior_density(th, prior)));
  th = prior.center();
  th.p_log10 = 2.5;
  th.prna_log10 = 2.4;
  CHECK(log_prior_density(th, prior) == -INFINITY);
}

TEST_CASE("unit-box map round trips") {
  const PriorSpec prior = PriorSpec::defaults();
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const ParamVector th = sample_prior(rng, prior);
    const ParamVector back = prior.from_unit(prior.to_unit(th));
    for (std::size_t j = 0; j < kNumParams; ++j) CHECK(back[j] == doctest::Approx(th[j]).epsilon(1e-13));
  }
}

TEST_CASE("invalid prior box is rejected") {
  PriorSpec prior = PriorSpec::defaults();
  prior.bounds[4] = {5.0, 5.0};
  CHECK_THROWS_AS(prior.validate(), ConfigError);
}

TEST_CASE("derived seeds depend only on the path") {
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
}
