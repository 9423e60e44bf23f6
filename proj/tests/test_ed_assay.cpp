#include <cmath>
#include <variant>

#include "doctest.h"
#include "virolfi/ed_assay.hpp"

using namespace virolfi;

namespace {

LinearParams single_stage_params(double gamma, double burst) {
  LinearParams p;
  p.gamma = gamma;
  p.beta = 1e-7;
  p.p = burst / 10.0;
  p.p_rna = 1e3;
  p.tau_e = 5.0;
  p.tau_i = 10.0;
  return p;
}

PlateDesign standard_plate(int replicates) {
  PlateDesign d;
  d.dilution_exponents = {-1, -2, -3, -4, -5, -6, -7, -8};
  d.replicates = replicates;
  return d;
}

}  // namespace

TEST_CASE("single infectious stage with no clearance has the closed-form establishment probability") {
  FixedConstants k;
  k.n_i = 1;
  k.c = 0.0;
  const ExtinctionResult r = extinction_probability(single_stage_params(1.0, 2.0), k);
  CHECK(r.converged);
  CHECK(r.p_est == doctest::Approx(0.5).epsilon(1e-10));
  CHECK_FALSE(r.no_establishment());
}

TEST_CASE("no entry means certain extinction") {
  FixedConstants k;
  const ExtinctionResult r = extinction_probability(single_stage_params(0.0, 100.0), k);
  CHECK(r.p_ext == 1.0);
  CHECK(r.no_establishment());
}

TEST_CASE("returned extinction probability solves the self-consistency equation") {
  FixedConstants k;  // n_I = 60
  LinearParams p = single_stage_params(0.45, 1469.0);
  const ExtinctionResult r = extinction_probability(p, k);
  REQUIRE(r.converged);
  CHECK(std::abs(extinction_map(r.p_ext, p, k) - r.p_ext) < 1e-10);
  CHECK(r.p_ext < 1.0);
  CHECK(r.p_ext >= 0.0);
}

TEST_CASE("entry probability formula") {
  FixedConstants k;
  const LinearParams p = single_stage_params(0.3, 10.0);
  const double rate = p.beta * k.n_cells / k.s;
  CHECK(infection_entry_probability(p, k) == doctest::Approx(0.3 / (1.0 + k.c / rate)));
}

TEST_CASE("SIN and IV conversions") {
  CHECK(sin_to_iv(1e6, 0.5) == 2e6);
  CHECK(sin_to_iv(123.0, 1.0) == 123.0);
  for (double x : {1e-3, 1.0, 3.7e5, 8.1e9}) {
    CHECK(std::abs(iv_to_sin(sin_to_iv(x, 0.37), 0.37) - x) <= 1e-12 * x);
  }
}

TEST_CASE("empty or sterile inoculum infects no wells") {
  Rng rng(4);
  const auto zero = simulate_plate(0.0, standard_plate(4), 0.2, 5.236e-16, rng);
  REQUIRE(std::holds_alternative<EDOutcome>(zero));
  for (int c : std::get<EDOutcome>(zero).counts) CHECK(c == 0);
  const auto sterile = simulate_plate(1e9, standard_plate(4), 1.0, 5.236e-16, rng);
  REQUIRE(std::holds_alternative<EDOutcome>(sterile));
  for (int c : std::get<EDOutcome>(sterile).counts) CHECK(c == 0);
}

TEST_CASE("saturated concentration is a plate failure") {
  Rng rng(4);
  const double v_vir = 5.236e-16;
  CHECK(std::holds_alternative<PlateFailure>(simulate_plate(2.0 / v_vir, standard_plate(4), 0.2, v_vir, rng)));
}

TEST_CASE("well infection frequency matches the generating-function probability") {
  // P(infected) = 1 - E[p_ext^V0] with V0 ~ Binomial(n_j, p_hit).
  const double v_vir = 5.236e-16;
  const double p_ext = 0.3;
  const double c_actual = 2e5;
  Rng rng(99);
  const int wells = 100000;
  const auto result = simulate_plate(c_actual, standard_plate(wells), p_ext, v_vir, rng);
  REQUIRE(std::holds_alternative<EDOutcome>(result));
  const auto& counts = std::get<EDOutcome>(result).counts;
  for (std::size_t j = 0; j < kPlateColumns; ++j) {
    const int e = standard_plate(1).dilution_exponents[j];
    const double n_j = 0.1 * std::pow(10.0, e) / v_vir;
    const double oracle = 1.0 - std::pow(1.0 - c_actual * v_vir * (1.0 - p_ext), n_j);
    CHECK(well_infection_probability(c_actual, e, 0.1, v_vir, p_ext) == doctest::Approx(oracle).epsilon(1e-5));
    const double se = std::sqrt(oracle * (1.0 - oracle) / wells);
    const double freq = counts[j] / static_cast<double>(wells);
    CAPTURE(j);
    CHECK(std::abs(freq - oracle) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("large-n binomial sampler moments") {
  Rng rng(8);
  for (const auto& [n, p] : {std::pair{1e20, 3e-20}, std::pair{1e15, 1e-9}, std::pair{50.0, 0.3}}) {
    const double mean = n * p;
    double s = 0.0;
    const int reps = 20000;
    for (int i = 0; i < reps; ++i) s += static_cast<double>(sample_binomial_large(n, p, rng));
    const double sd = std::sqrt(n * p * (1.0 - p) / reps);
    CHECK(std::abs(s / reps - mean) < 4.0 * sd);
  }
}

TEST_CASE("plate design validation") {
  PlateDesign d = standard_plate(4);
  CHECK_NOTHROW(d.validate());
  d.dilution_exponents[3] = -1;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d = standard_plate(0);
  CHECK_THROWS_AS(d.validate(), ConfigError);
}
