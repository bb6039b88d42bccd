#include <doctest.h>

#include <cmath>

#include "evospec/coherence.hpp"
#include "evospec/common.hpp"
#include "evospec/rng.hpp"
#include "oracles.hpp"

using namespace evospec;

TEST_SUITE_BEGIN("coherence");

TEST_CASE("a series with itself is perfectly coherent") {
  CounterRng rng(81, 0);
  std::vector<double> x(1024);
  for (double& v : x) v = rng.normal();
  const auto coh = coherence_diagnostic(x, x, 20);
  for (double v : coh) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("independent noises decohere as the smoothing widens") {
  CounterRng rng(82, 0);
  std::vector<double> x(4096), y(4096);
  for (std::size_t t = 0; t < x.size(); ++t) {
    x[t] = rng.normal();
    y[t] = rng.normal();
  }
  const auto narrow = coherence_diagnostic(x, y, 4);
  const auto wide = coherence_diagnostic(x, y, 64);
  CHECK(oracle::mean(wide) < oracle::mean(narrow));
  // Wide smoothing: expected coherence of independent series is about
  // 1/(number of effective ordinates); bound loosely.
  CHECK(oracle::mean(wide) < 0.05);
}

TEST_CASE("common signal plus noise matches the analytic coherence") {
  // x = s + n1, y = s + n2 with independent white components:
  // coherence = (var_s)^2 / (var_s + var_n)^2 at every frequency.
  const double var_s = 1.0, var_n = 0.5;
  const double want = (var_s * var_s) / ((var_s + var_n) * (var_s + var_n));
  CounterRng rng(83, 0);
  const std::size_t n = 1 << 15;
  std::vector<double> x(n), y(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double s = std::sqrt(var_s) * rng.normal();
    x[t] = s + std::sqrt(var_n) * rng.normal();
    y[t] = s + std::sqrt(var_n) * rng.normal();
  }
  const auto coh = coherence_diagnostic(x, y, 256);
  CHECK(oracle::mean(coh) == doctest::Approx(want).epsilon(0.05));
}

TEST_CASE("input validation") {
  std::vector<double> x(16, 1.0), y(8, 1.0);
  CHECK_THROWS_AS(coherence_diagnostic(x, y, 2), ConfigError);
  CHECK_THROWS_AS(coherence_diagnostic(x, x, 0), ConfigError);
}

TEST_SUITE_END();
