#include <doctest.h>

#include <cmath>

#include "evospec/rng.hpp"
#include "evospec/seasonal.hpp"
#include "oracles.hpp"

using namespace evospec;

TEST_SUITE_BEGIN("seasonal");

TEST_CASE("constant series gives a flat mean cycle") {
  std::vector<double> y(10 * 365, 4.25);
  const auto m = fit_mean_seasonal_cycle(y, 10);
  for (double v : m) CHECK(v == doctest::Approx(4.25).epsilon(1e-12));
}

TEST_CASE("pure annual cosine is recovered exactly over whole years") {
  const double amp = 5.0;
  std::vector<double> y(10 * 365);
  for (std::size_t t = 0; t < y.size(); ++t) {
    y[t] = amp * std::cos(kTwoPi * static_cast<double>(t % 365 + 1) / 365.0);
  }
  const auto m = fit_mean_seasonal_cycle(y, 10);
  for (std::size_t d = 0; d < 365; ++d) {
    const double want = amp * std::cos(kTwoPi * static_cast<double>(d + 1) / 365.0);
    CHECK(std::abs(m[d] - want) < 1e-10);
  }
}

TEST_CASE("cosine plus noise: coefficient within 3 analytic LS standard errors") {
  // With whole years the harmonic regressors are orthogonal, so the LS
  // variance of the cos_1 coefficient is sigma^2 / sum(cos^2) = 2 sigma^2 / n.
  const std::size_t years = 100;
  const std::size_t n = years * 365;
  const double amp = 5.0, sigma = 1.0;
  CounterRng rng(1234, 0);
  std::vector<double> y(n);
  for (std::size_t t = 0; t < n; ++t) {
    y[t] = amp * std::cos(kTwoPi * static_cast<double>(t % 365 + 1) / 365.0) + sigma * rng.normal();
  }
  const auto m = fit_mean_seasonal_cycle(y, 10);
  // Recover gamma_1 by projecting the fitted cycle onto cos_1.
  double num = 0.0, den = 0.0;
  for (std::size_t d = 0; d < 365; ++d) {
    const double c = std::cos(kTwoPi * static_cast<double>(d + 1) / 365.0);
    num += m[d] * c;
    den += c * c;
  }
  const double gamma1 = num / den;
  const double se = std::sqrt(2.0 * sigma * sigma / static_cast<double>(n));
  CHECK(std::abs(gamma1 - amp) < 3.0 * se);
}

TEST_CASE("series shorter than two years is rejected") {
  std::vector<double> y(700, 1.0);
  CHECK_THROWS_AS(fit_mean_seasonal_cycle(y, 10), ConfigError);
}

TEST_CASE("homoskedastic noise gives a flat variance cycle") {
  const std::size_t years = 200;
  CounterRng rng(99, 1);
  std::vector<double> resid(years * 365);
  for (double& v : resid) v = rng.normal();
  const auto d = fit_variance_seasonal_cycle(resid, 15);
  for (double v : d) CHECK(std::abs(v - 1.0) < 0.05);
}

TEST_CASE("known seasonal modulation is recovered within 0.05 sup-norm") {
  const std::size_t years = 200;
  CounterRng rng(7, 2);
  // D*(d) proportional to 1 + 0.5 cos, renormalized to mean-square one.
  std::vector<double> dstar(365);
  double msq = 0.0;
  for (std::size_t d = 0; d < 365; ++d) {
    dstar[d] = 1.0 + 0.5 * std::cos(kTwoPi * static_cast<double>(d + 1) / 365.0);
    msq += dstar[d] * dstar[d];
  }
  msq /= 365.0;
  for (double& v : dstar) v /= std::sqrt(msq);
  std::vector<double> resid(years * 365);
  for (std::size_t t = 0; t < resid.size(); ++t) resid[t] = dstar[t % 365] * rng.normal();
  const auto dhat = fit_variance_seasonal_cycle(resid, 15);
  CHECK(oracle::max_abs_diff(dhat, dstar) <= 0.05);
}

TEST_CASE("constant residuals are a degenerate variance") {
  std::vector<double> resid(5 * 365, 3.0);
  CHECK_THROWS_AS(fit_variance_seasonal_cycle(resid, 15), NumericError);
}

TEST_CASE("normalization: mean of D^2 is one to 1e-12") {
  CounterRng rng(5, 3);
  std::vector<double> resid(20 * 365);
  for (std::size_t t = 0; t < resid.size(); ++t) {
    resid[t] = (1.0 + 0.3 * std::sin(kTwoPi * static_cast<double>(t % 365) / 365.0)) * rng.normal();
  }
  const auto d = fit_variance_seasonal_cycle(resid, 15);
  double msq = 0.0;
  for (double v : d) msq += v * v;
  CHECK(std::abs(msq / 365.0 - 1.0) < 1e-12);
}

TEST_CASE("deseasonalize of the exact cycle is zero and round-trips") {
  std::vector<double> m_cycle(365), d_cycle(365, 1.0);
  for (std::size_t d = 0; d < 365; ++d) {
    m_cycle[d] = 280.0 + 8.0 * std::sin(kTwoPi * static_cast<double>(d + 1) / 365.0);
    d_cycle[d] = 1.0 + 0.2 * std::cos(kTwoPi * static_cast<double>(d + 1) / 365.0);
  }
  std::vector<double> y(3 * 365);
  for (std::size_t t = 0; t < y.size(); ++t) y[t] = m_cycle[t % 365];
  const auto x = deseasonalize(y, m_cycle, d_cycle);
  for (double v : x) CHECK(v == doctest::Approx(0.0).epsilon(1e-14));

  CounterRng rng(21, 4);
  for (double& v : y) v += rng.normal();
  const auto x2 = deseasonalize(y, m_cycle, d_cycle);
  const auto y2 = reseasonalize(x2, m_cycle, d_cycle);
  CHECK(oracle::max_abs_diff(y, y2) < 1e-12);
}

TEST_CASE("deseasonalized modulated white noise is white with unit variance") {
  const std::size_t years = 60;
  CounterRng rng(31, 5);
  std::vector<double> m_cycle(365), d_cycle(365);
  double msq = 0.0;
  for (std::size_t d = 0; d < 365; ++d) {
    m_cycle[d] = 280.0 + 10.0 * std::cos(kTwoPi * static_cast<double>(d + 1) / 365.0);
    d_cycle[d] = 1.0 + 0.4 * std::sin(kTwoPi * static_cast<double>(d + 1) / 365.0);
    msq += d_cycle[d] * d_cycle[d];
  }
  msq /= 365.0;
  for (double& v : d_cycle) v /= std::sqrt(msq);

  std::vector<double> y(years * 365);
  for (std::size_t t = 0; t < y.size(); ++t) y[t] = m_cycle[t % 365] + d_cycle[t % 365] * rng.normal();
  const auto x = deseasonalize(y, m_cycle, d_cycle);
  CHECK(oracle::variance(x) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(oracle::ljung_box(x, 10) < oracle::kChiSq10_99);

  // An AR(1) truth must fail the same whiteness check.
  std::vector<double> ar(y.size());
  double prev = 0.0;
  for (std::size_t t = 0; t < ar.size(); ++t) {
    prev = 0.5 * prev + rng.normal();
    ar[t] = m_cycle[t % 365] + d_cycle[t % 365] * prev;
  }
  const auto xar = deseasonalize(ar, m_cycle, d_cycle);
  CHECK(oracle::ljung_box(xar, 10) > oracle::kChiSq10_99);
}

namespace {

ScenarioData make_scenario(std::size_t n_time, std::size_t n_loc, std::size_t n_runs,
                           std::uint64_t seed) {
  ScenarioData s;
  s.id = {"t", ScenarioKind::Transient};
  for (std::size_t r = 0; r < n_runs; ++r) {
    GridSeries g(n_time, n_loc);
    CounterRng rng(seed, r);
    for (double& v : g.data) v = rng.normal();
    s.runs.push_back(std::move(g));
  }
  return s;
}

SeasonalModel unit_seasonal(std::size_t n_loc) {
  SeasonalModel m;
  m.n_loc = n_loc;
  m.mean_cycle.assign(365 * n_loc, 0.0);
  m.scale_cycle.assign(365 * n_loc, 1.0);
  return m;
}

}  // namespace

TEST_CASE("contrasts of identical realizations vanish") {
  auto s = make_scenario(365, 2, 2, 77);
  s.runs[1] = s.runs[0];
  const auto q = compute_contrasts(s, unit_seasonal(2));
  for (const auto& run : q) {
    for (double v : run.data) CHECK(v == 0.0);
  }
}

TEST_CASE("contrasts sum to zero across realizations at every point") {
  const auto s = make_scenario(2 * 365, 3, 5, 78);
  const auto q = compute_contrasts(s, unit_seasonal(3));
  for (std::size_t t = 0; t < 2 * 365; ++t) {
    for (std::size_t l = 0; l < 3; ++l) {
      double sum = 0.0;
      for (const auto& run : q) sum += run.at(t, l);
      CHECK(std::abs(sum) < 1e-10);
    }
  }
}

TEST_CASE("contrast variance of white noise matches (R-1)/R") {
  const std::size_t r_s = 8;
  const auto s = make_scenario(40 * 365, 1, r_s, 79);
  const auto q = compute_contrasts(s, unit_seasonal(1));
  double acc = 0.0;
  std::size_t count = 0;
  for (const auto& run : q) {
    for (double v : run.data) {
      acc += v * v;
      ++count;
    }
  }
  const double want = (static_cast<double>(r_s) - 1.0) / static_cast<double>(r_s);
  CHECK(acc / static_cast<double>(count) == doctest::Approx(want).epsilon(0.02));
}

TEST_CASE("contrasts require at least two realizations") {
  const auto s = make_scenario(365, 1, 1, 80);
  CHECK_THROWS_WITH_AS(compute_contrasts(s, unit_seasonal(1)), "contrasts need >=2 realizations",
                       ConfigError);
}

TEST_SUITE_END();
