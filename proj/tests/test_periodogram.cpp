#include <doctest.h>

#include <cmath>

#include "evospec/fft.hpp"
#include "evospec/periodogram.hpp"
#include "evospec/rng.hpp"
#include "evospec/synthetic.hpp"
#include "oracles.hpp"

using namespace evospec;

TEST_SUITE_BEGIN("periodogram");

TEST_CASE("zero block has all-zero ordinates") {
  std::vector<std::vector<double>> runs{std::vector<double>(64, 0.0)};
  const auto avg = local_periodograms(runs, 32);
  REQUIRE(avg.size() == 2);
  for (const auto& block : avg) {
    for (double v : block) CHECK(v == 0.0);
  }
}

TEST_CASE("pure cosine at a Fourier frequency concentrates A^2 M / (8 pi)") {
  const std::size_t m = 128;
  const double amp = 3.0;
  const std::size_t j0 = 5;
  std::vector<double> q(m);
  for (std::size_t t = 1; t <= m; ++t) {
    q[t - 1] = amp * std::cos(kTwoPi * static_cast<double>(j0) * static_cast<double>(t) /
                              static_cast<double>(m));
  }
  const auto avg = local_periodograms({q}, m);
  const double want = amp * amp * static_cast<double>(m) / (8.0 * kPi);
  CHECK(avg[0][j0] == doctest::Approx(want).epsilon(1e-10));
  CHECK(avg[0][m - j0] == doctest::Approx(want).epsilon(1e-10));
  for (std::size_t j = 0; j < m; ++j) {
    if (j != j0 && j != m - j0) CHECK(std::abs(avg[0][j]) < 1e-12);
  }
}

TEST_CASE("Parseval: (2 pi / M) sum I equals the block mean square") {
  const std::size_t m = 365;
  CounterRng rng(41, 0);
  std::vector<double> q(3 * m);
  for (double& v : q) v = rng.normal() * 1.7;
  bool truncated = false;
  const auto avg = local_periodograms({q}, m, &truncated);
  CHECK_FALSE(truncated);
  for (std::size_t b = 0; b < 3; ++b) {
    double psum = 0.0;
    for (double v : avg[b]) psum += v;
    double msq = 0.0;
    for (std::size_t t = 0; t < m; ++t) msq += q[b * m + t] * q[b * m + t];
    msq /= static_cast<double>(m);
    CHECK(std::abs(kTwoPi / static_cast<double>(m) * psum - msq) < 1e-10);
  }
}

TEST_CASE("trailing partial blocks are truncated and flagged") {
  std::vector<std::vector<double>> runs{std::vector<double>(100, 1.0)};
  bool truncated = false;
  const auto avg = local_periodograms(runs, 32, &truncated);
  CHECK(truncated);
  CHECK(avg.size() == 3);
  CHECK_THROWS_AS(local_periodograms(runs, 101), ConfigError);
}

TEST_CASE("realization averaging matches the direct mean") {
  const std::size_t m = 64;
  CounterRng rng(42, 1);
  std::vector<std::vector<double>> runs(3, std::vector<double>(m));
  for (auto& r : runs) {
    for (double& v : r) v = rng.normal();
  }
  const auto avg = local_periodograms(runs, m);
  std::vector<double> direct(m, 0.0);
  for (const auto& r : runs) {
    const auto coef = oracle::direct_dft(r);
    for (std::size_t j = 0; j < m; ++j) direct[j] += std::norm(coef[j]) / (kTwoPi * static_cast<double>(m) * 3.0);
  }
  CHECK(oracle::max_abs_diff(avg[0], direct) < 1e-10);
}

TEST_CASE("white noise baseline aggregates to sigma^2 / (2 pi)") {
  const std::size_t n_b = 1 << 18;
  const std::size_t m = 256;
  const double sigma = 1.4;
  CounterRng rng(43, 2);
  std::vector<double> x(n_b);
  for (double& v : x) v = sigma * rng.normal();
  const auto coarse = baseline_periodogram(x, m);
  const double want = sigma * sigma / kTwoPi;
  CHECK(oracle::mean(coarse) == doctest::Approx(want).epsilon(0.02));
}

TEST_CASE("aggregation preserves Parseval up to the bin convention") {
  const std::size_t n_b = 4096;
  const std::size_t m = 64;
  CounterRng rng(44, 3);
  std::vector<double> x(n_b);
  for (double& v : x) v = rng.normal();
  const auto fine = periodogram(x);
  const auto coarse = baseline_periodogram(x, m);
  double fine_sum = 0.0, coarse_sum = 0.0;
  for (double v : fine) fine_sum += v;
  for (double v : coarse) coarse_sum += v;
  CHECK(std::abs(kTwoPi / static_cast<double>(m) * coarse_sum -
                 kTwoPi / static_cast<double>(n_b) * fine_sum) < 1e-10);
}

TEST_CASE("AR(1) baseline matches the analytic spectrum after aggregation") {
  const std::size_t n_b = 1 << 20;
  const std::size_t m = 64;
  const double coef = 0.5;
  CounterRng rng(45, 4);
  std::vector<double> x(n_b);
  double prev = rng.normal() / std::sqrt(1.0 - coef * coef);
  for (std::size_t t = 0; t < n_b; ++t) {
    prev = coef * prev + rng.normal();
    x[t] = prev;
  }
  const auto coarse = baseline_periodogram(x, m);
  for (std::size_t j = 1; j < m / 2; ++j) {
    const double want = analytic_ar1_spectrum(coef, 1.0, kTwoPi * static_cast<double>(j) /
                                                             static_cast<double>(m));
    CHECK(coarse[j] == doctest::Approx(want).epsilon(0.03));
  }
}

TEST_SUITE_END();
