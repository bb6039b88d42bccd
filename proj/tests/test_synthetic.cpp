#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstring>

#include "evospec/rng.hpp"
#include "evospec/synthetic.hpp"
#include "oracles.hpp"

using namespace evospec;

TEST_SUITE_BEGIN("synthetic");

TEST_CASE("philox stream is deterministic and streams are distinct") {
  CounterRng a(42, 0), b(42, 0), c(42, 1);
  bool any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next_u32();
    CHECK(va == b.next_u32());
    if (va != c.next_u32()) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("normals have the right first moments") {
  CounterRng rng(123, 0);
  const std::size_t n = 200000;
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / static_cast<double>(n)) < 0.01);
  CHECK(s2 / static_cast<double>(n) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("dense_cn at A=1, N=4 is the scaled inverse-DFT phase matrix") {
  const auto c = dense_cn([](std::size_t, double) { return 1.0; }, 4);
  const double scale = std::sqrt(kTwoPi / 4.0);
  for (std::size_t t = 1; t <= 4; ++t) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double arg = kTwoPi * static_cast<double>(j) * static_cast<double>(t) / 4.0;
      const std::complex<double> want = scale * std::complex<double>(std::cos(arg), std::sin(arg));
      CHECK(std::abs(c(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(j)) - want) < 1e-14);
    }
  }
}

TEST_CASE("time-constant A gives a circulant covariance") {
  const std::size_t n = 16;
  const auto c = dense_cn([](std::size_t, double w) { return 1.0 + 0.5 * std::cos(w); }, n);
  const Eigen::MatrixXcd cov = c * c.adjoint();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto want = cov(0, static_cast<Eigen::Index>((n + j - i) % n));
      CHECK(std::abs(cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - want) < 1e-10);
    }
  }
}

TEST_CASE("random A gives a Hermitian PSD covariance") {
  const std::size_t n = 24;
  CounterRng rng(7, 7);
  std::vector<double> field(n * n);
  for (double& v : field) v = 0.5 + rng.uniform();
  const auto c = dense_cn(
      [&](std::size_t t, double w) {
        const auto j = static_cast<std::size_t>(std::llround(w * static_cast<double>(n) / kTwoPi)) % n;
        return field[(t - 1) * n + j];
      },
      n);
  const Eigen::MatrixXcd cov = c * c.adjoint();
  CHECK((cov - cov.adjoint()).norm() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cov);
  CHECK(es.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("hermitian noise has unit variance and the right symmetry") {
  const std::size_t n = 16;
  CounterRng rng(9, 0);
  std::vector<double> vars(n, 0.0);
  const std::size_t draws = 40000;
  for (std::size_t d = 0; d < draws; ++d) {
    const auto eps = hermitian_noise(n, rng);
    CHECK(eps[0].imag() == 0.0);
    CHECK(eps[n / 2].imag() == 0.0);
    for (std::size_t j = 1; j < n / 2; ++j) {
      CHECK(eps[n - j] == std::conj(eps[j]));
    }
    for (std::size_t j = 0; j < n; ++j) vars[j] += std::norm(eps[j]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    CHECK(vars[j] / static_cast<double>(draws) == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("flat spectrum draws are white with variance 2 pi a") {
  const std::size_t n = 2048;
  const double a0 = 0.35;
  CounterRng rng(10, 0);
  const auto z = sample_evolutionary_gp([&](std::size_t, double) { return a0; }, n, rng);
  CHECK(oracle::variance(z) == doctest::Approx(kTwoPi * a0).epsilon(0.08));
  CHECK(oracle::ljung_box(z, 10) < oracle::kChiSq10_99);
}

TEST_CASE("sample covariance matches the dense target at N=64") {
  const std::size_t n = 64;
  const std::size_t draws = 100000;
  // Evolving spectrum: AR(1) base times a mild time-dependent ratio.
  auto spectrum = [&](std::size_t t, double w) {
    const double ramp = 0.8 * static_cast<double>(t) / static_cast<double>(n);
    return analytic_ar1_spectrum(0.5, 1.0, w) * std::exp(ramp * (-0.2 + 0.1 * std::cos(w)));
  };
  const auto c = dense_cn([&](std::size_t t, double w) { return std::sqrt(spectrum(t, w)); }, n);
  const Eigen::MatrixXd target = (c * c.adjoint()).real();

  Eigen::MatrixXd sqrt_a(n, n);
  for (std::size_t t = 1; t <= n; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      sqrt_a(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(j)) =
          std::sqrt(spectrum(t, kTwoPi * static_cast<double>(j) / static_cast<double>(n)));
    }
  }
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  CounterRng rng(11, 0);
  for (std::size_t d = 0; d < draws; ++d) {
    const auto z = sample_evolutionary_gp(sqrt_a, rng);
    Eigen::Map<const Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(n));
    acc.selfadjointView<Eigen::Lower>().rankUpdate(zv);
  }
  Eigen::MatrixXd sample = acc.selfadjointView<Eigen::Lower>();
  sample /= static_cast<double>(draws);

  // Monte Carlo standard error per entry: sqrt((S_ii S_jj + S_ij^2)/draws).
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double se = std::sqrt((target(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) *
                                       target(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) +
                                   std::pow(target(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 2)) /
                                  static_cast<double>(draws));
      worst = std::max(worst, std::abs(sample(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                       target(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) /
                                  se);
    }
  }
  CHECK(worst <= 5.5);  // max over 2080 distinct entries of |z|; 4 would be tight
}

TEST_CASE("draws whiten exactly under the dense inverse") {
  const std::size_t n = 128;
  auto spectrum = [&](std::size_t t, double w) {
    const double ramp = static_cast<double>(t) / static_cast<double>(n);
    return analytic_ar1_spectrum(0.6, 2.0, w) * std::exp(-0.3 * ramp);
  };
  const auto c = dense_cn([&](std::size_t t, double w) { return std::sqrt(spectrum(t, w)); }, n);
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(c);
  CounterRng rng(12, 0);
  // Pool decorrelated magnitudes across draws; they should be unit-variance
  // and flat across frequency.
  std::vector<double> pooled(n, 0.0);
  const std::size_t draws = 400;
  for (std::size_t d = 0; d < draws; ++d) {
    const auto z = sample_evolutionary_gp(spectrum, n, rng);
    Eigen::VectorXcd zv(n);
    for (std::size_t t = 0; t < n; ++t) zv[static_cast<Eigen::Index>(t)] = z[t];
    const Eigen::VectorXcd eps = lu.solve(zv);
    for (std::size_t j = 0; j < n; ++j) pooled[j] += std::norm(eps[static_cast<Eigen::Index>(j)]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    CHECK(pooled[j] / static_cast<double>(draws) == doctest::Approx(1.0).epsilon(0.35));
  }
}

TEST_CASE("fixed seed reproduces identical bytes") {
  auto run = [] {
    CounterRng rng(77, 3);
    return sample_evolutionary_gp([](std::size_t, double) { return 1.0; }, 256, rng);
  };
  const auto a = run();
  const auto b = run();
  CHECK(std::memcmp(a.data(), b.data(), a.size() * 8) == 0);
}

TEST_CASE("stationary sampler matches the evolutionary sampler's law") {
  // Time-constant spectrum: both samplers draw from the same distribution;
  // compare variances.
  const std::size_t n = 4096;
  const auto spec = analytic_ar1_spectrum_grid(0.5, 1.0, n);
  CounterRng rng(13, 0);
  const auto z = sample_stationary(spec, rng);
  // Var = integral of the spectrum = sigma^2/(1-c^2).
  CHECK(oracle::variance(z) == doctest::Approx(1.0 / 0.75).epsilon(0.1));
}

TEST_CASE("ar1 spectrum closed forms") {
  CHECK(analytic_ar1_spectrum(0.0, 2.0, 1.0) == doctest::Approx(2.0 / kTwoPi));
  // Plug-in at omega=0: sigma^2 / (2 pi (1-c)^2) = 1/(2 pi 0.25) = 2/pi.
  CHECK(analytic_ar1_spectrum(0.5, 1.0, 0.0) == doctest::Approx(2.0 / kPi));
  // Symmetry about pi.
  CHECK(analytic_ar1_spectrum(0.7, 1.3, 1.1) ==
        doctest::Approx(analytic_ar1_spectrum(0.7, 1.3, kTwoPi - 1.1)));
  CHECK_THROWS_AS(analytic_ar1_spectrum(1.0, 1.0, 0.5), ConfigError);
}

TEST_CASE("guards reject oversized dense problems") {
  CHECK_THROWS_AS(dense_cn([](std::size_t, double) { return 1.0; }, 5000), ConfigError);
  CounterRng rng(1, 1);
  CHECK_THROWS_AS(sample_evolutionary_gp([](std::size_t, double) { return 1.0; }, 5000, rng),
                  ConfigError);
}

TEST_SUITE_END();
