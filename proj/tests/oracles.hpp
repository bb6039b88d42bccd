#pragma once

// Brute-force references and closed forms used to pin expected values.
// Everything here is independent of the implementation paths it checks:
// dense matrix algebra through Eigen, direct O(n^2) DFTs, and textbook
// statistics.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double rel_l2_error(std::span<const double> got, std::span<const double> want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    num += (got[i] - want[i]) * (got[i] - want[i]);
    den += want[i] * want[i];
  }
  return std::sqrt(num / den);
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// Direct O(n^2) DFT: X_k = sum_t x_t e^{-2 pi i k t/n}.
inline std::vector<std::complex<double>> direct_dft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double arg = -kTwoPi * static_cast<double>(k) * static_cast<double>(t) /
                         static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(arg), std::sin(arg));
    }
    out[k] = acc;
  }
  return out;
}

// Ljung-Box portmanteau statistic at h lags; under whiteness it is
// approximately chi-squared with h degrees of freedom.
inline double ljung_box(std::span<const double> x, int h) {
  const auto n = static_cast<double>(x.size());
  const double m = mean(x);
  double c0 = 0.0;
  for (double v : x) c0 += (v - m) * (v - m);
  double q = 0.0;
  for (int k = 1; k <= h; ++k) {
    double ck = 0.0;
    for (std::size_t t = static_cast<std::size_t>(k); t < x.size(); ++t) {
      ck += (x[t] - m) * (x[t - static_cast<std::size_t>(k)] - m);
    }
    const double r = ck / c0;
    q += r * r / (n - k);
  }
  return n * (n + 2.0) * q;
}

inline constexpr double kChiSq10_99 = 23.209;  // 99th percentile, 10 df

// Quadratic-kernel convolution without reflection handling; valid for
// targets at least `half` bins away from the spectrum edges.
inline double plain_kernel_smooth(std::span<const double> values, std::size_t j, double bandwidth) {
  const auto half = static_cast<std::ptrdiff_t>(std::floor(bandwidth));
  double wsum = 0.0, acc = 0.0;
  for (std::ptrdiff_t k = -half; k <= half; ++k) {
    const double u = static_cast<double>(k) / (bandwidth + 1.0);
    const double w = 1.0 - u * u;
    wsum += w;
    acc += w * values[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(j) + k)];
  }
  return acc / wsum;
}

}  // namespace oracle
