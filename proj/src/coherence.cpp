#include "evospec/coherence.hpp"

#include <complex>

#include "evospec/common.hpp"
#include "evospec/fft.hpp"

namespace evospec {

std::vector<double> coherence_diagnostic(std::span<const double> x1, std::span<const double> x2,
                                         int smooth_half_width) {
  if (x1.size() != x2.size()) throw ConfigError("coherence: length mismatch");
  if (x1.empty()) throw ConfigError("coherence: empty block");
  if (smooth_half_width < 1) throw ConfigError("coherence: smoothing width must be >= 1");
  const std::size_t m = x1.size();

  Fft fft(m);
  const auto f1 = fft.forward(x1);
  const auto f2 = fft.forward(x2);
  const double scale = 1.0 / (kTwoPi * static_cast<double>(m));
  std::vector<double> i11(m), i22(m);
  std::vector<std::complex<double>> i12(m);
  for (std::size_t j = 0; j < m; ++j) {
    i11[j] = std::norm(f1[j]) * scale;
    i22[j] = std::norm(f2[j]) * scale;
    i12[j] = f1[j] * std::conj(f2[j]) * scale;
  }

  // Circular quadratic kernel.
  const int half = smooth_half_width;
  std::vector<double> w(static_cast<std::size_t>(2 * half + 1));
  double wsum = 0.0;
  for (int k = -half; k <= half; ++k) {
    const double x = static_cast<double>(k) / (half + 1.0);
    w[static_cast<std::size_t>(k + half)] = 1.0 - x * x;
    wsum += 1.0 - x * x;
  }
  for (double& v : w) v /= wsum;

  std::vector<double> coh(m);
  for (std::size_t j = 0; j < m; ++j) {
    double s11 = 0.0, s22 = 0.0;
    std::complex<double> s12 = 0.0;
    for (int k = -half; k <= half; ++k) {
      const std::size_t idx =
          static_cast<std::size_t>(((static_cast<std::ptrdiff_t>(j) + k) % static_cast<std::ptrdiff_t>(m) +
                                    static_cast<std::ptrdiff_t>(m)) %
                                   static_cast<std::ptrdiff_t>(m));
      const double wk = w[static_cast<std::size_t>(k + half)];
      s11 += wk * i11[idx];
      s22 += wk * i22[idx];
      s12 += wk * i12[idx];
    }
    const double denom = s11 * s22;
    coh[j] = denom > 0.0 ? std::norm(s12) / denom : 0.0;
  }
  return coh;
}

}  // namespace evospec
