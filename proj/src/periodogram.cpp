#include "evospec/periodogram.hpp"

#include "evospec/common.hpp"
#include "evospec/fft.hpp"

namespace evospec {

std::vector<std::vector<double>> local_periodograms(
    const std::vector<std::vector<double>>& realizations, std::size_t block_len, bool* truncated) {
  if (realizations.empty()) throw ConfigError("local_periodograms: no realizations");
  const std::size_t n = realizations.front().size();
  for (const auto& r : realizations) {
    if (r.size() != n) throw ConfigError("local_periodograms: length mismatch across realizations");
  }
  if (block_len == 0 || block_len > n) {
    throw ConfigError("local_periodograms: block longer than series");
  }
  const std::size_t n_blocks = n / block_len;
  if (truncated) *truncated = (n % block_len) != 0;

  Fft& fft = thread_local_fft(block_len);
  const double scale = 1.0 / (kTwoPi * static_cast<double>(block_len));
  std::vector<std::vector<double>> avg(n_blocks, std::vector<double>(block_len, 0.0));
  for (const auto& r : realizations) {
    for (std::size_t b = 0; b < n_blocks; ++b) {
      auto coef = fft.forward(std::span<const double>(r.data() + b * block_len, block_len));
      for (std::size_t j = 0; j < block_len; ++j) avg[b][j] += std::norm(coef[j]) * scale;
    }
  }
  const double inv_r = 1.0 / static_cast<double>(realizations.size());
  for (auto& block : avg) {
    for (double& v : block) v *= inv_r;
  }
  return avg;
}

std::vector<double> baseline_periodogram(std::span<const double> x_baseline, std::size_t block_len,
                                         bool* truncated) {
  if (block_len == 0) throw ConfigError("baseline_periodogram: block_len must be positive");
  const std::size_t n_b = (x_baseline.size() / block_len) * block_len;
  if (n_b < block_len) throw ConfigError("baseline_periodogram: series shorter than one block");
  if (truncated) *truncated = n_b != x_baseline.size();

  const auto fine = periodogram(x_baseline.subspan(0, n_b));
  const std::size_t k_per_bin = n_b / block_len;
  const std::ptrdiff_t k_lo = -static_cast<std::ptrdiff_t>(k_per_bin / 2);
  std::vector<double> coarse(block_len, 0.0);
  for (std::size_t j = 0; j < block_len; ++j) {
    const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(j * k_per_bin);
    double acc = 0.0;
    for (std::size_t i = 0; i < k_per_bin; ++i) {
      const std::ptrdiff_t idx = center + k_lo + static_cast<std::ptrdiff_t>(i);
      const std::size_t wrapped =
          static_cast<std::size_t>(((idx % static_cast<std::ptrdiff_t>(n_b)) + static_cast<std::ptrdiff_t>(n_b)) %
                                   static_cast<std::ptrdiff_t>(n_b));
      acc += fine[wrapped];
    }
    coarse[j] = acc / static_cast<double>(k_per_bin);
  }
  return coarse;
}

}  // namespace evospec
