#include "evospec/smoothing.hpp"

#include <cmath>

#include "evospec/common.hpp"

namespace evospec {

void BandwidthParams::check() const {
  if (!(m0 > 0.0 && m0 <= m1)) throw ConfigError("bandwidth: need 0 < m0 <= m1");
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("bandwidth: need 0 < p < 1");
}

double bandwidth_profile(double u, double p) {
  const double v = std::min(u, 1.0 - u);  // distance to the nearest spectrum edge
  if (v >= 0.5 * p) return 1.0;
  return 0.5 * (1.0 - std::cos(kTwoPi * v / p));
}

double bandwidth_at(std::size_t j, std::size_t m_grid, const BandwidthParams& params) {
  const double u = static_cast<double>(j) / (static_cast<double>(m_grid) / 2.0);
  return (params.m1 - params.m0) * bandwidth_profile(u, params.p) + params.m0;
}

namespace {

inline std::size_t fold_index(std::ptrdiff_t idx, std::size_t m_grid) {
  const auto m = static_cast<std::ptrdiff_t>(m_grid);
  std::ptrdiff_t r = ((idx % m) + m) % m;
  if (r > m / 2) r = m - r;
  return static_cast<std::size_t>(r);
}

// Normalized quadratic kernel over k in [-B, B] for a (possibly
// fractional) bandwidth.
std::vector<double> kernel_weights(double bandwidth, std::ptrdiff_t* half_out) {
  const auto half = static_cast<std::ptrdiff_t>(std::floor(bandwidth));
  std::vector<double> w(static_cast<std::size_t>(2 * half + 1));
  double sum = 0.0;
  for (std::ptrdiff_t k = -half; k <= half; ++k) {
    const double x = static_cast<double>(k) / (bandwidth + 1.0);
    const double v = 1.0 - x * x;
    w[static_cast<std::size_t>(k + half)] = v;
    sum += v;
  }
  for (double& v : w) v /= sum;
  *half_out = half;
  return w;
}

}  // namespace

std::vector<double> folded_kernel_weights(std::size_t j, std::size_t m_grid, double bandwidth) {
  std::ptrdiff_t half = 0;
  const auto w = kernel_weights(bandwidth, &half);
  std::vector<double> folded(m_grid / 2 + 1, 0.0);
  for (std::ptrdiff_t k = -half; k <= half; ++k) {
    folded[fold_index(static_cast<std::ptrdiff_t>(j) + k, m_grid)] +=
        w[static_cast<std::size_t>(k + half)];
  }
  return folded;
}

std::vector<double> smooth_delta(std::span<const double> rough_full, std::size_t m_grid,
                                 const BandwidthParams& params) {
  params.check();
  if (rough_full.size() != m_grid) throw ConfigError("smooth_delta: grid mismatch");
  const std::size_t n_unique = m_grid / 2 + 1;
  std::vector<double> smoothed(m_grid, 0.0);
  for (std::size_t j = 0; j < n_unique; ++j) {
    std::ptrdiff_t half = 0;
    const auto w = kernel_weights(bandwidth_at(j, m_grid, params), &half);
    double acc = 0.0;
    for (std::ptrdiff_t k = -half; k <= half; ++k) {
      acc += w[static_cast<std::size_t>(k + half)] *
             rough_full[fold_index(static_cast<std::ptrdiff_t>(j) + k, m_grid)];
    }
    smoothed[j] = acc;
  }
  for (std::size_t j = n_unique; j < m_grid; ++j) smoothed[j] = smoothed[m_grid - j];
  return smoothed;
}

WeightSums weight_sums(std::size_t j, std::size_t m_grid, double bandwidth) {
  const auto folded = folded_kernel_weights(j, m_grid, bandwidth);
  WeightSums s;
  s.self = folded[j];
  for (double w : folded) s.sum_sq += w * w;
  return s;
}

double weight_cross_sum(std::size_t j, std::size_t m_grid, double bandwidth_a, double bandwidth_b) {
  const auto wa = folded_kernel_weights(j, m_grid, bandwidth_a);
  const auto wb = folded_kernel_weights(j, m_grid, bandwidth_b);
  double acc = 0.0;
  for (std::size_t i = 0; i < wa.size(); ++i) acc += wa[i] * wb[i];
  return acc;
}

CvResult cross_validate_bandwidth(const std::vector<std::span<const double>>& rough_by_location,
                                  std::size_t m_grid, const CvGrid& grid) {
  if (rough_by_location.empty()) throw ConfigError("cross_validate_bandwidth: no locations");
  for (const auto& r : rough_by_location) {
    if (r.size() != m_grid) throw ConfigError("cross_validate_bandwidth: grid mismatch");
  }
  const std::size_t j_lo = 1;
  const std::size_t j_hi = (m_grid % 2 == 0) ? m_grid / 2 : m_grid / 2 + 1;  // exclusive

  bool degenerate = true;
  const double first = rough_by_location.front()[0];
  for (const auto& rough : rough_by_location) {
    for (double v : rough) {
      if (v != first) {
        degenerate = false;
        break;
      }
    }
    if (!degenerate) break;
  }
  if (degenerate) {
    CvResult smoothest;
    smoothest.params = BandwidthParams{grid.m_values.back(), grid.m_values.back(), grid.p_values.back()};
    smoothest.score = 0.0;
    return smoothest;
  }

  CvResult best;
  bool have_best = false;
  for (double m1 : grid.m_values) {
    for (double m0 : grid.m_values) {
      if (m0 > m1) continue;
      for (double p : grid.p_values) {
        const BandwidthParams params{m0, m1, p};
        CompensatedSum score;
        for (std::size_t j = j_lo; j < j_hi; ++j) {
          std::ptrdiff_t half = 0;
          const auto w = kernel_weights(bandwidth_at(j, m_grid, params), &half);
          // Effective self weight includes reflected mass landing on j.
          double self = 0.0;
          for (std::ptrdiff_t k = -half; k <= half; ++k) {
            if (fold_index(static_cast<std::ptrdiff_t>(j) + k, m_grid) == j) {
              self += w[static_cast<std::size_t>(k + half)];
            }
          }
          const double denom = 1.0 - self;
          for (const auto& rough : rough_by_location) {
            double fitted = 0.0;
            for (std::ptrdiff_t k = -half; k <= half; ++k) {
              fitted += w[static_cast<std::size_t>(k + half)] *
                        rough[fold_index(static_cast<std::ptrdiff_t>(j) + k, m_grid)];
            }
            const double resid = (fitted - rough[j]) / denom;
            score.add(resid * resid);
          }
        }
        const double total = score.value();
        const bool better =
            !have_best || total < best.score ||
            (total == best.score &&
             (params.m1 > best.params.m1 ||
              (params.m1 == best.params.m1 && params.m0 > best.params.m0)));
        if (better) {
          best.score = total;
          best.params = params;
          have_best = true;
        }
      }
    }
  }
  return best;
}

}  // namespace evospec
