#pragma once

#include <span>
#include <vector>

namespace evospec {

/// Variable-bandwidth kernel parameters: half-widths m0 (minimum, used at
/// the spectrum edges) and m1 (maximum, used in the interior), and the
/// transition fraction p of the normalized half-spectrum.
struct BandwidthParams {
  double m0 = 0.0;
  double m1 = 0.0;
  double p = 0.5;

  void check() const;
};

/// Raised-cosine transition profile h on the normalized half-spectrum
/// u in [0,1]: 0 at both edges, 1 on [p/2, 1-p/2].
double bandwidth_profile(double u, double p);

/// Bandwidth M_j = (m1-m0) h(u_j) + m0 at unique frequency index j of an
/// M-point grid (u_j = j / (M/2)).
double bandwidth_at(std::size_t j, std::size_t m_grid, const BandwidthParams& params);

/// Quadratic kernel weights at target index j folded onto the unique
/// frequency indices [0, M/2] by even-periodic reflection. The returned
/// dense vector has length M/2+1 and sums to 1.
std::vector<double> folded_kernel_weights(std::size_t j, std::size_t m_grid, double bandwidth);

/// Kernel-smooths a rough even-periodic sequence given on the full M-point
/// grid; returns the smoothed full grid (even by construction).
std::vector<double> smooth_delta(std::span<const double> rough_full, std::size_t m_grid,
                                 const BandwidthParams& params);

/// Weight diagnostics used by cross-validation and variance propagation.
struct WeightSums {
  double self = 0.0;    // effective weight on the target ordinate
  double sum_sq = 0.0;  // sum of squared folded weights
};
WeightSums weight_sums(std::size_t j, std::size_t m_grid, double bandwidth);

/// Sum over unique indices of the product of two folded weight vectors
/// (used for the cross-covariance of estimates smoothed at different
/// bandwidths).
double weight_cross_sum(std::size_t j, std::size_t m_grid, double bandwidth_a, double bandwidth_b);

struct CvGrid {
  std::vector<double> m_values{25, 50, 100, 200, 400, 800};
  std::vector<double> p_values{0.1, 0.3, 0.5, 0.7, 0.9};
};

struct CvResult {
  BandwidthParams params;
  double score = 0.0;
};

/// Leave-one-out bandwidth selection over a fixed grid, pooling the CV
/// score across locations of a region. Ties break toward larger m1, then
/// larger m0.
CvResult cross_validate_bandwidth(const std::vector<std::span<const double>>& rough_by_location,
                                  std::size_t m_grid, const CvGrid& grid = {});

}  // namespace evospec
