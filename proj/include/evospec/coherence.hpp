#pragma once

#include <span>
#include <vector>

namespace evospec {

/// Block-local squared coherence between two de-seasonalized series:
/// |smoothed cross-spectrum|^2 over the product of smoothed marginal
/// spectra, with circular quadratic-kernel smoothing of half-width
/// `smooth_half_width`. Both inputs must have equal length (the block).
std::vector<double> coherence_diagnostic(std::span<const double> x1, std::span<const double> x2,
                                         int smooth_half_width);

}  // namespace evospec
