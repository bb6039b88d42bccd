#pragma once

#include <span>
#include <vector>

namespace evospec {

/// Local periodograms averaged across realizations: result[b][j] is
/// I-bar at omega_j = 2 pi j / M for time block b. Realizations must share
/// a common length; a trailing partial block is truncated (flagged via
/// `truncated` when non-null).
std::vector<std::vector<double>> local_periodograms(
    const std::vector<std::vector<double>>& realizations, std::size_t block_len,
    bool* truncated = nullptr);

/// Full-length periodogram of the baseline series aggregated onto the
/// coarser block frequency grid by box-averaging the N_B/M nearest fine
/// ordinates. The baseline is truncated to a multiple of block_len.
std::vector<double> baseline_periodogram(std::span<const double> x_baseline, std::size_t block_len,
                                         bool* truncated = nullptr);

}  // namespace evospec
