#pragma once

#include <span>
#include <vector>

#include "evospec/grid.hpp"

namespace evospec {

/// Per-location seasonal cycles: mean cycle m(d) in kelvin and the
/// dimensionless marginal-variance modulation D(d), both of period 365.
/// D is normalized so that mean_d D(d)^2 = 1; the overall variance level
/// lives in the spectra.
struct SeasonalModel {
  std::size_t n_loc = 0;
  std::vector<double> mean_cycle;   // [d * n_loc + l], 365 rows
  std::vector<double> scale_cycle;  // [d * n_loc + l], 365 rows

  double m(int day_index, std::size_t l) const {
    return mean_cycle[static_cast<std::size_t>(day_index) * n_loc + l];
  }
  double d(int day_index, std::size_t l) const {
    return scale_cycle[static_cast<std::size_t>(day_index) * n_loc + l];
  }
};

/// Least-squares fit of b0 + sum_k gamma_k cos(2 pi k d/365) + zeta_k sin(...).
/// Returns the cycle evaluated on d = 1..365. Needs >= 2 full years.
std::vector<double> fit_mean_seasonal_cycle(std::span<const double> series, int n_harmonics);

/// Across-year average of windowed sample variances (centered, circular,
/// d +/- half_window), normalized so mean_d D^2 = 1. Input should be
/// mean-cycle residuals; incomplete trailing years are ignored.
std::vector<double> fit_variance_seasonal_cycle(std::span<const double> residuals, int half_window);

struct DeseasonalizedSeries {
  std::vector<double> values;
  std::string scenario;
  std::size_t realization = 0;
};

std::vector<double> deseasonalize(std::span<const double> series, std::span<const double> mean_cycle,
                                  std::span<const double> scale_cycle);
std::vector<double> reseasonalize(std::span<const double> x, std::span<const double> mean_cycle,
                                  std::span<const double> scale_cycle);

/// Fits m and D for every location of a gridded series.
SeasonalModel fit_seasonal_model(const GridSeries& series, int n_harmonics, int half_window);

/// De-seasonalized contrasts q_{l,r}(t) = (y_{l,r}(t) - mean_k y_{l,k}(t)) / D_l(d).
/// Requires at least two realizations.
std::vector<GridSeries> compute_contrasts(const ScenarioData& scenario, const SeasonalModel& seasonal);

}  // namespace evospec
