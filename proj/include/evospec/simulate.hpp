#pragma once

#include <cstdint>
#include <string>

#include "evospec/grid.hpp"
#include "evospec/mean_emulator.hpp"
#include "evospec/seasonal.hpp"
#include "evospec/spectral_model.hpp"

namespace evospec {

/// Observation-driven transformation: decorrelate the de-seasonalized,
/// detrended observations with the source covariance-change surface,
/// recolor with the target surface, then restore seasonality and add the
/// emulated mean changes.
struct SimulationRequest {
  const GridSeries* obs = nullptr;
  const SeasonalModel* seasonal = nullptr;   // fitted on the observations
  const GridSeries* obs_trend = nullptr;     // mu-hat^(0), kelvin; null = zero trend
  const MeanModel* mean_model = nullptr;     // fitted on the GCM ensemble
  const SpectralChangeModel* spectra = nullptr;
  std::string source_scenario;               // scenario covering the observation years
  std::string target_scenario;
  std::int64_t obs_start_year = 0;
  std::int64_t target_start_year = 0;
  int taylor_order = 10;
  int threads = 1;
};

struct SimulationOutput {
  GridSeries series;
  std::string source_scenario;
  std::string target_scenario;
  std::int64_t obs_start_year = 0;
  std::int64_t target_start_year = 0;
  int max_solver_iterations = 0;
  double max_solver_residual = 0.0;
  std::vector<std::string> warnings;  // e.g., extreme log-ratio surfaces
};

SimulationOutput simulate(const SimulationRequest& request);

/// Observation-record mean trend via the forced component of the regional
/// response regression, fitted per location at the GCM-estimated memory
/// parameter of the location's region. Returns zeros when the forcing
/// does not vary over the window.
GridSeries fit_obs_trend(const GridSeries& obs, const SeasonalModel& seasonal,
                         const MeanModel& mean_model, const std::string& source_scenario,
                         std::int64_t obs_start_year);

}  // namespace evospec
