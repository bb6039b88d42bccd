#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evospec/grid.hpp"
#include "evospec/mean_emulator.hpp"
#include "evospec/seasonal.hpp"
#include "evospec/spectral_model.hpp"
#include "evospec/whittle.hpp"

namespace evospec {

struct SpectraFitOptions {
  std::size_t block_days = 3650;  // ten model years
  int seasonal_harmonics = 10;
  int variance_half_window = 15;
  std::optional<BandwidthParams> fixed_bw0;  // bypass cross-validation when set
  std::optional<BandwidthParams> fixed_bw1;
  CvGrid cv_grid;
  bool fix_delta1_zero = false;
  std::vector<std::string> exclude_scenarios;
  int threads = 1;
};

/// Per-location likelihood inputs assembled from an ensemble: contrasts
/// through local periodograms, the aggregated baseline periodogram, and
/// warming covariates at block midpoints.
std::vector<WhittleData> build_whittle_inputs(const ScenarioEnsemble& ensemble,
                                              const MeanModel& mean_model,
                                              const SpectraFitOptions& opts, bool* truncated = nullptr);

struct SpectraFitResult {
  SpectralChangeModel model;
  std::vector<WhittleData> inputs;  // per location, as fitted
  std::map<int, BandwidthParams> bw0_by_region;
  std::map<int, BandwidthParams> bw1_by_region;
  bool truncated_blocks = false;
};

SpectraFitResult fit_spectra(const ScenarioEnsemble& ensemble, const MeanModel& mean_model,
                             const SpectraFitOptions& opts = {});

/// Deviance of the fitted model (smoothed sensitivities, rough baseline
/// spectrum) against the saturated model, per location.
std::vector<double> deviance_by_location(const SpectraFitResult& fit);

struct HoldoutDiagnostic {
  std::vector<double> loglik_full;     // per location, full model
  std::vector<double> loglik_reduced;  // delta1 = 0 model
  SpectraFitResult fit_full;           // fitted without the held-out scenario
  SpectraFitResult fit_reduced;
};

/// Fits emulators excluding one scenario (full and delta1=0 variants) and
/// evaluates their predictive log-likelihood on that scenario's data.
HoldoutDiagnostic holdout_diagnostic(const ScenarioEnsemble& ensemble, const MeanModel& mean_model,
                                     const std::string& heldout_scenario,
                                     const SpectraFitOptions& opts = {});

}  // namespace evospec
