#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evospec/grid.hpp"

namespace evospec {

/// Coefficients of the regional mean-response regression for one region:
/// level, forcing response, static seasonal harmonics and their
/// forcing-modulated counterparts. phi is the forcing memory parameter.
struct RegionMeanParams {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double phi = 0.0;
  std::vector<double> gamma;    // cos coefficients, k = 1..K
  std::vector<double> zeta;     // sin coefficients
  std::vector<double> gamma_c;  // forcing-modulated cos coefficients
  std::vector<double> zeta_c;   // forcing-modulated sin coefficients
};

/// Regional warming relative to the equilibrated baseline and its rate of
/// change, at daily resolution over a forcing trajectory. `rate` is the
/// first difference smoothed by a 365-day centered moving average;
/// `rate_raw` is the unsmoothed difference.
struct WarmingSeries {
  std::vector<double> delta;     // kelvin
  std::vector<double> rate;      // kelvin/day
  std::vector<double> rate_raw;  // kelvin/day
};

/// Discounted log-CO2-ratio functional, computed by the recursion
/// C(t) = phi C(t-1) + (1-phi) log(co2(t)/co2_B) with C(0) = 0 (exact
/// under baseline-padded pre-history).
std::vector<double> forcing_response(const ForcingTrajectory& traj, double phi);

struct MeanFitOptions {
  int n_harmonics = 6;
  double phi_grid_step = 0.001;
  double phi_refine_tol = 1e-6;
  std::optional<double> fixed_phi;  // skip the profile search
};

/// Fitted mean emulator plus everything needed to evaluate it for new
/// scenarios: region map, pattern-scaling factors and the forcing
/// trajectories seen at fit time.
struct MeanModel {
  int n_harmonics = 6;
  std::size_t n_lat = 0;
  std::size_t n_lon = 0;
  double co2_baseline_ppm = 0.0;
  RegionPartition regions;
  std::vector<double> lambda;  // per location
  std::map<int, RegionMeanParams> region_params;
  std::map<std::string, ForcingTrajectory> forcings;
  std::map<std::string, ScenarioKind> scenario_kinds;

  const RegionMeanParams& params_for_region(int region) const;
  const RegionMeanParams& params_for_location(std::size_t l) const;
  const ForcingTrajectory& forcing(const std::string& scenario) const;

  /// Regional warming path for a scenario (baseline gives zeros).
  WarmingSeries warming(const std::string& scenario, int region) const;

  /// Local mean change from the baseline climate at day t of the
  /// scenario's trajectory, including the change in the mean seasonal
  /// cycle, pattern-scaled to location l.
  double local_change(std::size_t l, const std::string& scenario, std::int64_t t) const;

  /// Same but with a caller-supplied forcing response value C(t).
  double local_change_at(std::size_t l, double forcing_c, std::int64_t t) const;
};

MeanModel fit_mean_model(const ScenarioEnsemble& ensemble, const MeanFitOptions& opts = {});

/// Pattern scaling coefficients: per-location OLS slope through the origin
/// of annual-mean local change on annual-mean regional change.
std::vector<double> fit_pattern_scaling(const ScenarioEnsemble& ensemble);

WarmingSeries warming_path(const RegionMeanParams& params, const ForcingTrajectory& traj);

void save_mean_model(const std::filesystem::path& path, const MeanModel& model);
MeanModel load_mean_model(const std::filesystem::path& path);

}  // namespace evospec
