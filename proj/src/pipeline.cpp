#include "evospec/pipeline.hpp"

#include <algorithm>
#include <atomic>

#include "evospec/periodogram.hpp"
#include "evospec/threads.hpp"

namespace evospec {

std::vector<WhittleData> build_whittle_inputs(const ScenarioEnsemble& ensemble,
                                              const MeanModel& mean_model,
                                              const SpectraFitOptions& opts, bool* truncated) {
  const std::size_t n_loc = ensemble.grid.n_loc();
  const std::size_t m = opts.block_days;
  const auto& baseline = ensemble.baseline();

  // GCM seasonal cycles come from the equilibrated baseline run.
  const SeasonalModel seasonal =
      fit_seasonal_model(baseline.runs[0], opts.seasonal_harmonics, opts.variance_half_window);

  auto excluded = [&](const std::string& label) {
    return std::find(opts.exclude_scenarios.begin(), opts.exclude_scenarios.end(), label) !=
           opts.exclude_scenarios.end();
  };

  std::atomic<bool> any_truncated{false};
  std::vector<WhittleData> inputs(n_loc);
  for (std::size_t l = 0; l < n_loc; ++l) inputs[l].m_grid = m;

  for (const auto* scenario : ensemble.transients()) {
    if (excluded(scenario->id.label)) continue;
    const auto contrasts = compute_contrasts(*scenario, seasonal);
    const std::size_t n_blocks = scenario->n_time() / m;
    if (n_blocks == 0) {
      throw ConfigError("fit_spectra: scenario '" + scenario->id.label +
                        "' shorter than one block");
    }
    // Warming covariates at block midpoints, one series per region.
    std::map<int, std::vector<BlockCovariates>> covariates;
    for (int region : ensemble.regions.region_ids()) {
      const auto w = mean_model.warming(scenario->id.label, region);
      std::vector<BlockCovariates> cov(n_blocks);
      for (std::size_t b = 0; b < n_blocks; ++b) {
        const std::size_t mid = b * m + m / 2;  // 1-based day
        cov[b] = {w.delta[mid - 1], w.rate[mid - 1]};
      }
      covariates.emplace(region, std::move(cov));
    }
    parallel_for(n_loc, opts.threads, [&](std::size_t l) {
      std::vector<std::vector<double>> runs;
      runs.reserve(contrasts.size());
      for (const auto& q : contrasts) runs.push_back(q.location_series(l));
      bool trunc = false;
      WhittleScenarioData sd;
      sd.label = scenario->id.label;
      sd.n_realizations = static_cast<double>(runs.size());
      sd.avg_periodogram = local_periodograms(runs, m, &trunc);
      sd.blocks = covariates.at(ensemble.regions.region_of(l));
      if (trunc) any_truncated = true;
      inputs[l].scenarios.push_back(std::move(sd));
    });
  }

  parallel_for(n_loc, opts.threads, [&](std::size_t l) {
    const auto y = baseline.runs[0].location_series(l);
    std::vector<double> m_cycle(365), d_cycle(365);
    for (int di = 0; di < 365; ++di) {
      m_cycle[static_cast<std::size_t>(di)] = seasonal.m(di, l);
      d_cycle[static_cast<std::size_t>(di)] = seasonal.d(di, l);
    }
    const auto x_b = deseasonalize(y, m_cycle, d_cycle);
    bool trunc = false;
    inputs[l].baseline = baseline_periodogram(x_b, m, &trunc);
    // Information weight of each aggregated ordinate: fine bins per
    // coarse bin after truncation to whole blocks.
    inputs[l].baseline_weight = static_cast<double>(x_b.size() / m);
    if (trunc) any_truncated = true;
  });

  if (truncated) *truncated = any_truncated.load();
  return inputs;
}

SpectraFitResult fit_spectra(const ScenarioEnsemble& ensemble, const MeanModel& mean_model,
                             const SpectraFitOptions& opts) {
  SpectraFitResult result;
  result.inputs = build_whittle_inputs(ensemble, mean_model, opts, &result.truncated_blocks);
  const std::size_t n_loc = result.inputs.size();
  const std::size_t m = opts.block_days;

  WhittleOptions wopts;
  wopts.fix_delta1_zero = opts.fix_delta1_zero;
  std::vector<RoughFit> rough(n_loc);
  parallel_for(n_loc, opts.threads, [&](std::size_t l) {
    rough[l] = maximize_whittle(result.inputs[l], wopts);
    // Remove the first-order estimator bias: a design-only constant that
    // is negligible per frequency but not after heavy smoothing.
    const auto bias = whittle_rough_bias(result.inputs[l], wopts.fix_delta1_zero);
    for (std::size_t j = 0; j < m; ++j) {
      rough[l].log_a[j] -= bias.log_a;
      rough[l].delta0[j] -= bias.delta0;
      rough[l].delta1[j] -= bias.delta1;
    }
  });

  // Bandwidths per region, separately for the two sensitivity functions.
  for (int region : ensemble.regions.region_ids()) {
    const auto& members = ensemble.regions.locations_in(region);
    if (opts.fixed_bw0) {
      result.bw0_by_region[region] = *opts.fixed_bw0;
    } else {
      std::vector<std::span<const double>> views;
      for (std::size_t l : members) views.emplace_back(rough[l].delta0);
      result.bw0_by_region[region] = cross_validate_bandwidth(views, m, opts.cv_grid).params;
    }
    if (opts.fixed_bw1) {
      result.bw1_by_region[region] = *opts.fixed_bw1;
    } else {
      std::vector<std::span<const double>> views;
      for (std::size_t l : members) views.emplace_back(rough[l].delta1);
      result.bw1_by_region[region] = cross_validate_bandwidth(views, m, opts.cv_grid).params;
    }
  }

  result.model.m_grid = m;
  result.model.n_lat = ensemble.grid.n_lat;
  result.model.n_lon = ensemble.grid.n_lon;
  result.model.locations.resize(n_loc);
  parallel_for(n_loc, opts.threads, [&](std::size_t l) {
    const int region = ensemble.regions.region_of(l);
    result.model.locations[l] =
        smooth_and_attach_errors(rough[l], result.inputs[l], m, result.bw0_by_region.at(region),
                                 result.bw1_by_region.at(region));
  });
  return result;
}

std::vector<double> deviance_by_location(const SpectraFitResult& fit) {
  const std::size_t n_loc = fit.inputs.size();
  std::vector<double> out(n_loc);
  for (std::size_t l = 0; l < n_loc; ++l) {
    const auto& loc = fit.model.locations[l];
    std::vector<double> a(fit.model.m_grid);
    for (std::size_t j = 0; j < a.size(); ++j) a[j] = std::exp(loc.log_a_rough[j]);
    out[l] = deviance(fit.inputs[l], a, loc.delta0_hat, loc.delta1_hat);
  }
  return out;
}

HoldoutDiagnostic holdout_diagnostic(const ScenarioEnsemble& ensemble, const MeanModel& mean_model,
                                     const std::string& heldout_scenario,
                                     const SpectraFitOptions& opts) {
  // Check the scenario exists and is transient.
  const auto& held = ensemble.scenario(heldout_scenario);
  if (held.id.kind != ScenarioKind::Transient) {
    throw ConfigError("holdout_diagnostic: held-out scenario must be transient");
  }

  SpectraFitOptions fit_opts = opts;
  fit_opts.exclude_scenarios.push_back(heldout_scenario);
  HoldoutDiagnostic diag;
  diag.fit_full = fit_spectra(ensemble, mean_model, fit_opts);
  SpectraFitOptions reduced_opts = fit_opts;
  reduced_opts.fix_delta1_zero = true;
  diag.fit_reduced = fit_spectra(ensemble, mean_model, reduced_opts);

  // Held-out data only.
  SpectraFitOptions held_opts = opts;
  held_opts.exclude_scenarios.clear();
  for (const auto& s : ensemble.scenarios) {
    if (s.id.kind == ScenarioKind::Transient && s.id.label != heldout_scenario) {
      held_opts.exclude_scenarios.push_back(s.id.label);
    }
  }
  const auto held_inputs = build_whittle_inputs(ensemble, mean_model, held_opts);

  const std::size_t n_loc = held_inputs.size();
  diag.loglik_full.resize(n_loc);
  diag.loglik_reduced.resize(n_loc);
  for (std::size_t l = 0; l < n_loc; ++l) {
    if (held_inputs[l].scenarios.size() != 1) {
      throw ConfigError("holdout_diagnostic: expected exactly one held-out scenario");
    }
    const auto& held_data = held_inputs[l].scenarios[0];
    const auto eval = [&](const SpectraFitResult& fit) {
      const auto& loc = fit.model.locations[l];
      std::vector<double> a(fit.model.m_grid);
      for (std::size_t j = 0; j < a.size(); ++j) a[j] = std::exp(loc.log_a_rough[j]);
      return predictive_loglik(held_data, fit.model.m_grid, a, loc.delta0_hat, loc.delta1_hat);
    };
    diag.loglik_full[l] = eval(diag.fit_full);
    diag.loglik_reduced[l] = eval(diag.fit_reduced);
  }
  return diag;
}

}  // namespace evospec
