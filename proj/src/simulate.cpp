#include "evospec/simulate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>

#include "evospec/threads.hpp"
#include "evospec/transfer.hpp"

namespace evospec {

namespace {

struct Window {
  std::size_t offset = 0;  // 0-based day offset within the trajectory
  std::size_t length = 0;
};

Window window_for(const ForcingTrajectory& traj, std::int64_t start_year, std::size_t n_days) {
  const std::int64_t first = traj.day_of_year_start(start_year);
  if (first < 1 || static_cast<std::size_t>(first - 1) + n_days > traj.n_days()) {
    throw ConfigError("simulation window [" + std::to_string(start_year) + ", +" +
                      std::to_string(n_days / 365) + "y) lies outside the '" + traj.scenario() +
                      "' trajectory");
  }
  return {static_cast<std::size_t>(first - 1), n_days};
}

WarmingSlice slice_warming(const WarmingSeries& w, const Window& win) {
  WarmingSlice s;
  s.delta.assign(w.delta.begin() + static_cast<std::ptrdiff_t>(win.offset),
                 w.delta.begin() + static_cast<std::ptrdiff_t>(win.offset + win.length));
  s.rate.assign(w.rate.begin() + static_cast<std::ptrdiff_t>(win.offset),
                w.rate.begin() + static_cast<std::ptrdiff_t>(win.offset + win.length));
  return s;
}

}  // namespace

GridSeries fit_obs_trend(const GridSeries& obs, const SeasonalModel& seasonal,
                         const MeanModel& mean_model, const std::string& source_scenario,
                         std::int64_t obs_start_year) {
  const std::size_t n = obs.n_time;
  const std::size_t n_loc = obs.n_loc;
  GridSeries trend(n, n_loc);
  const auto& traj = mean_model.forcing(source_scenario);
  const auto win = window_for(traj, obs_start_year, n);
  const int k_max = mean_model.n_harmonics;

  for (std::size_t l = 0; l < n_loc; ++l) {
    const auto& params = mean_model.params_for_location(l);
    const auto c_full = forcing_response(traj, params.phi);
    std::vector<double> c(n);
    double c_abs = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      c[t] = c_full[win.offset + t];
      c_abs += std::abs(c[t]);
    }
    if (c_abs < 1e-12) continue;  // no forcing variation: zero trend

    const int p = 2 + 2 * k_max;  // intercept, C, C*cos_k, C*sin_k
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(p);
    std::vector<double> row(static_cast<std::size_t>(p));
    for (std::size_t t = 0; t < n; ++t) {
      const int di = static_cast<int>(t % 365);
      row[0] = 1.0;
      row[1] = c[t];
      for (int k = 1; k <= k_max; ++k) {
        const double arg = kTwoPi * k * static_cast<double>(t + 1) / 365.0;
        row[static_cast<std::size_t>(2 * k)] = c[t] * std::cos(arg);
        row[static_cast<std::size_t>(2 * k + 1)] = c[t] * std::sin(arg);
      }
      const double resid = obs.at(t, l) - seasonal.m(di, l);
      for (int a = 0; a < p; ++a) {
        xty[a] += row[static_cast<std::size_t>(a)] * resid;
        for (int b = a; b < p; ++b) {
          xtx(a, b) += row[static_cast<std::size_t>(a)] * row[static_cast<std::size_t>(b)];
        }
      }
    }
    Eigen::MatrixXd sym = xtx.selfadjointView<Eigen::Upper>();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sym);
    lu.setThreshold(1e-10);
    if (lu.rank() < p) continue;  // degenerate window: leave trend at zero
    const Eigen::VectorXd beta = lu.solve(xty);
    for (std::size_t t = 0; t < n; ++t) {
      double v = beta[1] * c[t];
      for (int k = 1; k <= k_max; ++k) {
        const double arg = kTwoPi * k * static_cast<double>(t + 1) / 365.0;
        v += beta[2 * k] * c[t] * std::cos(arg) + beta[2 * k + 1] * c[t] * std::sin(arg);
      }
      trend.at(t, l) = v;
    }
  }
  return trend;
}

SimulationOutput simulate(const SimulationRequest& request) {
  if (!request.obs || !request.seasonal || !request.mean_model || !request.spectra) {
    throw ConfigError("simulate: missing inputs");
  }
  const GridSeries& obs = *request.obs;
  const SeasonalModel& seasonal = *request.seasonal;
  const MeanModel& mean_model = *request.mean_model;
  const SpectralChangeModel& spectra = *request.spectra;
  const std::size_t n = obs.n_time;
  const std::size_t n_loc = obs.n_loc;
  if (seasonal.n_loc != n_loc || spectra.locations.size() != n_loc) {
    throw ConfigError("simulate: grid size mismatch across inputs");
  }
  if (request.obs_trend &&
      (request.obs_trend->n_time != n || request.obs_trend->n_loc != n_loc)) {
    throw ConfigError("simulate: obs_trend dims mismatch");
  }

  const auto& src_traj = mean_model.forcing(request.source_scenario);
  const auto& tgt_traj = mean_model.forcing(request.target_scenario);
  const auto src_win = window_for(src_traj, request.obs_start_year, n);
  const auto tgt_win = window_for(tgt_traj, request.target_start_year, n);

  // Per-region warming paths and per-location forcing-response caches.
  std::map<int, WarmingSlice> src_slice, tgt_slice;
  std::map<int, std::vector<double>> src_c, tgt_c;
  for (int region : mean_model.regions.region_ids()) {
    src_slice.emplace(region, slice_warming(mean_model.warming(request.source_scenario, region), src_win));
    tgt_slice.emplace(region, slice_warming(mean_model.warming(request.target_scenario, region), tgt_win));
    const double phi = mean_model.params_for_region(region).phi;
    const bool src_base =
        mean_model.scenario_kinds.at(request.source_scenario) == ScenarioKind::BaselineEquilibrated;
    const bool tgt_base =
        mean_model.scenario_kinds.at(request.target_scenario) == ScenarioKind::BaselineEquilibrated;
    src_c.emplace(region, src_base ? std::vector<double>(src_traj.n_days(), 0.0)
                                   : forcing_response(src_traj, phi));
    tgt_c.emplace(region, tgt_base ? std::vector<double>(tgt_traj.n_days(), 0.0)
                                   : forcing_response(tgt_traj, phi));
  }

  SimulationOutput out;
  out.series = GridSeries(n, n_loc);
  out.source_scenario = request.source_scenario;
  out.target_scenario = request.target_scenario;
  out.obs_start_year = request.obs_start_year;
  out.target_start_year = request.target_start_year;

  std::mutex stats_mu;
  parallel_for(n_loc, request.threads, [&](std::size_t l) {
    const int region = mean_model.regions.region_of(l);
    TransferPlan plan = TransferPlan::from_location_model(
        spectra.locations[l], src_slice.at(region), tgt_slice.at(region), request.taylor_order);

    std::vector<double> e(n);
    for (std::size_t t = 0; t < n; ++t) {
      const int di = static_cast<int>(t % 365);
      const double mu0 = request.obs_trend ? request.obs_trend->at(t, l) : 0.0;
      e[t] = (obs.at(t, l) - mu0 - seasonal.m(di, l)) / seasonal.d(di, l);
    }
    TransferPlan::SolveInfo info;
    const auto x = plan.solve_transfer(e, &info);
    const auto v = plan.apply_transfer(TransferPlan::Side::Target, x);

    const auto& cs = src_c.at(region);
    const auto& ct = tgt_c.at(region);
    for (std::size_t t = 0; t < n; ++t) {
      const int di = static_cast<int>(t % 365);
      const double mu0 = request.obs_trend ? request.obs_trend->at(t, l) : 0.0;
      const std::int64_t t_src = static_cast<std::int64_t>(src_win.offset + t + 1);
      const std::int64_t t_tgt = static_cast<std::int64_t>(tgt_win.offset + t + 1);
      const double change = mean_model.local_change_at(l, ct[static_cast<std::size_t>(t_tgt - 1)], t_tgt) -
                            mean_model.local_change_at(l, cs[static_cast<std::size_t>(t_src - 1)], t_src);
      out.series.at(t, l) = mu0 + seasonal.m(di, l) + change + seasonal.d(di, l) * v[t];
    }
    {
      std::lock_guard<std::mutex> lock(stats_mu);
      out.max_solver_iterations = std::max(out.max_solver_iterations, info.iterations);
      out.max_solver_residual = std::max(out.max_solver_residual, info.relative_residual);
      for (const auto& w : plan.warnings()) {
        out.warnings.push_back("location " + std::to_string(l + 1) + ": " + w);
      }
    }
  });
  std::sort(out.warnings.begin(), out.warnings.end());
  return out;
}

}  // namespace evospec
