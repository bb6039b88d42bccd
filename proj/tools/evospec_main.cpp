// Command-line front end: synth -> fit-seasonal -> fit-mean -> fit-spectra
// -> simulate -> diagnose, plus plot-data emission. Every run writes a
// machine-readable report next to its primary output.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <nlohmann/json.hpp>

#include "evospec/coherence.hpp"
#include "evospec/gridio.hpp"
#include "evospec/mean_emulator.hpp"
#include "evospec/pipeline.hpp"
#include "evospec/simulate.hpp"
#include "evospec/spectral_model.hpp"
#include "evospec/synthetic.hpp"
#include "evospec/version.hpp"

using namespace evospec;
using nlohmann::json;

namespace {

struct GlobalConfig {
  int threads = 2;
  std::uint64_t seed = 1;
};

int env_threads_override(int cli_threads) {
  if (const char* env = std::getenv("TS_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (...) {
      throw ConfigError("TS_THREADS is not an integer");
    }
  }
  return cli_threads;
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return 0;
  std::uint64_t h = 1469598103934665603ull;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const auto got = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  return h;
}

class RunReport {
 public:
  RunReport(std::string command, json config)
      : command_(std::move(command)), config_(std::move(config)),
        start_(std::chrono::steady_clock::now()) {}

  void add_output(const std::filesystem::path& path) { outputs_.push_back(path); }

  void write(const std::filesystem::path& primary_output) const {
    json j;
    j["tool"] = "evospec";
    j["version"] = kVersion;
    j["command"] = command_;
    j["config"] = config_;
    j["elapsed_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json checks = json::object();
    for (const auto& p : outputs_) {
      char hex[32];
      std::snprintf(hex, sizeof(hex), "%016llx",
                    static_cast<unsigned long long>(fnv1a_file(p)));
      checks[p.filename().string()] = hex;
    }
    j["output_checksums"] = checks;
    auto report_path = primary_output;
    report_path += ".report.json";
    std::ofstream out(report_path);
    out << j.dump(2) << "\n";
  }

 private:
  std::string command_;
  json config_;
  std::vector<std::filesystem::path> outputs_;
  std::chrono::steady_clock::time_point start_;
};

std::pair<std::int64_t, std::int64_t> parse_year_range(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError("year range must be <first>:<last>: " + s);
  return {std::stoll(s.substr(0, colon)), std::stoll(s.substr(colon + 1))};
}

void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::string>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for write: " + path.string());
  out << header << "\n";
  for (const auto& r : rows) out << r << "\n";
}

// ---------------------------------------------------------------------

int cmd_synth(const std::string& spec_path, const std::string& out_dir, std::uint64_t seed_override,
              bool has_seed) {
  auto spec = SyntheticSpec::from_json_file(spec_path);
  if (has_seed) spec.seed = seed_override;
  RunReport report("synth", {{"spec", spec_path}, {"out_dir", out_dir}, {"seed", spec.seed}});
  const auto manifest = write_fixture(spec, out_dir);
  report.add_output(manifest);
  report.write(manifest);
  std::cout << "wrote " << manifest.string() << "\n";
  return 0;
}

int cmd_fit_seasonal(const std::string& input, int harmonics, int half_window,
                     const std::string& out) {
  RunReport report("fit-seasonal", {{"input", input},
                                    {"harmonics", harmonics},
                                    {"half_window", half_window},
                                    {"out", out}});
  const auto loaded = load_grid_series(input);
  const auto seasonal = fit_seasonal_model(loaded.series, harmonics, half_window);

  const std::filesystem::path base(out);
  auto mean_path = base;
  mean_path.replace_extension(".mean.f64grid");
  auto scale_path = base;
  scale_path.replace_extension(".scale.f64grid");
  GridHeader h;
  h.n_time = 365;
  h.n_loc = seasonal.n_loc;
  h.n_lat = loaded.header.n_lat;
  h.n_lon = loaded.header.n_lon;
  h.scenario = loaded.header.scenario;
  h.kind = "seasonal";
  GridSeries m(365, seasonal.n_loc), d(365, seasonal.n_loc);
  m.data = seasonal.mean_cycle;
  d.data = seasonal.scale_cycle;
  write_grid_series(mean_path, m, h);
  write_grid_series(scale_path, d, h);
  report.add_output(mean_path);
  report.add_output(scale_path);
  report.write(mean_path);
  std::cout << "wrote " << mean_path.string() << " and " << scale_path.string() << "\n";
  return 0;
}

SeasonalModel load_seasonal(const std::filesystem::path& base) {
  auto mean_path = base;
  mean_path.replace_extension(".mean.f64grid");
  auto scale_path = base;
  scale_path.replace_extension(".scale.f64grid");
  const auto m = load_grid_series(mean_path);
  const auto d = load_grid_series(scale_path);
  if (m.series.n_time != 365 || d.series.n_time != 365 || m.series.n_loc != d.series.n_loc) {
    throw ConfigError("seasonal grids malformed under " + base.string());
  }
  SeasonalModel s;
  s.n_loc = m.series.n_loc;
  s.mean_cycle = m.series.data;
  s.scale_cycle = d.series.data;
  return s;
}

int cmd_fit_mean(const std::string& manifest, const std::string& out, int harmonics,
                 const std::string& regions_csv) {
  RunReport report("fit-mean", {{"ensemble", manifest},
                                {"out", out},
                                {"harmonics", harmonics},
                                {"regions", regions_csv}});
  auto ens = load_ensemble(manifest);
  if (!regions_csv.empty()) {
    ens.regions = RegionPartition(read_region_csv(regions_csv, ens.grid.n_loc()));
    ens.validate();
  }
  MeanFitOptions opts;
  opts.n_harmonics = harmonics;
  const auto model = fit_mean_model(ens, opts);
  save_mean_model(out, model);
  report.add_output(out);
  report.write(out);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_fit_spectra(const std::string& manifest, const std::string& mean_params, int block_years,
                    const std::string& out, int threads, const std::string& exclude,
                    bool fix_delta1) {
  RunReport report("fit-spectra", {{"ensemble", manifest},
                                   {"mean_params", mean_params},
                                   {"block_years", block_years},
                                   {"exclude", exclude},
                                   {"fix_delta1", fix_delta1},
                                   {"out", out}});
  const auto ens = load_ensemble(manifest);
  const auto mean_model = load_mean_model(mean_params);
  SpectraFitOptions opts;
  opts.block_days = static_cast<std::size_t>(block_years) * 365;
  opts.threads = threads;
  opts.fix_delta1_zero = fix_delta1;
  if (!exclude.empty()) opts.exclude_scenarios.push_back(exclude);
  const auto fit = fit_spectra(ens, mean_model, opts);
  if (fit.truncated_blocks) {
    std::cerr << "warning: trailing partial blocks were truncated\n";
  }
  save_spectral_model(out, fit.model);
  report.add_output(out);
  report.write(out);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_simulate(const std::string& obs_path, const std::string& seasonal_base,
                 const std::string& spectra_path, const std::string& mean_params,
                 const std::string& source, const std::string& target,
                 const std::string& obs_years, const std::string& target_years,
                 const std::string& out, int taylor_order, int threads, bool no_obs_trend) {
  RunReport report("simulate", {{"obs", obs_path},
                                {"seasonal", seasonal_base},
                                {"spectra", spectra_path},
                                {"mean_params", mean_params},
                                {"source", source},
                                {"scenario", target},
                                {"obs_years", obs_years},
                                {"target_years", target_years},
                                {"taylor_order", taylor_order},
                                {"out", out}});
  const auto obs = load_grid_series(obs_path);
  const auto seasonal = load_seasonal(seasonal_base);
  const auto spectra = load_spectral_model(spectra_path);
  const auto mean_model = load_mean_model(mean_params);
  const auto [obs_first, obs_last] = parse_year_range(obs_years);
  const auto [tgt_first, tgt_last] = parse_year_range(target_years);
  if (obs_last - obs_first != tgt_last - tgt_first) {
    throw ConfigError("obs and target year ranges must have equal lengths");
  }
  const auto n_days = static_cast<std::size_t>(obs_last - obs_first + 1) * 365;
  if (obs.series.n_time < n_days) {
    throw ConfigError("observation record shorter than the requested year range");
  }
  GridSeries window(n_days, obs.series.n_loc);
  const auto day0 = static_cast<std::size_t>(
      (obs_first - obs.header.start_year) * Calendar365::days_per_year);
  if (obs_first < obs.header.start_year ||
      day0 + n_days > obs.series.n_time) {
    throw ConfigError("requested obs years not covered by the record");
  }
  std::copy(obs.series.data.begin() + static_cast<std::ptrdiff_t>(day0 * obs.series.n_loc),
            obs.series.data.begin() + static_cast<std::ptrdiff_t>((day0 + n_days) * obs.series.n_loc),
            window.data.begin());

  GridSeries trend;
  SimulationRequest req;
  req.obs = &window;
  req.seasonal = &seasonal;
  req.mean_model = &mean_model;
  req.spectra = &spectra;
  req.source_scenario = source;
  req.target_scenario = target;
  req.obs_start_year = obs_first;
  req.target_start_year = tgt_first;
  req.taylor_order = taylor_order;
  req.threads = threads;
  if (!no_obs_trend) {
    trend = fit_obs_trend(window, seasonal, mean_model, source, obs_first);
    req.obs_trend = &trend;
  }
  const auto sim = simulate(req);
  for (const auto& w : sim.warnings) std::cerr << "warning: " << w << "\n";

  GridHeader h;
  h.n_time = n_days;
  h.n_loc = window.n_loc;
  h.n_lat = spectra.n_lat;
  h.n_lon = spectra.n_lon;
  h.scenario = target;
  h.kind = "simulation";
  h.start_year = tgt_first;
  write_grid_series(out, sim.series, h);
  report.add_output(out);
  report.write(out);
  std::cout << "wrote " << out << " (max solver iterations " << sim.max_solver_iterations
            << ", max residual " << sim.max_solver_residual << ")\n";
  return 0;
}

int cmd_diagnose(const std::string& manifest, const std::string& mean_params, int block_years,
                 bool do_deviance, const std::string& holdout, const std::string& out,
                 int threads) {
  RunReport report("diagnose", {{"ensemble", manifest},
                                {"mean_params", mean_params},
                                {"block_years", block_years},
                                {"deviance", do_deviance},
                                {"holdout", holdout},
                                {"out", out}});
  const auto ens = load_ensemble(manifest);
  const auto mean_model = load_mean_model(mean_params);
  SpectraFitOptions opts;
  opts.block_days = static_cast<std::size_t>(block_years) * 365;
  opts.threads = threads;

  if (do_deviance) {
    const auto fit = fit_spectra(ens, mean_model, opts);
    const auto dev = deviance_by_location(fit);
    std::vector<std::string> rows;
    for (std::size_t l = 0; l < dev.size(); ++l) {
      rows.push_back(std::to_string(l + 1) + "," + std::to_string(dev[l]));
    }
    write_csv(out, "location,deviance", rows);
  } else if (!holdout.empty()) {
    const auto diag = holdout_diagnostic(ens, mean_model, holdout, opts);
    std::vector<std::string> rows;
    for (std::size_t l = 0; l < diag.loglik_full.size(); ++l) {
      rows.push_back(std::to_string(l + 1) + "," +
                     std::to_string(diag.loglik_full[l] - diag.loglik_reduced[l]));
    }
    write_csv(out, "location,loglik_ratio_full_vs_delta1_zero", rows);
  } else {
    throw ConfigError("diagnose: choose --deviance or --holdout <scenario>");
  }
  report.add_output(out);
  report.write(out);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_plot_data(const std::string& spectra_path, const std::string& mean_params,
                  const std::string& kind, const std::string& scenario,
                  const std::vector<std::int64_t>& years, const std::string& out) {
  RunReport report("plot-data", {{"spectra", spectra_path},
                                 {"mean_params", mean_params},
                                 {"kind", kind},
                                 {"scenario", scenario},
                                 {"out", out}});
  const auto spectra = load_spectral_model(spectra_path);
  const auto mean_model = load_mean_model(mean_params);
  const std::size_t m = spectra.m_grid;

  std::vector<std::string> rows;
  std::string header;
  if (kind == "rho-curves") {
    // rho(t, omega) against frequency for each requested year.
    header = "scenario,year,freq_per_day,rho,se_log";
    const auto& traj = mean_model.forcing(scenario);
    const std::size_t l = 0;  // representative location
    const int region = mean_model.regions.region_of(l);
    const auto w = mean_model.warming(scenario, region);
    for (const auto year : years) {
      const auto day = static_cast<std::size_t>(traj.day_of_year_start(year)) + 182;
      if (day > w.delta.size()) throw ConfigError("year outside trajectory: " + std::to_string(year));
      for (std::size_t j = 1; j <= m / 2; ++j) {
        const double omega = kTwoPi * static_cast<double>(j) / static_cast<double>(m);
        const auto pred = predict_log_rho(spectra.locations[l], m, w.delta[day - 1],
                                          w.rate[day - 1], omega);
        rows.push_back(scenario + "," + std::to_string(year) + "," +
                       std::to_string(omega / kTwoPi) + "," + std::to_string(std::exp(pred.log_rho)) +
                       "," + std::to_string(pred.se));
      }
    }
  } else if (kind == "rho-map") {
    // rho per location at fixed frequencies for one year.
    header = "location,lat_index,lon_index,freq_per_day,rho";
    const auto& traj = mean_model.forcing(scenario);
    const auto year = years.empty() ? traj.start_year() : years[0];
    const std::vector<std::size_t> freq_idx = {m / 100 + 1, m / 10, m / 3};
    for (std::size_t l = 0; l < spectra.locations.size(); ++l) {
      const int region = mean_model.regions.region_of(l);
      const auto w = mean_model.warming(scenario, region);
      const auto day = static_cast<std::size_t>(traj.day_of_year_start(year)) + 182;
      for (const auto j : freq_idx) {
        const double omega = kTwoPi * static_cast<double>(j) / static_cast<double>(m);
        const auto pred = predict_log_rho(spectra.locations[l], m, w.delta[day - 1],
                                          w.rate[day - 1], omega);
        rows.push_back(std::to_string(l + 1) + "," + std::to_string(l / spectra.n_lon) + "," +
                       std::to_string(l % spectra.n_lon) + "," + std::to_string(omega / kTwoPi) +
                       "," + std::to_string(std::exp(pred.log_rho)));
      }
    }
  } else {
    throw ConfigError("plot-data: unknown kind '" + kind + "' (rho-curves | rho-map)");
  }
  write_csv(out, header, rows);
  report.add_output(out);
  report.write(out);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_coherence(const std::string& input, std::size_t loc_a, std::size_t loc_b, int half_width,
                  const std::string& out) {
  RunReport report("plot-data-coherence", {{"input", input},
                                           {"loc_a", loc_a},
                                           {"loc_b", loc_b},
                                           {"half_width", half_width},
                                           {"out", out}});
  const auto loaded = load_grid_series(input);
  if (loc_a < 1 || loc_b < 1 || loc_a > loaded.series.n_loc || loc_b > loaded.series.n_loc) {
    throw ConfigError("coherence: location index out of range");
  }
  const auto xa = loaded.series.location_series(loc_a - 1);
  const auto xb = loaded.series.location_series(loc_b - 1);
  const auto coh = coherence_diagnostic(xa, xb, half_width);
  std::vector<std::string> rows;
  for (std::size_t j = 0; j <= coh.size() / 2; ++j) {
    rows.push_back(std::to_string(static_cast<double>(j) / static_cast<double>(coh.size())) + "," +
                   std::to_string(coh[j]));
  }
  write_csv(out, "freq_per_day,coherence", rows);
  report.add_output(out);
  report.write(out);
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evolving-covariance climate simulation toolkit"};
  app.require_subcommand(1);
  GlobalConfig global;
  app.add_option("--threads", global.threads, "worker threads (TS_THREADS overrides)");

  // synth
  std::string synth_spec, synth_out = "fixtures";
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "generate a synthetic ensemble fixture");
  synth->add_option("--spec", synth_spec, "synthetic spec JSON")->required();
  synth->add_option("--out-dir", synth_out, "output directory");
  auto* seed_opt = synth->add_option("--seed", synth_seed, "override the spec seed");

  // fit-seasonal
  std::string fs_input, fs_out = "seasonal.f64grid";
  int fs_harmonics = 10, fs_half_window = 15;
  auto* fit_seasonal = app.add_subcommand("fit-seasonal", "fit mean and variance seasonal cycles");
  fit_seasonal->add_option("--input", fs_input, "gridded daily series (.f64grid)")->required();
  fit_seasonal->add_option("--harmonics", fs_harmonics, "annual harmonics for the mean cycle");
  fit_seasonal->add_option("--half-window", fs_half_window, "variance window half-width, days");
  fit_seasonal->add_option("--out", fs_out, "output base (.mean/.scale .f64grid)");

  // fit-mean
  std::string fm_manifest, fm_out = "mean_params.json", fm_regions;
  int fm_harmonics = 6;
  auto* fit_mean = app.add_subcommand("fit-mean", "fit the regional mean-response emulator");
  fit_mean->add_option("--ensemble", fm_manifest, "ensemble manifest JSON")->required();
  fit_mean->add_option("--regions", fm_regions, "region CSV overriding the manifest's");
  fit_mean->add_option("--harmonics", fm_harmonics, "seasonal-change harmonics (K)");
  fit_mean->add_option("--out", fm_out, "output parameter JSON");

  // fit-spectra
  std::string sp_manifest, sp_mean, sp_out = "spectra_model.bin", sp_exclude;
  int sp_block_years = 10;
  bool sp_fix_delta1 = false;
  auto* fit_sp = app.add_subcommand("fit-spectra", "fit the covariance-change model");
  fit_sp->add_option("--ensemble", sp_manifest, "ensemble manifest JSON")->required();
  fit_sp->add_option("--mean-params", sp_mean, "mean emulator parameters")->required();
  fit_sp->add_option("--block-years", sp_block_years, "local periodogram block length, years");
  fit_sp->add_option("--exclude", sp_exclude, "scenario label to exclude from the fit");
  fit_sp->add_flag("--fix-delta1", sp_fix_delta1, "force the rate sensitivity to zero");
  fit_sp->add_option("--out", sp_out, "output model file");

  // simulate
  std::string sim_obs, sim_seasonal, sim_spectra, sim_mean, sim_source = "historical",
              sim_target, sim_obs_years, sim_target_years, sim_out = "sim.f64grid";
  int sim_taylor = 10;
  bool sim_no_trend = false;
  auto* sim = app.add_subcommand("simulate", "transform observations to a target scenario");
  sim->add_option("--obs", sim_obs, "observation grid (.f64grid)")->required();
  sim->add_option("--seasonal", sim_seasonal, "seasonal base from fit-seasonal")->required();
  sim->add_option("--spectra", sim_spectra, "spectral model from fit-spectra")->required();
  sim->add_option("--mean-params", sim_mean, "mean emulator parameters")->required();
  sim->add_option("--source", sim_source, "scenario covering the observation years");
  sim->add_option("--scenario", sim_target, "target scenario")->required();
  sim->add_option("--obs-years", sim_obs_years, "observation window, first:last")->required();
  sim->add_option("--target-years", sim_target_years, "simulation window, first:last")->required();
  sim->add_option("--taylor-order", sim_taylor, "transfer expansion order P");
  sim->add_flag("--no-obs-trend", sim_no_trend, "skip the observation-record trend removal");
  sim->add_option("--out", sim_out, "output grid");

  // diagnose
  std::string dg_manifest, dg_mean, dg_holdout, dg_out = "diagnostic.csv";
  int dg_block_years = 10;
  bool dg_deviance = false;
  auto* diag = app.add_subcommand("diagnose", "model fit diagnostics");
  diag->add_option("--ensemble", dg_manifest, "ensemble manifest JSON")->required();
  diag->add_option("--mean-params", dg_mean, "mean emulator parameters")->required();
  diag->add_option("--block-years", dg_block_years, "block length, years");
  diag->add_flag("--deviance", dg_deviance, "per-location deviance vs the saturated model");
  diag->add_option("--holdout", dg_holdout, "scenario to hold out for emulation checking");
  diag->add_option("--out", dg_out, "output CSV");

  // plot-data
  std::string pd_spectra, pd_mean, pd_kind = "rho-curves", pd_scenario, pd_out = "plot.csv";
  std::vector<std::int64_t> pd_years;
  auto* plot = app.add_subcommand("plot-data", "emit tidy CSV for plotting");
  plot->add_option("--spectra", pd_spectra, "spectral model file")->required();
  plot->add_option("--mean-params", pd_mean, "mean emulator parameters")->required();
  plot->add_option("--kind", pd_kind, "rho-curves | rho-map");
  plot->add_option("--scenario", pd_scenario, "scenario label")->required();
  plot->add_option("--years", pd_years, "evaluation years");
  plot->add_option("--out", pd_out, "output CSV");

  // coherence
  std::string ch_input, ch_out = "coherence.csv";
  std::size_t ch_a = 1, ch_b = 2;
  int ch_half = 50;
  auto* coh = app.add_subcommand("coherence", "block-local coherence between two locations");
  coh->add_option("--input", ch_input, "gridded daily series (.f64grid)")->required();
  coh->add_option("--loc-a", ch_a, "first location index (1-based)");
  coh->add_option("--loc-b", ch_b, "second location index (1-based)");
  coh->add_option("--half-width", ch_half, "smoothing half-width, bins");
  coh->add_option("--out", ch_out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const int threads = env_threads_override(global.threads);
    if (synth->parsed()) return cmd_synth(synth_spec, synth_out, synth_seed, seed_opt->count() > 0);
    if (fit_seasonal->parsed()) {
      return cmd_fit_seasonal(fs_input, fs_harmonics, fs_half_window, fs_out);
    }
    if (fit_mean->parsed()) return cmd_fit_mean(fm_manifest, fm_out, fm_harmonics, fm_regions);
    if (fit_sp->parsed()) {
      return cmd_fit_spectra(sp_manifest, sp_mean, sp_block_years, sp_out, threads, sp_exclude,
                             sp_fix_delta1);
    }
    if (sim->parsed()) {
      return cmd_simulate(sim_obs, sim_seasonal, sim_spectra, sim_mean, sim_source, sim_target,
                          sim_obs_years, sim_target_years, sim_out, sim_taylor, threads,
                          sim_no_trend);
    }
    if (diag->parsed()) {
      return cmd_diagnose(dg_manifest, dg_mean, dg_block_years, dg_deviance, dg_holdout, dg_out,
                          threads);
    }
    if (plot->parsed()) {
      return cmd_plot_data(pd_spectra, pd_mean, pd_kind, pd_scenario, pd_years, pd_out);
    }
    if (coh->parsed()) return cmd_coherence(ch_input, ch_a, ch_b, ch_half, ch_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
