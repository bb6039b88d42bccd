#include "evospec/synthetic.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "evospec/fft.hpp"
#include "evospec/gridio.hpp"
#include "evospec/mean_emulator.hpp"

namespace evospec {

using nlohmann::json;

Eigen::MatrixXcd dense_cn(const std::function<double(std::size_t, double)>& a, std::size_t n) {
  if (n > 4096) throw ConfigError("dense_cn: N > 4096 guard");
  Eigen::MatrixXcd c(n, n);
  const double scale = std::sqrt(kTwoPi / static_cast<double>(n));
  for (std::size_t t = 1; t <= n; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      const double omega = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
      const double phase = omega * static_cast<double>(t);
      c(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(j)) =
          scale * a(t, omega) * std::complex<double>(std::cos(phase), std::sin(phase));
    }
  }
  return c;
}

std::vector<std::complex<double>> hermitian_noise(std::size_t n, CounterRng& rng) {
  std::vector<std::complex<double>> eps(n);
  eps[0] = rng.normal();
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t j = 1; 2 * j < n; ++j) {
    const double re = rng.normal() * inv_sqrt2;
    const double im = rng.normal() * inv_sqrt2;
    eps[j] = {re, im};
    eps[n - j] = {re, -im};
  }
  if (n % 2 == 0 && n >= 2) eps[n / 2] = rng.normal();
  return eps;
}

namespace {

std::vector<double> sample_from_sqrt_matrix(const Eigen::MatrixXd& sqrt_a, CounterRng& rng) {
  const auto n = static_cast<std::size_t>(sqrt_a.rows());
  const auto eps = hermitian_noise(n, rng);
  // Incremental phases: u_j = e^{i omega_j}, v_j = u_j^t.
  std::vector<std::complex<double>> unit(n), v(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double omega = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
    unit[j] = {std::cos(omega), std::sin(omega)};
    v[j] = 1.0;
  }
  const double scale = std::sqrt(kTwoPi / static_cast<double>(n));
  std::vector<double> z(n);
  for (std::size_t t = 1; t <= n; ++t) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      v[j] *= unit[j];
      const std::complex<double> term = eps[j] * v[j];
      acc += sqrt_a(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(j)) * term.real();
    }
    z[t - 1] = scale * acc;
  }
  return z;
}

}  // namespace

std::vector<double> sample_evolutionary_gp(
    const std::function<double(std::size_t, double)>& spectrum, std::size_t n, CounterRng& rng) {
  if (n > 4096) throw ConfigError("sample_evolutionary_gp: N > 4096 guard");
  Eigen::MatrixXd sqrt_a(n, n);
  for (std::size_t t = 1; t <= n; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      const double omega = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
      const double a = spectrum(t, omega);
      if (!(a > 0.0)) throw ConfigError("sample_evolutionary_gp: spectrum must be positive");
      sqrt_a(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(j)) = std::sqrt(a);
    }
  }
  return sample_from_sqrt_matrix(sqrt_a, rng);
}

std::vector<double> sample_evolutionary_gp(const Eigen::MatrixXd& sqrt_spectrum, CounterRng& rng) {
  if (sqrt_spectrum.rows() != sqrt_spectrum.cols()) {
    throw ConfigError("sample_evolutionary_gp: table must be square");
  }
  if (sqrt_spectrum.rows() > 4096) throw ConfigError("sample_evolutionary_gp: N > 4096 guard");
  return sample_from_sqrt_matrix(sqrt_spectrum, rng);
}

std::vector<double> sample_stationary(std::span<const double> spectrum, CounterRng& rng) {
  const std::size_t n = spectrum.size();
  auto eps = hermitian_noise(n, rng);
  for (std::size_t j = 0; j < n; ++j) {
    if (!(spectrum[j] > 0.0)) throw ConfigError("sample_stationary: spectrum must be positive");
    eps[j] *= std::sqrt(spectrum[j]);
  }
  Fft fft(n);
  const auto y = fft.inverse(eps);
  const double scale = std::sqrt(kTwoPi / static_cast<double>(n));
  std::vector<double> z(n);
  for (std::size_t r = 0; r < n; ++r) z[r] = scale * y[(r + 1) % n].real();
  return z;
}

double analytic_ar1_spectrum(double coef, double innovation_variance, double omega) {
  if (std::abs(coef) >= 1.0) throw ConfigError("analytic_ar1_spectrum: |coef| must be < 1");
  const double re = 1.0 - coef * std::cos(omega);
  const double im = coef * std::sin(omega);
  return innovation_variance / (kTwoPi * (re * re + im * im));
}

std::vector<double> analytic_ar1_spectrum_grid(double coef, double innovation_variance,
                                               std::size_t n) {
  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) {
    s[j] = analytic_ar1_spectrum(coef, innovation_variance,
                                 kTwoPi * static_cast<double>(j) / static_cast<double>(n));
  }
  return s;
}

SyntheticSpec SyntheticSpec::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open: " + path.string());
  json j = json::parse(in);
  SyntheticSpec spec;
  spec.seed = j.value("seed", std::uint64_t{1});
  spec.n_lat = j.value("n_lat", std::size_t{2});
  spec.n_lon = j.value("n_lon", std::size_t{2});
  spec.block_days = j.value("block_days", std::size_t{3650});
  spec.co2_baseline_ppm = j.value("co2_baseline_ppm", 289.0);
  for (const auto& js : j.at("scenarios")) {
    SyntheticSpec::Scenario s;
    s.label = js.at("label").get<std::string>();
    s.kind = scenario_kind_from_string(js.at("kind").get<std::string>());
    s.start_year = js.value("start_year", std::int64_t{1});
    s.years = js.at("years").get<std::int64_t>();
    s.realizations = js.at("realizations").get<std::size_t>();
    if (js.contains("co2_annual")) {
      s.co2_annual = js.at("co2_annual").get<std::vector<double>>();
    } else if (js.contains("co2_ramp_per_year")) {
      const double ramp = js.at("co2_ramp_per_year").get<double>();
      for (std::int64_t y = 0; y < s.years; ++y) {
        s.co2_annual.push_back(spec.co2_baseline_ppm * std::exp(ramp * static_cast<double>(y)));
      }
    } else {
      s.co2_annual.assign(static_cast<std::size_t>(s.years), spec.co2_baseline_ppm);
    }
    spec.scenarios.push_back(std::move(s));
  }
  if (j.contains("truth")) {
    const auto& jt = j.at("truth");
    auto& t = spec.truth;
    t.beta1 = jt.value("beta1", t.beta1);
    t.phi = jt.value("phi", t.phi);
    t.gamma_c = jt.value("gamma_c", t.gamma_c);
    t.zeta_c = jt.value("zeta_c", t.zeta_c);
    t.mean_level = jt.value("mean_level", t.mean_level);
    t.seasonal_amp = jt.value("seasonal_amp", t.seasonal_amp);
    t.dvar_amp = jt.value("dvar_amp", t.dvar_amp);
    t.ar1_coef = jt.value("ar1_coef", t.ar1_coef);
    t.ar1_variance = jt.value("ar1_variance", t.ar1_variance);
    t.delta0_const = jt.value("delta0_const", t.delta0_const);
    t.delta0_cos = jt.value("delta0_cos", t.delta0_cos);
    t.delta1_const = jt.value("delta1_const", t.delta1_const);
    t.delta1_cos = jt.value("delta1_cos", t.delta1_cos);
    t.lambda = jt.value("lambda", t.lambda);
  }
  return spec;
}

namespace {

ForcingTrajectory make_trajectory(const SyntheticSpec& spec, const SyntheticSpec::Scenario& s) {
  std::vector<std::pair<std::int64_t, double>> annual;
  for (std::size_t y = 0; y < s.co2_annual.size(); ++y) {
    annual.emplace_back(s.start_year + static_cast<std::int64_t>(y), s.co2_annual[y]);
  }
  return ForcingTrajectory(s.label, s.start_year, std::move(annual), spec.co2_baseline_ppm);
}

std::vector<double> seasonal_mean_cycle(const SyntheticSpec& spec) {
  std::vector<double> m(365);
  for (int d = 1; d <= 365; ++d) {
    m[static_cast<std::size_t>(d - 1)] =
        spec.truth.mean_level + spec.truth.seasonal_amp * std::cos(kTwoPi * d / 365.0);
  }
  return m;
}

std::vector<double> seasonal_scale_cycle(const SyntheticSpec& spec) {
  if (!(std::abs(spec.truth.dvar_amp) < 1.0)) {
    throw ConfigError("synthetic: |dvar_amp| must be < 1");
  }
  std::vector<double> d(365);
  for (int day = 1; day <= 365; ++day) {
    d[static_cast<std::size_t>(day - 1)] =
        std::sqrt(1.0 + spec.truth.dvar_amp * std::cos(kTwoPi * day / 365.0));
  }
  return d;
}

double truth_lambda(const SyntheticSpec& spec, std::size_t l) {
  return spec.truth.lambda.empty() ? 1.0 : spec.truth.lambda[l];
}

// Forced mean component at day t (1-based), pattern-scaled to location l.
double truth_mu(const SyntheticSpec& spec, std::size_t l, double c_t, std::int64_t t) {
  double seasonal = spec.truth.beta1;
  for (std::size_t k = 1; k <= spec.truth.gamma_c.size(); ++k) {
    const double arg = kTwoPi * static_cast<double>(k) * static_cast<double>(t) / 365.0;
    seasonal += spec.truth.gamma_c[k - 1] * std::cos(arg);
  }
  for (std::size_t k = 1; k <= spec.truth.zeta_c.size(); ++k) {
    const double arg = kTwoPi * static_cast<double>(k) * static_cast<double>(t) / 365.0;
    seasonal += spec.truth.zeta_c[k - 1] * std::sin(arg);
  }
  return truth_lambda(spec, l) * c_t * seasonal;
}

}  // namespace

ScenarioEnsemble generate_ensemble(const SyntheticSpec& spec) {
  ScenarioEnsemble ens;
  ens.grid = GridSpec::regular(spec.n_lat, spec.n_lon);
  const std::size_t n_loc = ens.grid.n_loc();
  ens.regions = RegionPartition::single_region(n_loc);

  const auto m_cycle = seasonal_mean_cycle(spec);
  const auto d_cycle = seasonal_scale_cycle(spec);
  const std::size_t block = spec.block_days;

  RegionMeanParams truth_params;
  truth_params.beta1 = spec.truth.beta1;
  truth_params.phi = spec.truth.phi;

  for (std::size_t si = 0; si < spec.scenarios.size(); ++si) {
    const auto& sc = spec.scenarios[si];
    ScenarioData data;
    data.id = {sc.label, sc.kind};
    data.start_year = sc.start_year;
    data.forcing = make_trajectory(spec, sc);
    const std::size_t n_time = static_cast<std::size_t>(sc.years) * 365;

    if (sc.kind == ScenarioKind::BaselineEquilibrated) {
      const auto spectrum = analytic_ar1_spectrum_grid(spec.truth.ar1_coef, spec.truth.ar1_variance,
                                                       n_time);
      for (std::size_t r = 0; r < sc.realizations; ++r) {
        GridSeries run(n_time, n_loc);
        for (std::size_t l = 0; l < n_loc; ++l) {
          CounterRng rng(spec.seed, (si * 1000 + r) * 100000 + l);
          const auto x = sample_stationary(spectrum, rng);
          for (std::size_t t = 0; t < n_time; ++t) {
            const std::size_t di = t % 365;
            run.at(t, l) = m_cycle[di] + d_cycle[di] * x[t];
          }
        }
        data.runs.push_back(std::move(run));
      }
    } else {
      const auto c = forcing_response(data.forcing, spec.truth.phi);
      const auto warming = warming_path(truth_params, data.forcing);
      // Block spectra at block midpoints on the block frequency grid.
      const std::size_t n_blocks = n_time / block;
      const std::size_t tail = n_time - n_blocks * block;
      std::vector<std::vector<double>> block_spec(n_blocks);
      for (std::size_t b = 0; b < n_blocks; ++b) {
        const std::size_t mid = b * block + block / 2;  // 1-based day index
        block_spec[b].resize(block);
        for (std::size_t j = 0; j < block; ++j) {
          const double omega = kTwoPi * static_cast<double>(j) / static_cast<double>(block);
          block_spec[b][j] =
              spec.baseline_spectrum(omega) *
              std::exp(warming.delta[mid - 1] * spec.delta0(omega) +
                       warming.rate[mid - 1] * spec.delta1(omega));
        }
      }
      std::vector<double> tail_spec(tail);
      if (tail > 0) {
        const std::size_t mid = n_blocks * block + tail / 2;
        for (std::size_t j = 0; j < tail; ++j) {
          const double omega = kTwoPi * static_cast<double>(j) / static_cast<double>(tail);
          tail_spec[j] = spec.baseline_spectrum(omega) *
                         std::exp(warming.delta[mid - 1] * spec.delta0(omega) +
                                  warming.rate[mid - 1] * spec.delta1(omega));
        }
      }
      for (std::size_t r = 0; r < sc.realizations; ++r) {
        GridSeries run(n_time, n_loc);
        for (std::size_t l = 0; l < n_loc; ++l) {
          CounterRng rng(spec.seed, (si * 1000 + r) * 100000 + l);
          std::vector<double> x(n_time);
          for (std::size_t b = 0; b < n_blocks; ++b) {
            const auto xb = sample_stationary(block_spec[b], rng);
            std::copy(xb.begin(), xb.end(), x.begin() + static_cast<std::ptrdiff_t>(b * block));
          }
          if (tail > 0) {
            const auto xt = sample_stationary(tail_spec, rng);
            std::copy(xt.begin(), xt.end(), x.begin() + static_cast<std::ptrdiff_t>(n_blocks * block));
          }
          for (std::size_t t = 0; t < n_time; ++t) {
            const std::size_t di = t % 365;
            const double mu = truth_mu(spec, l, c[t], static_cast<std::int64_t>(t + 1));
            run.at(t, l) = m_cycle[di] + mu + d_cycle[di] * x[t];
          }
        }
        data.runs.push_back(std::move(run));
      }
    }
    ens.scenarios.push_back(std::move(data));
  }
  ens.validate();
  return ens;
}

std::filesystem::path write_fixture(const SyntheticSpec& spec, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto ens = generate_ensemble(spec);

  json manifest;
  manifest["grid"] = {{"n_lat", spec.n_lat}, {"n_lon", spec.n_lon}};
  manifest["co2_baseline_ppm"] = spec.co2_baseline_ppm;
  manifest["regions_csv"] = "regions.csv";
  std::vector<int> region_of;
  for (std::size_t l = 0; l < ens.grid.n_loc(); ++l) region_of.push_back(ens.regions.region_of(l));
  write_region_csv(out_dir / "regions.csv", region_of);

  json scenarios = json::array();
  for (std::size_t si = 0; si < ens.scenarios.size(); ++si) {
    const auto& s = ens.scenarios[si];
    const auto& sc = spec.scenarios[si];
    json js;
    js["label"] = s.id.label;
    js["kind"] = to_string(s.id.kind);
    js["start_year"] = s.start_year;
    const std::string co2_name = "co2_" + s.id.label + ".csv";
    std::vector<std::pair<std::int64_t, double>> annual;
    for (std::size_t y = 0; y < sc.co2_annual.size(); ++y) {
      annual.emplace_back(sc.start_year + static_cast<std::int64_t>(y), sc.co2_annual[y]);
    }
    write_co2_csv(out_dir / co2_name, annual);
    js["co2_csv"] = co2_name;
    json runs = json::array();
    for (std::size_t r = 0; r < s.runs.size(); ++r) {
      const std::string name = s.id.label + "_r" + std::to_string(r) + ".f64grid";
      GridHeader header;
      header.n_time = s.runs[r].n_time;
      header.n_loc = s.runs[r].n_loc;
      header.n_lat = spec.n_lat;
      header.n_lon = spec.n_lon;
      header.scenario = s.id.label;
      header.kind = to_string(s.id.kind);
      header.start_year = s.start_year;
      write_grid_series(out_dir / name, s.runs[r], header);
      runs.push_back(name);
    }
    js["runs"] = runs;
    scenarios.push_back(js);
  }
  manifest["scenarios"] = scenarios;
  const auto manifest_path = out_dir / "manifest.json";
  std::ofstream out(manifest_path);
  if (!out) throw ConfigError("cannot open for write: " + manifest_path.string());
  out << manifest.dump(2) << "\n";
  return manifest_path;
}

}  // namespace evospec
