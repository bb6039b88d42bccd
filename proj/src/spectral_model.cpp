#include "evospec/spectral_model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "evospec/common.hpp"

namespace evospec {

using nlohmann::json;

void fisher_information(const WhittleData& data, double a_base_j, double out[9]) {
  if (!(a_base_j > 0.0)) throw NumericError("fisher_information: nonpositive baseline spectrum");
  double s_dd = 0.0, s_dr = 0.0, s_rr = 0.0, s_d = 0.0, s_r = 0.0, s_n = 0.0;
  for (const auto& s : data.scenarios) {
    const double w = s.n_realizations - 1.0;
    for (const auto& blk : s.blocks) {
      s_dd += w * blk.delta * blk.delta;
      s_dr += w * blk.delta * blk.rate;
      s_rr += w * blk.rate * blk.rate;
      s_d += w * blk.delta;
      s_r += w * blk.rate;
      s_n += w;
    }
  }
  const double inv_a = 1.0 / a_base_j;
  out[0] = s_dd;
  out[1] = s_dr;
  out[2] = s_d * inv_a;
  out[3] = s_dr;
  out[4] = s_rr;
  out[5] = s_r * inv_a;
  out[6] = s_d * inv_a;
  out[7] = s_r * inv_a;
  out[8] = (s_n + data.baseline_weight) * inv_a * inv_a;
}

DeltaCovariance rough_delta_covariance(const WhittleData& data) {
  // The delta block of the inverse information; the baseline-spectrum
  // entries cancel, so the result is frequency-constant.
  double info[9];
  fisher_information(data, 1.0, info);
  const double a11 = info[0], a12 = info[1], a22 = info[4];
  const double b1 = info[2], b2 = info[5], c = info[8];
  if (!(c > 0.0)) throw NumericError("rough_delta_covariance: singular information");
  // Schur complement of the a^B entry.
  const double m11 = a11 - b1 * b1 / c;
  const double m12 = a12 - b1 * b2 / c;
  const double m22 = a22 - b2 * b2 / c;
  const double det = m11 * m22 - m12 * m12;
  if (!(det > 0.0)) throw NumericError("rough_delta_covariance: singular information");
  DeltaCovariance v;
  v.v00 = m22 / det;
  v.v01 = -m12 / det;
  v.v11 = m11 / det;
  return v;
}

LocationSpectralModel smooth_and_attach_errors(const RoughFit& rough, const WhittleData& data,
                                               std::size_t m_grid, const BandwidthParams& bw0,
                                               const BandwidthParams& bw1) {
  LocationSpectralModel model;
  model.delta0_rough = rough.delta0;
  model.delta1_rough = rough.delta1;
  model.log_a_rough = rough.log_a;
  model.bw0 = bw0;
  model.bw1 = bw1;
  model.delta0_hat = smooth_delta(rough.delta0, m_grid, bw0);
  model.delta1_hat = smooth_delta(rough.delta1, m_grid, bw1);
  model.rough_cov = rough_delta_covariance(data);

  const std::size_t n_unique = m_grid / 2 + 1;
  model.v00_hat.resize(n_unique);
  model.v01_hat.resize(n_unique);
  model.v11_hat.resize(n_unique);
  for (std::size_t j = 0; j < n_unique; ++j) {
    const double b0 = bandwidth_at(j, m_grid, bw0);
    const double b1 = bandwidth_at(j, m_grid, bw1);
    model.v00_hat[j] = model.rough_cov.v00 * weight_sums(j, m_grid, b0).sum_sq;
    model.v11_hat[j] = model.rough_cov.v11 * weight_sums(j, m_grid, b1).sum_sq;
    model.v01_hat[j] = model.rough_cov.v01 * weight_cross_sum(j, m_grid, b0, b1);
  }
  return model;
}

double interp_even_grid(std::span<const double> values_full, double omega) {
  const std::size_t m = values_full.size();
  double pos = omega / kTwoPi * static_cast<double>(m);
  pos = std::fmod(pos, static_cast<double>(m));
  if (pos < 0.0) pos += static_cast<double>(m);
  const auto j0 = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(j0);
  const std::size_t j1 = (j0 + 1) % m;
  return (1.0 - frac) * values_full[j0] + frac * values_full[j1];
}

namespace {

// Interpolates a unique-grid (length M/2+1) array at omega using even
// periodic symmetry.
double interp_unique_grid(std::span<const double> values_unique, std::size_t m_grid, double omega) {
  double pos = omega / kTwoPi * static_cast<double>(m_grid);
  pos = std::fmod(pos, static_cast<double>(m_grid));
  if (pos < 0.0) pos += static_cast<double>(m_grid);
  const auto fold = [&](std::size_t idx) {
    idx %= m_grid;
    return idx <= m_grid / 2 ? idx : m_grid - idx;
  };
  const auto j0 = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(j0);
  return (1.0 - frac) * values_unique[fold(j0)] + frac * values_unique[fold(j0 + 1)];
}

}  // namespace

LogRhoPrediction predict_log_rho(const LocationSpectralModel& model, std::size_t m_grid,
                                 double delta, double rate, double omega) {
  LogRhoPrediction out;
  const double d0 = interp_even_grid(model.delta0_hat, omega);
  const double d1 = interp_even_grid(model.delta1_hat, omega);
  out.log_rho = delta * d0 + rate * d1;
  const double v00 = interp_unique_grid(model.v00_hat, m_grid, omega);
  const double v01 = interp_unique_grid(model.v01_hat, m_grid, omega);
  const double v11 = interp_unique_grid(model.v11_hat, m_grid, omega);
  const double var = delta * delta * v00 + rate * rate * v11 + 2.0 * delta * rate * v01;
  out.se = std::sqrt(std::max(0.0, var));
  return out;
}

namespace {

void append_doubles(std::ofstream& out, std::span<const double> v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::ifstream& in, std::size_t n) {
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw ConfigError("spectral model: truncated payload");
  return v;
}

}  // namespace

void save_spectral_model(const std::filesystem::path& path, const SpectralChangeModel& model) {
  json header;
  header["format"] = "evospec-spectra-v1";
  header["m_grid"] = model.m_grid;
  header["n_lat"] = model.n_lat;
  header["n_lon"] = model.n_lon;
  header["n_loc"] = model.locations.size();
  json bw = json::array();
  for (const auto& loc : model.locations) {
    bw.push_back({{"m0_0", loc.bw0.m0},
                  {"m1_0", loc.bw0.m1},
                  {"p_0", loc.bw0.p},
                  {"m0_1", loc.bw1.m0},
                  {"m1_1", loc.bw1.m1},
                  {"p_1", loc.bw1.p},
                  {"v00", loc.rough_cov.v00},
                  {"v01", loc.rough_cov.v01},
                  {"v11", loc.rough_cov.v11}});
  }
  header["locations"] = bw;
  const std::string head = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for write: " + path.string());
  out << head << '\0';
  for (const auto& loc : model.locations) {
    append_doubles(out, loc.delta0_hat);
    append_doubles(out, loc.delta1_hat);
    append_doubles(out, loc.delta0_rough);
    append_doubles(out, loc.delta1_rough);
    append_doubles(out, loc.log_a_rough);
    append_doubles(out, loc.v00_hat);
    append_doubles(out, loc.v01_hat);
    append_doubles(out, loc.v11_hat);
  }
  if (!out) throw ConfigError("write failed: " + path.string());
}

SpectralChangeModel load_spectral_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path.string());
  std::string head;
  std::getline(in, head, '\0');
  json header = json::parse(head);
  if (header.at("format").get<std::string>() != "evospec-spectra-v1") {
    throw ConfigError("unexpected spectral model format in " + path.string());
  }
  SpectralChangeModel model;
  model.m_grid = header.at("m_grid").get<std::size_t>();
  model.n_lat = header.at("n_lat").get<std::size_t>();
  model.n_lon = header.at("n_lon").get<std::size_t>();
  const auto n_loc = header.at("n_loc").get<std::size_t>();
  const std::size_t m = model.m_grid;
  const std::size_t n_unique = m / 2 + 1;
  const auto& bw = header.at("locations");
  model.locations.resize(n_loc);
  for (std::size_t l = 0; l < n_loc; ++l) {
    auto& loc = model.locations[l];
    const auto& jl = bw.at(l);
    loc.bw0 = BandwidthParams{jl.at("m0_0").get<double>(), jl.at("m1_0").get<double>(),
                              jl.at("p_0").get<double>()};
    loc.bw1 = BandwidthParams{jl.at("m0_1").get<double>(), jl.at("m1_1").get<double>(),
                              jl.at("p_1").get<double>()};
    loc.rough_cov.v00 = jl.at("v00").get<double>();
    loc.rough_cov.v01 = jl.at("v01").get<double>();
    loc.rough_cov.v11 = jl.at("v11").get<double>();
    loc.delta0_hat = read_doubles(in, m);
    loc.delta1_hat = read_doubles(in, m);
    loc.delta0_rough = read_doubles(in, m);
    loc.delta1_rough = read_doubles(in, m);
    loc.log_a_rough = read_doubles(in, m);
    loc.v00_hat = read_doubles(in, n_unique);
    loc.v01_hat = read_doubles(in, n_unique);
    loc.v11_hat = read_doubles(in, n_unique);
  }
  return model;
}

}  // namespace evospec
