#pragma once

#include <Eigen/Dense>

#include <complex>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "evospec/grid.hpp"
#include "evospec/rng.hpp"

namespace evospec {

/// Exact N x N evolutionary transfer matrix with entries
/// sqrt(2 pi / N) A(t, 2 pi (j-1)/N) e^{2 pi i (j-1) t / N}, t,j = 1..N.
/// Guarded at N <= 4096.
Eigen::MatrixXcd dense_cn(const std::function<double(std::size_t t_1based, double omega)>& a,
                          std::size_t n);

/// Hermitian-symmetric complex standard Gaussian coefficients: unit
/// variance at every index, real at DC and (even N) Nyquist, conjugate
/// mirrored elsewhere.
std::vector<std::complex<double>> hermitian_noise(std::size_t n, CounterRng& rng);

/// Exact draw z = C_N(sqrt(a)) eps, real with covariance exactly
/// C_N C_N^H. Direct O(N^2) evaluation; guarded at N <= 4096.
std::vector<double> sample_evolutionary_gp(
    const std::function<double(std::size_t t_1based, double omega)>& spectrum, std::size_t n,
    CounterRng& rng);

/// Same with a precomputed sqrt-spectrum table (rows t = 1..N, columns
/// omega_j); avoids re-evaluating the surface for repeated draws.
std::vector<double> sample_evolutionary_gp(const Eigen::MatrixXd& sqrt_spectrum, CounterRng& rng);

/// Stationary circulant draw of length n from spectrum values on the
/// n-point grid (O(n log n); used for long baseline runs and blockwise
/// transient fixtures).
std::vector<double> sample_stationary(std::span<const double> spectrum, CounterRng& rng);

/// sigma^2 / (2 pi |1 - coef e^{-i omega}|^2).
double analytic_ar1_spectrum(double coef, double innovation_variance, double omega);
std::vector<double> analytic_ar1_spectrum_grid(double coef, double innovation_variance,
                                               std::size_t n);

/// Synthetic-truth specification for fixture generation: forcing
/// trajectories, mean-response truth, seasonal truth, baseline spectrum
/// and the frequency sensitivities of the covariance changes.
struct SyntheticSpec {
  std::uint64_t seed = 1;
  std::size_t n_lat = 2;
  std::size_t n_lon = 2;
  std::size_t block_days = 3650;

  struct Scenario {
    std::string label;
    ScenarioKind kind = ScenarioKind::Transient;
    std::int64_t start_year = 1;
    std::int64_t years = 10;
    std::size_t realizations = 1;
    // Annual CO2 ppm values, one per year.
    std::vector<double> co2_annual;
  };
  std::vector<Scenario> scenarios;
  double co2_baseline_ppm = 289.0;

  struct Truth {
    double beta1 = 3.0;  // kelvin per log-ratio unit
    double phi = 0.9;
    std::vector<double> gamma_c;  // forcing-modulated seasonal change, cos
    std::vector<double> zeta_c;
    double mean_level = 285.0;      // kelvin
    double seasonal_amp = 10.0;     // m(d) = level + amp cos(2 pi d/365)
    double dvar_amp = 0.0;          // D^2 modulation before normalization
    double ar1_coef = 0.5;          // baseline spectrum shape
    double ar1_variance = 1.0;
    double delta0_const = 0.0;      // delta_i(omega) = const + cos_coef cos(omega)
    double delta0_cos = 0.0;
    double delta1_const = 0.0;
    double delta1_cos = 0.0;
    std::vector<double> lambda;     // per location; empty = all ones
  };
  Truth truth;

  double delta0(double omega) const {
    return truth.delta0_const + truth.delta0_cos * std::cos(omega);
  }
  double delta1(double omega) const {
    return truth.delta1_const + truth.delta1_cos * std::cos(omega);
  }
  double baseline_spectrum(double omega) const {
    return analytic_ar1_spectrum(truth.ar1_coef, truth.ar1_variance, omega);
  }

  static SyntheticSpec from_json_file(const std::filesystem::path& path);
};

/// Generates the full synthetic ensemble in memory. Transient runs are
/// sampled block-by-block at the block-midpoint spectra (blocks
/// independent), the baseline as one stationary draw.
ScenarioEnsemble generate_ensemble(const SyntheticSpec& spec);

/// Writes the ensemble of `spec` as grid files plus manifest, CO2 CSVs
/// and a region CSV under out_dir; returns the manifest path.
std::filesystem::path write_fixture(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

}  // namespace evospec
