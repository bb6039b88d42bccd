#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "evospec/smoothing.hpp"
#include "evospec/whittle.hpp"

namespace evospec {

/// Frequency-constant covariance of the rough (delta0*, delta1*)
/// estimates, from the inverse Fisher information after profiling out the
/// baseline spectrum.
struct DeltaCovariance {
  double v00 = 0.0;
  double v01 = 0.0;
  double v11 = 0.0;
};

/// 3x3 Fisher information block for (delta0, delta1, a^B) at one
/// frequency, given the baseline spectrum value. Row-major, symmetric.
void fisher_information(const WhittleData& data, double a_base_j, double out[9]);

DeltaCovariance rough_delta_covariance(const WhittleData& data);

struct LocationSpectralModel {
  std::vector<double> delta0_hat;   // smoothed, full M grid, even
  std::vector<double> delta1_hat;
  std::vector<double> delta0_rough;
  std::vector<double> delta1_rough;
  std::vector<double> log_a_rough;  // log baseline spectrum, full grid
  std::vector<double> v00_hat;      // smoothed-estimate covariance, unique grid M/2+1
  std::vector<double> v01_hat;
  std::vector<double> v11_hat;
  DeltaCovariance rough_cov;
  BandwidthParams bw0;
  BandwidthParams bw1;
};

struct SpectralChangeModel {
  std::size_t m_grid = 0;  // block length in days == frequency grid size
  std::size_t n_lat = 0;
  std::size_t n_lon = 0;
  std::vector<LocationSpectralModel> locations;
};

/// Smooths a rough fit and propagates the covariance through the folded
/// kernel weights (reflection-aware near 0 and pi).
LocationSpectralModel smooth_and_attach_errors(const RoughFit& rough, const WhittleData& data,
                                               std::size_t m_grid, const BandwidthParams& bw0,
                                               const BandwidthParams& bw1);

struct LogRhoPrediction {
  double log_rho = 0.0;
  double se = 0.0;
};

/// log rho-hat(t, omega) = delta * delta0_hat(omega) + rate * delta1_hat(omega)
/// with its standard error. omega in [0, 2 pi); values between grid
/// frequencies are linearly interpolated.
LogRhoPrediction predict_log_rho(const LocationSpectralModel& model, std::size_t m_grid,
                                 double delta, double rate, double omega);

/// Piecewise-linear evaluation of an even-periodic grid function.
double interp_even_grid(std::span<const double> values_full, double omega);

void save_spectral_model(const std::filesystem::path& path, const SpectralChangeModel& model);
SpectralChangeModel load_spectral_model(const std::filesystem::path& path);

}  // namespace evospec
