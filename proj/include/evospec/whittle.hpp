#pragma once

#include <span>
#include <string>
#include <vector>

namespace evospec {

/// Regional warming covariates at a block midpoint.
struct BlockCovariates {
  double delta = 0.0;  // mean change vs baseline, kelvin
  double rate = 0.0;   // its smoothed time derivative, kelvin/day
};

/// Periodogram evidence for one transient scenario at one location.
struct WhittleScenarioData {
  std::string label;
  double n_realizations = 0.0;               // R_s
  std::vector<BlockCovariates> blocks;       // per block
  std::vector<std::vector<double>> avg_periodogram;  // [block][freq], length M each
};

/// Everything entering the approximate likelihood at one location.
struct WhittleData {
  std::vector<WhittleScenarioData> scenarios;
  std::vector<double> baseline;  // aggregated baseline periodogram, length M
  std::size_t m_grid = 0;        // M: block length in days == frequency count
  // Fine ordinates averaged into each aggregated baseline value,
  // N_B / M: the information weight of the baseline term.
  double baseline_weight = 0.0;

  void check() const;
};

/// Blockwise Whittle log-likelihood of the covariance-change model:
/// transient terms carry the (R_s - 1) contrast degrees of freedom and the
/// baseline term carries the weight of the ordinates aggregated into each
/// coarse bin. All M frequencies are summed.
double whittle_loglik(const WhittleData& data, std::span<const double> a_base,
                      std::span<const double> delta0, std::span<const double> delta1);

/// Log-likelihood with each (scenario, block, frequency) spectrum free.
double saturated_loglik(const WhittleData& data);

double deviance(const WhittleData& data, std::span<const double> a_base,
                std::span<const double> delta0, std::span<const double> delta1);

/// Transient-scenario terms of the likelihood evaluated for held-out data
/// at fixed model functions (no baseline term).
double predictive_loglik(const WhittleScenarioData& heldout, std::size_t m_grid,
                         std::span<const double> a_base, std::span<const double> delta0,
                         std::span<const double> delta1);

struct WhittleOptions {
  bool fix_delta1_zero = false;
  int max_iterations = 100;
  double gradient_tol = 1e-8;
};

/// Per-frequency maximizer of the approximate likelihood.
struct RoughFit {
  std::vector<double> log_a;   // log baseline spectrum, full grid
  std::vector<double> delta0;  // full grid, even
  std::vector<double> delta1;
  double max_gradient_norm = 0.0;
  int max_newton_iterations = 0;
};

/// Independent 3-parameter Newton maximizations per interior frequency.
/// DC and Nyquist bins are filled by nearest-neighbor extension and the
/// upper half grid by even symmetry.
RoughFit maximize_whittle(const WhittleData& data, const WhittleOptions& opts = {});

/// Objective pieces for one frequency: value, gradient and Hessian of the
/// negative per-frequency log-likelihood contribution in the coordinates
/// theta = (log a, delta0, delta1). Exposed for gradient verification.
void whittle_freq_objective(const WhittleData& data, std::size_t j, const double theta[3],
                            double* value, double grad[3], double hess[9]);

/// First-order (Cox-Snell) bias of the per-frequency maximizer in
/// (log a, delta0, delta1). Depends only on the design (covariates and
/// degrees of freedom), so it is one constant vector for all frequencies:
/// -1/2 I^{-1} sum_i v_i h_i with leverages h_i = w_i v_i' I^{-1} v_i.
struct RoughFitBias {
  double log_a = 0.0;
  double delta0 = 0.0;
  double delta1 = 0.0;
};
RoughFitBias whittle_rough_bias(const WhittleData& data, bool fix_delta1_zero = false);

}  // namespace evospec
