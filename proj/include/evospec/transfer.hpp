#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "evospec/spectral_model.hpp"

namespace evospec {

/// Daily warming covariates over the simulation window.
struct WarmingSlice {
  std::vector<double> delta;
  std::vector<double> rate;
};

/// Precomputed objects to apply C_N(sqrt(rho)) for the source (historical
/// over the observation window) and target (scenario over the simulation
/// window) log-ratio surfaces, plus the frequency-diagonal preconditioner
/// for the source inverse.
class TransferPlan {
 public:
  enum class Side { Source, Target };

  /// delta0/delta1 are the sensitivity functions evaluated on the N-point
  /// output frequency grid (even in omega).
  TransferPlan(std::vector<double> delta0, std::vector<double> delta1, WarmingSlice source,
               WarmingSlice target, int taylor_order = 10);

  static TransferPlan from_location_model(const LocationSpectralModel& model, WarmingSlice source,
                                          WarmingSlice target, int taylor_order = 10);

  std::size_t size() const { return n_; }
  int taylor_order() const { return taylor_order_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Taylor-order accuracy guard: relative difference between the P and
  /// P-2 partial sums; exceeding it raises NumericError. At 1e-6 the
  /// guard trips before the true truncation error of the exponential
  /// series reaches ~1e-8 of the output, and stays quiet for
  /// |log rho| <= 1 at P = 10.
  double guard_tol = 1e-6;
  /// Maximum relative imaginary residue tolerated by apply_transfer.
  double residue_tol = 1e-8;

  /// C_N(sqrt(rho)) x as the weighted sum of P(P+1)/2 inverse DFTs.
  /// No realness assumption on the result.
  std::vector<std::complex<double>> apply_cn(Side side,
                                             std::span<const std::complex<double>> x) const;

  /// Applies the transfer operator to Hermitian-symmetric frequency
  /// coefficients and returns the real output, after checking that the
  /// imaginary residue is below residue_tol of the vector norm.
  std::vector<double> apply_transfer(Side side, std::span<const std::complex<double>> x) const;

  struct SolveInfo {
    int iterations = 0;
    double relative_residual = 0.0;
    std::vector<double> residual_history;
  };

  /// Solves C_N(sqrt(rho_source)) x = y by preconditioned restarted GMRES
  /// (relative residual <= rtol). Returns Hermitian frequency coefficients.
  std::vector<std::complex<double>> solve_transfer(std::span<const double> y, SolveInfo* info = nullptr,
                                                   double rtol = 1e-8, int max_iterations = 200,
                                                   int restart = 50) const;

  /// Inverse of C_N(1) scaled by the preconditioner spectrum; maps a real
  /// vector to Hermitian frequency coefficients.
  std::vector<std::complex<double>> precondition(std::span<const double> y) const;

  double max_abs_half_log_rho() const { return max_half_log_rho_; }

 private:
  const WarmingSlice& side_ref(Side side) const {
    return side == Side::Source ? source_ : target_;
  }

  std::size_t n_ = 0;
  int taylor_order_ = 10;
  std::vector<double> delta0_, delta1_;
  WarmingSlice source_, target_;
  std::vector<double> precond_inv_sqrt_;  // 1/sqrt(time-mean rho_source) per frequency
  double max_half_log_rho_ = 0.0;
  std::vector<std::string> warnings_;
};

}  // namespace evospec
