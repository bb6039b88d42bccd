#include "evospec/transfer.hpp"

#include <algorithm>
#include <cmath>

#include "evospec/common.hpp"
#include "evospec/fft.hpp"

namespace evospec {

namespace {

double l2_norm(std::span<const std::complex<double>> v) {
  double acc = 0.0;
  for (const auto& z : v) acc += std::norm(z);
  return std::sqrt(acc);
}

double l2_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

TransferPlan::TransferPlan(std::vector<double> delta0, std::vector<double> delta1,
                           WarmingSlice source, WarmingSlice target, int taylor_order)
    : n_(delta0.size()),
      taylor_order_(taylor_order),
      delta0_(std::move(delta0)),
      delta1_(std::move(delta1)),
      source_(std::move(source)),
      target_(std::move(target)) {
  if (n_ < 2) throw ConfigError("transfer plan: need N >= 2");
  if (taylor_order_ < 1) throw ConfigError("transfer plan: Taylor order must be >= 1");
  if (delta1_.size() != n_) throw ConfigError("transfer plan: delta grids differ in length");
  for (const auto* side : {&source_, &target_}) {
    if (side->delta.size() != n_ || side->rate.size() != n_) {
      throw ConfigError("transfer plan: warming slice length != N");
    }
  }

  // Preconditioner spectrum: time-mean of rho_source per frequency, and
  // the largest |log rho|/2 across both sides for the accuracy warning.
  precond_inv_sqrt_.resize(n_);
  double max_half = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    if (delta0_[j] == 0.0 && delta1_[j] == 0.0) {
      precond_inv_sqrt_[j] = 1.0;
      continue;
    }
    double acc = 0.0;
    for (std::size_t t = 0; t < n_; ++t) {
      const double half_log = 0.5 * (source_.delta[t] * delta0_[j] + source_.rate[t] * delta1_[j]);
      max_half = std::max(max_half, std::abs(half_log));
      acc += std::exp(2.0 * half_log);
    }
    precond_inv_sqrt_[j] = 1.0 / std::sqrt(acc / static_cast<double>(n_));
  }
  for (std::size_t j = 0; j < n_; ++j) {
    if (delta0_[j] == 0.0 && delta1_[j] == 0.0) continue;
    for (std::size_t t = 0; t < n_; ++t) {
      const double half_log = 0.5 * (target_.delta[t] * delta0_[j] + target_.rate[t] * delta1_[j]);
      max_half = std::max(max_half, std::abs(half_log));
    }
  }
  max_half_log_rho_ = max_half;
  if (max_half > 2.0) {
    warnings_.push_back("transfer plan: max |log rho|/2 = " + std::to_string(max_half) +
                        " exceeds 2; Taylor accuracy degrades");
  }
}

TransferPlan TransferPlan::from_location_model(const LocationSpectralModel& model,
                                               WarmingSlice source, WarmingSlice target,
                                               int taylor_order) {
  const std::size_t n = source.delta.size();
  std::vector<double> d0(n), d1(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double omega = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
    d0[j] = interp_even_grid(model.delta0_hat, omega);
    d1[j] = interp_even_grid(model.delta1_hat, omega);
  }
  return TransferPlan(std::move(d0), std::move(d1), std::move(source), std::move(target),
                      taylor_order);
}

std::vector<std::complex<double>> TransferPlan::apply_cn(
    Side side, std::span<const std::complex<double>> x) const {
  if (x.size() != n_) throw ConfigError("apply_cn: input length != N");
  const auto& warm = side_ref(side);
  const int p_max = taylor_order_;

  // Time-side power tables: delta^a and rate^b per day.
  std::vector<std::vector<double>> dpow(static_cast<std::size_t>(p_max)),
      rpow(static_cast<std::size_t>(p_max));
  dpow[0].assign(n_, 1.0);
  rpow[0].assign(n_, 1.0);
  for (int a = 1; a < p_max; ++a) {
    dpow[static_cast<std::size_t>(a)].resize(n_);
    rpow[static_cast<std::size_t>(a)].resize(n_);
    for (std::size_t t = 0; t < n_; ++t) {
      dpow[static_cast<std::size_t>(a)][t] = dpow[static_cast<std::size_t>(a - 1)][t] * warm.delta[t];
      rpow[static_cast<std::size_t>(a)][t] = rpow[static_cast<std::size_t>(a - 1)][t] * warm.rate[t];
    }
  }
  std::vector<std::vector<double>> f0pow(static_cast<std::size_t>(p_max)),
      f1pow(static_cast<std::size_t>(p_max));
  f0pow[0].assign(n_, 1.0);
  f1pow[0].assign(n_, 1.0);
  for (int a = 1; a < p_max; ++a) {
    f0pow[static_cast<std::size_t>(a)].resize(n_);
    f1pow[static_cast<std::size_t>(a)].resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      f0pow[static_cast<std::size_t>(a)][j] = f0pow[static_cast<std::size_t>(a - 1)][j] * delta0_[j];
      f1pow[static_cast<std::size_t>(a)][j] = f1pow[static_cast<std::size_t>(a - 1)][j] * delta1_[j];
    }
  }

  std::vector<double> factorial(static_cast<std::size_t>(p_max) + 1, 1.0);
  for (int k = 1; k <= p_max; ++k) {
    factorial[static_cast<std::size_t>(k)] = factorial[static_cast<std::size_t>(k - 1)] * k;
  }

  Fft& fft = thread_local_fft(n_);
  std::vector<std::complex<double>> weighted(n_);
  std::vector<std::complex<double>> acc(n_, 0.0);
  std::vector<std::complex<double>> partial_snapshot;
  for (int p = 0; p < p_max; ++p) {
    for (int m = 0; m <= p; ++m) {
      const int a = p - m, b = m;
      const double coeff = 1.0 / (std::pow(2.0, p) * factorial[static_cast<std::size_t>(a)] *
                                  factorial[static_cast<std::size_t>(b)]);
      for (std::size_t j = 0; j < n_; ++j) {
        weighted[j] = f0pow[static_cast<std::size_t>(a)][j] * f1pow[static_cast<std::size_t>(b)][j] * x[j];
      }
      const auto y = fft.inverse(weighted);
      // Row t of C_N uses t = 1..N; array slot r holds t = r+1.
      for (std::size_t r = 0; r < n_; ++r) {
        const double ct = coeff * dpow[static_cast<std::size_t>(a)][r] * rpow[static_cast<std::size_t>(b)][r];
        acc[r] += ct * y[(r + 1) % n_];
      }
    }
    if (p == p_max - 3) partial_snapshot = acc;
  }

  if (p_max >= 3) {
    double diff = 0.0;
    for (std::size_t r = 0; r < n_; ++r) diff += std::norm(acc[r] - partial_snapshot[r]);
    const double denom = l2_norm(acc);
    const double rel = denom > 0.0 ? std::sqrt(diff) / denom : 0.0;
    if (rel > guard_tol) {
      throw NumericError("apply_cn: Taylor truncation guard tripped (P vs P-2 relative difference " +
                         std::to_string(rel) + " > " + std::to_string(guard_tol) +
                         "); rho is too extreme for order " + std::to_string(p_max));
    }
  }

  const double scale = std::sqrt(kTwoPi / static_cast<double>(n_));
  for (auto& z : acc) z *= scale;
  return acc;
}

std::vector<double> TransferPlan::apply_transfer(Side side,
                                                 std::span<const std::complex<double>> x) const {
  const auto z = apply_cn(side, x);
  double imag_sq = 0.0, total_sq = 0.0;
  for (const auto& v : z) {
    imag_sq += v.imag() * v.imag();
    total_sq += std::norm(v);
  }
  const double rel = total_sq > 0.0 ? std::sqrt(imag_sq / total_sq) : 0.0;
  if (rel > residue_tol) {
    throw NumericError("apply_transfer: imaginary residue " + std::to_string(rel) +
                       " exceeds tolerance; input not Hermitian or rho asymmetric");
  }
  std::vector<double> out(n_);
  for (std::size_t r = 0; r < n_; ++r) out[r] = z[r].real();
  return out;
}

std::vector<std::complex<double>> TransferPlan::precondition(std::span<const double> y) const {
  if (y.size() != n_) throw ConfigError("precondition: input length != N");
  // Undo the t = r+1 row labeling, then forward DFT and scale.
  std::vector<double> shifted(n_);
  for (std::size_t t0 = 0; t0 < n_; ++t0) shifted[t0] = y[(t0 + n_ - 1) % n_];
  Fft& fft = thread_local_fft(n_);
  auto coef = fft.forward(std::span<const double>(shifted));
  const double scale = 1.0 / std::sqrt(kTwoPi * static_cast<double>(n_));
  for (std::size_t j = 0; j < n_; ++j) coef[j] *= scale * precond_inv_sqrt_[j];
  return coef;
}

std::vector<std::complex<double>> TransferPlan::solve_transfer(std::span<const double> y,
                                                               SolveInfo* info, double rtol,
                                                               int max_iterations, int restart) const {
  if (y.size() != n_) throw ConfigError("solve_transfer: input length != N");
  const double bnorm = l2_norm(y);
  SolveInfo local;
  std::vector<double> w(n_, 0.0);  // preconditioned unknown: x = P w

  auto apply_a = [&](std::span<const double> v) {
    const auto xfreq = precondition(v);
    const auto z = apply_cn(Side::Source, xfreq);
    std::vector<double> out(n_);
    for (std::size_t r = 0; r < n_; ++r) out[r] = z[r].real();
    return out;
  };

  if (bnorm == 0.0) {
    if (info) *info = local;
    return std::vector<std::complex<double>>(n_, 0.0);
  }

  const int m = std::min<int>(restart, max_iterations);
  bool converged = false;
  while (local.iterations < max_iterations && !converged) {
    // Restart cycle.
    std::vector<double> r = apply_a(w);
    for (std::size_t i = 0; i < n_; ++i) r[i] = y[i] - r[i];
    double beta = l2_norm(r);
    if (beta / bnorm <= rtol) {
      local.relative_residual = beta / bnorm;
      converged = true;
      break;
    }
    std::vector<std::vector<double>> basis;
    basis.reserve(static_cast<std::size_t>(m) + 1);
    {
      std::vector<double> v0(r);
      for (double& x : v0) x /= beta;
      basis.push_back(std::move(v0));
    }
    std::vector<std::vector<double>> h(static_cast<std::size_t>(m) + 1,
                                       std::vector<double>(static_cast<std::size_t>(m), 0.0));
    std::vector<double> cs(static_cast<std::size_t>(m), 0.0), sn(static_cast<std::size_t>(m), 0.0);
    std::vector<double> g(static_cast<std::size_t>(m) + 1, 0.0);
    g[0] = beta;
    int k_used = 0;
    for (int k = 0; k < m && local.iterations < max_iterations; ++k) {
      auto wk = apply_a(basis[static_cast<std::size_t>(k)]);
      ++local.iterations;
      for (int i = 0; i <= k; ++i) {
        double dot = 0.0;
        for (std::size_t t = 0; t < n_; ++t) dot += wk[t] * basis[static_cast<std::size_t>(i)][t];
        h[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = dot;
        for (std::size_t t = 0; t < n_; ++t) wk[t] -= dot * basis[static_cast<std::size_t>(i)][t];
      }
      const double hkk = l2_norm(wk);
      h[static_cast<std::size_t>(k) + 1][static_cast<std::size_t>(k)] = hkk;
      // Apply stored rotations, then the new one.
      for (int i = 0; i < k; ++i) {
        const double t1 = cs[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +
                          sn[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(k)];
        const double t2 = -sn[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +
                          cs[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(k)];
        h[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = t1;
        h[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(k)] = t2;
      }
      const double denom = std::hypot(h[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)], hkk);
      if (denom == 0.0) {
        k_used = k;
        break;
      }
      cs[static_cast<std::size_t>(k)] = h[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] / denom;
      sn[static_cast<std::size_t>(k)] = hkk / denom;
      h[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] = denom;
      g[static_cast<std::size_t>(k) + 1] = -sn[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(k)];
      g[static_cast<std::size_t>(k)] = cs[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(k)];
      const double rel = std::abs(g[static_cast<std::size_t>(k) + 1]) / bnorm;
      local.residual_history.push_back(rel);
      k_used = k + 1;
      if (rel <= rtol) {
        converged = true;
        break;
      }
      if (hkk == 0.0) break;  // exact breakdown: solution lies in the basis
      std::vector<double> vk(wk);
      for (double& x : vk) x /= hkk;
      basis.push_back(std::move(vk));
    }
    // Back-substitution over the k_used columns.
    std::vector<double> yk(static_cast<std::size_t>(k_used), 0.0);
    for (int i = k_used - 1; i >= 0; --i) {
      double sum = g[static_cast<std::size_t>(i)];
      for (int jj = i + 1; jj < k_used; ++jj) {
        sum -= h[static_cast<std::size_t>(i)][static_cast<std::size_t>(jj)] * yk[static_cast<std::size_t>(jj)];
      }
      yk[static_cast<std::size_t>(i)] = sum / h[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < k_used; ++i) {
      for (std::size_t t = 0; t < n_; ++t) {
        w[t] += yk[static_cast<std::size_t>(i)] * basis[static_cast<std::size_t>(i)][t];
      }
    }
  }

  // True residual check.
  {
    auto aw = apply_a(w);
    double diff = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double d = y[i] - aw[i];
      diff += d * d;
    }
    local.relative_residual = std::sqrt(diff) / bnorm;
  }
  if (local.relative_residual > rtol) {
    std::string hist;
    for (double rr : local.residual_history) hist += " " + std::to_string(rr);
    throw NumericError("solve_transfer: no convergence after " + std::to_string(local.iterations) +
                       " iterations (relative residual " + std::to_string(local.relative_residual) +
                       "); history:" + hist);
  }
  if (info) *info = local;
  return precondition(w);
}

}  // namespace evospec
