#include "evospec/whittle.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "evospec/common.hpp"

namespace evospec {

void WhittleData::check() const {
  if (m_grid == 0) throw ConfigError("whittle: m_grid must be positive");
  if (!(baseline_weight > 0.0)) {
    throw ConfigError("whittle: baseline_weight must be positive (N_B / M)");
  }
  if (baseline.size() != m_grid) throw ConfigError("whittle: baseline periodogram length != M");
  for (const auto& s : scenarios) {
    if (s.n_realizations < 2.0) {
      throw ConfigError("whittle: scenario '" + s.label + "' needs >=2 realizations");
    }
    if (s.blocks.size() != s.avg_periodogram.size()) {
      throw ConfigError("whittle: covariate/periodogram block count mismatch");
    }
    for (const auto& block : s.avg_periodogram) {
      if (block.size() != m_grid) throw ConfigError("whittle: periodogram length != M");
    }
  }
}

double whittle_loglik(const WhittleData& data, std::span<const double> a_base,
                      std::span<const double> delta0, std::span<const double> delta1) {
  data.check();
  const std::size_t m = data.m_grid;
  CompensatedSum acc;
  for (const auto& s : data.scenarios) {
    const double r_s = s.n_realizations;
    const double r_prime = r_s - 1.0;
    for (std::size_t b = 0; b < s.blocks.size(); ++b) {
      const double dl = s.blocks[b].delta;
      const double dr = s.blocks[b].rate;
      for (std::size_t j = 0; j < m; ++j) {
        if (!(a_base[j] > 0.0)) throw NumericError("whittle_loglik: nonpositive spectrum");
        const double log_spec = std::log(a_base[j]) + dl * delta0[j] + dr * delta1[j];
        acc.add(-0.5 * (r_prime * log_spec + r_s * s.avg_periodogram[b][j] * std::exp(-log_spec)));
      }
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (!(a_base[j] > 0.0)) throw NumericError("whittle_loglik: nonpositive spectrum");
    acc.add(-0.5 * data.baseline_weight *
            (std::log(a_base[j]) + data.baseline[j] / a_base[j]));
  }
  return acc.value();
}

double saturated_loglik(const WhittleData& data) {
  data.check();
  const std::size_t m = data.m_grid;
  CompensatedSum acc;
  for (const auto& s : data.scenarios) {
    const double r_s = s.n_realizations;
    const double r_prime = r_s - 1.0;
    for (const auto& block : s.avg_periodogram) {
      for (std::size_t j = 0; j < m; ++j) {
        const double v = r_s * block[j] / r_prime;  // per-(s,b,j) free maximizer
        if (!(v > 0.0)) {
          throw NumericError("saturated_loglik: zero periodogram ordinate");
        }
        acc.add(-0.5 * r_prime * (std::log(v) + 1.0));
      }
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (!(data.baseline[j] > 0.0)) {
      throw NumericError("saturated_loglik: zero baseline ordinate");
    }
    acc.add(-0.5 * data.baseline_weight * (std::log(data.baseline[j]) + 1.0));
  }
  return acc.value();
}

double deviance(const WhittleData& data, std::span<const double> a_base,
                std::span<const double> delta0, std::span<const double> delta1) {
  return 2.0 * (saturated_loglik(data) - whittle_loglik(data, a_base, delta0, delta1));
}

double predictive_loglik(const WhittleScenarioData& heldout, std::size_t m_grid,
                         std::span<const double> a_base, std::span<const double> delta0,
                         std::span<const double> delta1) {
  const double r_s = heldout.n_realizations;
  const double r_prime = r_s - 1.0;
  CompensatedSum acc;
  for (std::size_t b = 0; b < heldout.blocks.size(); ++b) {
    const double dl = heldout.blocks[b].delta;
    const double dr = heldout.blocks[b].rate;
    for (std::size_t j = 0; j < m_grid; ++j) {
      if (!(a_base[j] > 0.0)) throw NumericError("predictive_loglik: nonpositive spectrum");
      const double log_spec = std::log(a_base[j]) + dl * delta0[j] + dr * delta1[j];
      acc.add(-0.5 *
              (r_prime * log_spec + r_s * heldout.avg_periodogram[b][j] * std::exp(-log_spec)));
    }
  }
  return acc.value();
}

void whittle_freq_objective(const WhittleData& data, std::size_t j, const double theta[3],
                            double* value, double grad[3], double hess[9]) {
  // Negative contribution of frequency j to 2*L, in theta = (alpha, d0, d1)
  // with alpha = log a^B(omega_j). Convex: linear terms plus positive
  // multiples of exp(-linear).
  const double alpha = theta[0], d0 = theta[1], d1 = theta[2];
  double f = 0.0;
  double g[3] = {0.0, 0.0, 0.0};
  double h[9] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  for (const auto& s : data.scenarios) {
    const double r_s = s.n_realizations;
    const double r_prime = r_s - 1.0;
    for (std::size_t b = 0; b < s.blocks.size(); ++b) {
      const double v[3] = {1.0, s.blocks[b].delta, s.blocks[b].rate};
      const double eta = alpha + v[1] * d0 + v[2] * d1;
      const double w = r_s * s.avg_periodogram[b][j] * std::exp(-eta);
      f += r_prime * eta + w;
      for (int a = 0; a < 3; ++a) {
        g[a] += (r_prime - w) * v[a];
        for (int c = 0; c < 3; ++c) h[3 * a + c] += w * v[a] * v[c];
      }
    }
  }
  const double wb = data.baseline_weight * data.baseline[j] * std::exp(-alpha);
  f += data.baseline_weight * alpha + wb;
  g[0] += data.baseline_weight - wb;
  h[0] += wb;
  if (value) *value = f;
  if (grad) std::copy(g, g + 3, grad);
  if (hess) std::copy(h, h + 9, hess);
}

RoughFitBias whittle_rough_bias(const WhittleData& data, bool fix_delta1_zero) {
  data.check();
  const int dim = fix_delta1_zero ? 2 : 3;
  // Design units: one per (scenario, block) with weight R_s - 1 and
  // covariates (1, delta, rate); one baseline unit with the aggregation
  // weight and covariates (1, 0, 0).
  std::vector<std::array<double, 3>> v;
  std::vector<double> w;
  for (const auto& s : data.scenarios) {
    for (const auto& blk : s.blocks) {
      v.push_back({1.0, blk.delta, fix_delta1_zero ? 0.0 : blk.rate});
      w.push_back(s.n_realizations - 1.0);
    }
  }
  v.push_back({1.0, 0.0, 0.0});
  w.push_back(data.baseline_weight);

  double info[9] = {0};
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) info[3 * a + b] += w[i] * v[i][static_cast<std::size_t>(a)] * v[i][static_cast<std::size_t>(b)];
    }
  }
  // Invert the dim x dim block by Gauss-Jordan (tiny, symmetric PD).
  double inv[9] = {0};
  {
    double m[3][6] = {{0}};
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) m[a][b] = info[3 * a + b];
      m[a][dim + a] = 1.0;
    }
    for (int col = 0; col < dim; ++col) {
      int piv = col;
      for (int r = col + 1; r < dim; ++r) {
        if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
      }
      if (m[piv][col] == 0.0) throw NumericError("whittle_rough_bias: singular design");
      std::swap(m[piv], m[col]);
      const double d = m[col][col];
      for (int c = 0; c < 2 * dim; ++c) m[col][c] /= d;
      for (int r = 0; r < dim; ++r) {
        if (r == col) continue;
        const double factor = m[r][col];
        for (int c = 0; c < 2 * dim; ++c) m[r][c] -= factor * m[col][c];
      }
    }
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) inv[3 * a + b] = m[a][dim + b];
    }
  }
  double rhs[3] = {0, 0, 0};
  for (std::size_t i = 0; i < v.size(); ++i) {
    double quad = 0.0;
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) {
        quad += v[i][static_cast<std::size_t>(a)] * inv[3 * a + b] * v[i][static_cast<std::size_t>(b)];
      }
    }
    const double h_i = w[i] * quad;
    for (int a = 0; a < dim; ++a) rhs[a] += v[i][static_cast<std::size_t>(a)] * h_i;
  }
  RoughFitBias bias;
  double out[3] = {0, 0, 0};
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) out[a] += -0.5 * inv[3 * a + b] * rhs[b];
  }
  bias.log_a = out[0];
  bias.delta0 = out[1];
  bias.delta1 = fix_delta1_zero ? 0.0 : out[2];
  return bias;
}

namespace {

// Solves the symmetric 3x3 (or masked 2x2) system h s = -g by Cholesky
// with a diagonal safeguard. Returns false if the matrix is not SPD even
// after regularization.
bool newton_step(const double h[9], const double g[3], bool fix_d1, double step[3]) {
  const int dim = fix_d1 ? 2 : 3;
  double a[9];
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a[3 * i + j] = h[3 * i + j];
  }
  double ridge = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    double l[9] = {0};
    bool ok = true;
    for (int i = 0; i < dim && ok; ++i) {
      for (int j = 0; j <= i; ++j) {
        double sum = a[3 * i + j] + (i == j ? ridge : 0.0);
        for (int k = 0; k < j; ++k) sum -= l[3 * i + k] * l[3 * j + k];
        if (i == j) {
          if (!(sum > 0.0)) {
            ok = false;
            break;
          }
          l[3 * i + i] = std::sqrt(sum);
        } else {
          l[3 * i + j] = sum / l[3 * j + j];
        }
      }
    }
    if (ok) {
      double y[3];
      for (int i = 0; i < dim; ++i) {
        double sum = -g[i];
        for (int k = 0; k < i; ++k) sum -= l[3 * i + k] * y[k];
        y[i] = sum / l[3 * i + i];
      }
      for (int i = dim - 1; i >= 0; --i) {
        double sum = y[i];
        for (int k = i + 1; k < dim; ++k) sum -= l[3 * k + i] * step[k];
        step[i] = sum / l[3 * i + i];
      }
      if (fix_d1) step[2] = 0.0;
      return true;
    }
    ridge = (ridge == 0.0) ? 1e-10 : ridge * 100.0;
  }
  return false;
}

}  // namespace

RoughFit maximize_whittle(const WhittleData& data, const WhittleOptions& opts) {
  data.check();
  const std::size_t m = data.m_grid;
  if (m < 4) throw ConfigError("maximize_whittle: frequency grid too small");

  // The delta terms are identifiable only if the (delta, rate) covariates
  // span rank 2 across (s,b) pairs.
  if (!opts.fix_delta1_zero) {
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& s : data.scenarios) {
      const double w = s.n_realizations - 1.0;
      for (const auto& blk : s.blocks) {
        sxx += w * blk.delta * blk.delta;
        sxy += w * blk.delta * blk.rate;
        syy += w * blk.rate * blk.rate;
      }
    }
    const double trace = sxx + syy;
    const double det = sxx * syy - sxy * sxy;
    if (!(det > 1e-12 * std::max(1.0, trace * trace))) {
      throw NumericError("maximize_whittle: delta terms unidentifiable (collinear covariates)");
    }
  }

  double total_counts = data.baseline_weight;
  for (const auto& s : data.scenarios) {
    total_counts += (s.n_realizations - 1.0) * static_cast<double>(s.blocks.size());
  }

  RoughFit fit;
  fit.log_a.assign(m, 0.0);
  fit.delta0.assign(m, 0.0);
  fit.delta1.assign(m, 0.0);

  const std::size_t j_hi = m / 2;  // Nyquist index for even m, mid for odd
  const std::size_t j_end = (m % 2 == 0) ? j_hi : j_hi + 1;  // interior frequencies only
  for (std::size_t j = 1; j < j_end; ++j) {
    // Pooled mean periodogram as the starting level.
    double pooled = data.baseline_weight * data.baseline[j];
    for (const auto& s : data.scenarios) {
      for (const auto& block : s.avg_periodogram) pooled += s.n_realizations * block[j];
    }
    pooled /= total_counts;
    if (!(pooled > 0.0)) {
      throw NumericError("maximize_whittle: nonpositive pooled spectrum at frequency " +
                         std::to_string(j));
    }
    double theta[3] = {std::log(pooled), 0.0, 0.0};
    double value = 0.0, grad[3], hess[9];
    whittle_freq_objective(data, j, theta, &value, grad, hess);
    auto norm_of = [&](const double g[3]) {
      return std::sqrt(g[0] * g[0] + g[1] * g[1] + (opts.fix_delta1_zero ? 0.0 : g[2] * g[2]));
    };
    int iter = 0;
    bool converged = false;
    for (; iter < opts.max_iterations; ++iter) {
      const double gnorm = norm_of(grad);
      if (gnorm <= opts.gradient_tol) {
        converged = true;
        break;
      }
      double step[3] = {0, 0, 0};
      if (!newton_step(hess, grad, opts.fix_delta1_zero, step)) {
        // Fall back to scaled steepest descent.
        const double scale = 1.0 / std::max(1.0, gnorm);
        for (int a = 0; a < 3; ++a) step[a] = -grad[a] * scale;
        if (opts.fix_delta1_zero) step[2] = 0.0;
      }
      const double slope = grad[0] * step[0] + grad[1] * step[1] + grad[2] * step[2];
      // Backtracking accepts on a sufficient objective decrease or, when
      // the value comparison hits the rounding floor near the optimum, on
      // a gradient-norm decrease.
      double t = 1.0;
      double trial[3], trial_value, trial_grad[3], trial_hess[9];
      bool accepted = false;
      for (int ls = 0; ls < 60 && !accepted; ++ls) {
        for (int a = 0; a < 3; ++a) trial[a] = theta[a] + t * step[a];
        whittle_freq_objective(data, j, trial, &trial_value, trial_grad, trial_hess);
        accepted = trial_value <= value + 0.25 * t * slope ||
                   norm_of(trial_grad) <= (1.0 - 0.25 * t) * gnorm;
        if (!accepted) t *= 0.5;
      }
      if (!accepted) break;  // no representable progress left
      for (int a = 0; a < 3; ++a) theta[a] = trial[a];
      value = trial_value;
      std::copy(trial_grad, trial_grad + 3, grad);
      std::copy(trial_hess, trial_hess + 9, hess);
    }
    if (!converged && norm_of(grad) <= opts.gradient_tol) converged = true;
    if (!converged) {
      throw NumericError("maximize_whittle: no convergence at frequency index " + std::to_string(j) +
                         " (grad norm " + std::to_string(norm_of(grad)) + " after " +
                         std::to_string(iter) + " iterations)");
    }
    fit.max_newton_iterations = std::max(fit.max_newton_iterations, iter);
    const double gnorm = std::sqrt(grad[0] * grad[0] + grad[1] * grad[1] +
                                   (opts.fix_delta1_zero ? 0.0 : grad[2] * grad[2]));
    fit.max_gradient_norm = std::max(fit.max_gradient_norm, gnorm);
    fit.log_a[j] = theta[0];
    fit.delta0[j] = theta[1];
    fit.delta1[j] = theta[2];
  }

  // DC and (for even m) Nyquist are filled by nearest-neighbor extension;
  // the upper half grid mirrors by evenness.
  fit.log_a[0] = fit.log_a[1];
  fit.delta0[0] = fit.delta0[1];
  fit.delta1[0] = fit.delta1[1];
  if (m % 2 == 0) {
    fit.log_a[j_hi] = fit.log_a[j_hi - 1];
    fit.delta0[j_hi] = fit.delta0[j_hi - 1];
    fit.delta1[j_hi] = fit.delta1[j_hi - 1];
  }
  for (std::size_t j = j_hi + 1; j < m; ++j) {
    fit.log_a[j] = fit.log_a[m - j];
    fit.delta0[j] = fit.delta0[m - j];
    fit.delta1[j] = fit.delta1[m - j];
  }
  return fit;
}

}  // namespace evospec
