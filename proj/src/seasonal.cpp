#include "evospec/seasonal.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "evospec/calendar.hpp"

namespace evospec {

namespace {

// Harmonic design row for day-of-year d (1-based): [1, cos, sin, ...].
void harmonic_row(int d, int n_harmonics, std::span<double> row) {
  row[0] = 1.0;
  for (int k = 1; k <= n_harmonics; ++k) {
    const double arg = kTwoPi * k * d / 365.0;
    row[2 * k - 1] = std::cos(arg);
    row[2 * k] = std::sin(arg);
  }
}

}  // namespace

std::vector<double> fit_mean_seasonal_cycle(std::span<const double> series, int n_harmonics) {
  if (n_harmonics < 1) throw ConfigError("fit_mean_seasonal_cycle: n_harmonics must be >= 1");
  if (series.size() < 730) {
    throw ConfigError("fit_mean_seasonal_cycle: need at least two years of daily data");
  }
  const int p = 2 * n_harmonics + 1;
  // The design depends on t only through d, so accumulate by day-of-year.
  std::array<double, 365> count{};
  std::array<double, 365> sum{};
  for (std::size_t t = 0; t < series.size(); ++t) {
    const int di = static_cast<int>(t % 365);
    count[di] += 1.0;
    sum[di] += series[t];
  }
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(p);
  std::vector<double> row(static_cast<std::size_t>(p));
  for (int di = 0; di < 365; ++di) {
    harmonic_row(di + 1, n_harmonics, row);
    for (int a = 0; a < p; ++a) {
      xty[a] += row[a] * sum[di];
      for (int b = a; b < p; ++b) xtx(a, b) += count[di] * row[a] * row[b];
    }
  }
  xtx = xtx.selfadjointView<Eigen::Upper>();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericError("fit_mean_seasonal_cycle: rank-deficient harmonic design");
  }
  Eigen::VectorXd beta = ldlt.solve(xty);
  std::vector<double> cycle(365);
  for (int di = 0; di < 365; ++di) {
    harmonic_row(di + 1, n_harmonics, row);
    double v = 0.0;
    for (int a = 0; a < p; ++a) v += beta[a] * row[a];
    cycle[static_cast<std::size_t>(di)] = v;
  }
  return cycle;
}

std::vector<double> fit_variance_seasonal_cycle(std::span<const double> residuals, int half_window) {
  if (half_window < 1) throw ConfigError("fit_variance_seasonal_cycle: half_window must be >= 1");
  const std::size_t n_years = residuals.size() / 365;
  if (n_years < 2) {
    throw ConfigError("fit_variance_seasonal_cycle: need at least two full years");
  }
  const int w = 2 * half_window + 1;
  std::vector<double> v(365, 0.0);
  for (int di = 0; di < 365; ++di) {
    double acc = 0.0;
    for (std::size_t y = 0; y < n_years; ++y) {
      double s = 0.0, s2 = 0.0;
      for (int k = -half_window; k <= half_window; ++k) {
        const int dk = ((di + k) % 365 + 365) % 365;
        const double x = residuals[y * 365 + static_cast<std::size_t>(dk)];
        s += x;
        s2 += x * x;
      }
      acc += (s2 - s * s / w) / (w - 1);
    }
    v[static_cast<std::size_t>(di)] = acc / static_cast<double>(n_years);
  }
  double vbar = mean(v);
  if (!(vbar > 0.0)) throw NumericError("fit_variance_seasonal_cycle: degenerate variance");
  std::vector<double> cycle(365);
  for (int di = 0; di < 365; ++di) {
    const double d2 = v[static_cast<std::size_t>(di)] / vbar;
    if (!(d2 > 0.0)) throw NumericError("fit_variance_seasonal_cycle: degenerate variance");
    cycle[static_cast<std::size_t>(di)] = std::sqrt(d2);
  }
  // Exact renormalization of mean_d D^2 after the per-day division.
  double m2 = 0.0;
  for (double d : cycle) m2 += d * d;
  m2 /= 365.0;
  const double corr = 1.0 / std::sqrt(m2);
  for (double& d : cycle) d *= corr;
  return cycle;
}

std::vector<double> deseasonalize(std::span<const double> series, std::span<const double> mean_cycle,
                                  std::span<const double> scale_cycle) {
  std::vector<double> x(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    const std::size_t di = t % 365;
    x[t] = (series[t] - mean_cycle[di]) / scale_cycle[di];
  }
  return x;
}

std::vector<double> reseasonalize(std::span<const double> x, std::span<const double> mean_cycle,
                                  std::span<const double> scale_cycle) {
  std::vector<double> y(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    const std::size_t di = t % 365;
    y[t] = mean_cycle[di] + scale_cycle[di] * x[t];
  }
  return y;
}

SeasonalModel fit_seasonal_model(const GridSeries& series, int n_harmonics, int half_window) {
  SeasonalModel model;
  model.n_loc = series.n_loc;
  model.mean_cycle.resize(365 * series.n_loc);
  model.scale_cycle.resize(365 * series.n_loc);
  for (std::size_t l = 0; l < series.n_loc; ++l) {
    const auto y = series.location_series(l);
    const auto m = fit_mean_seasonal_cycle(y, n_harmonics);
    std::vector<double> resid(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) resid[t] = y[t] - m[t % 365];
    const auto d = fit_variance_seasonal_cycle(resid, half_window);
    for (int di = 0; di < 365; ++di) {
      model.mean_cycle[static_cast<std::size_t>(di) * series.n_loc + l] = m[static_cast<std::size_t>(di)];
      model.scale_cycle[static_cast<std::size_t>(di) * series.n_loc + l] = d[static_cast<std::size_t>(di)];
    }
  }
  return model;
}

std::vector<GridSeries> compute_contrasts(const ScenarioData& scenario, const SeasonalModel& seasonal) {
  const std::size_t r_s = scenario.runs.size();
  if (r_s < 2) throw ConfigError("contrasts need >=2 realizations");
  const std::size_t n_time = scenario.n_time();
  const std::size_t n_loc = scenario.runs.front().n_loc;
  if (seasonal.n_loc != n_loc) throw ConfigError("compute_contrasts: seasonal model grid mismatch");

  std::vector<GridSeries> q(r_s, GridSeries(n_time, n_loc));
  for (std::size_t t = 0; t < n_time; ++t) {
    const int di = static_cast<int>(t % 365);
    for (std::size_t l = 0; l < n_loc; ++l) {
      double avg = 0.0;
      for (std::size_t r = 0; r < r_s; ++r) avg += scenario.runs[r].at(t, l);
      avg /= static_cast<double>(r_s);
      const double scale = seasonal.d(di, l);
      for (std::size_t r = 0; r < r_s; ++r) {
        q[r].at(t, l) = (scenario.runs[r].at(t, l) - avg) / scale;
      }
    }
  }
  return q;
}

}  // namespace evospec
