#include "evospec/mean_emulator.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "evospec/calendar.hpp"

namespace evospec {

using nlohmann::json;

std::vector<double> forcing_response(const ForcingTrajectory& traj, double phi) {
  if (!(phi >= 0.0 && phi < 1.0)) throw ConfigError("forcing_response: phi must be in [0,1)");
  const std::size_t n = traj.n_days();
  std::vector<double> c(n);
  double prev = 0.0;
  for (std::size_t t = 1; t <= n; ++t) {
    prev = phi * prev + (1.0 - phi) * traj.log_ratio(static_cast<std::int64_t>(t));
    c[t - 1] = prev;
  }
  return c;
}

namespace {

std::vector<double> moving_average_365(const std::vector<double>& x) {
  const int half = 182;
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> out(x.size());
  // Truncated window at the edges.
  double acc = 0.0;
  std::ptrdiff_t lo = 0, hi = -1;  // current inclusive window
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    const std::ptrdiff_t want_lo = std::max<std::ptrdiff_t>(0, t - half);
    const std::ptrdiff_t want_hi = std::min<std::ptrdiff_t>(n - 1, t + half);
    while (hi < want_hi) acc += x[static_cast<std::size_t>(++hi)];
    while (lo < want_lo) acc -= x[static_cast<std::size_t>(lo++)];
    out[static_cast<std::size_t>(t)] = acc / static_cast<double>(want_hi - want_lo + 1);
  }
  return out;
}

// Harmonic basis by day-of-year: row d has [1, cos(2 pi k d/365), sin(...)].
Eigen::MatrixXd harmonic_basis(int n_harmonics) {
  const int p = 2 * n_harmonics + 1;
  Eigen::MatrixXd u(365, p);
  for (int di = 0; di < 365; ++di) {
    u(di, 0) = 1.0;
    for (int k = 1; k <= n_harmonics; ++k) {
      const double arg = kTwoPi * k * (di + 1) / 365.0;
      u(di, 2 * k - 1) = std::cos(arg);
      u(di, 2 * k) = std::sin(arg);
    }
  }
  return u;
}

struct RegionAccum {
  // Day-of-year sums of realization-summed regional means.
  std::array<double, 365> y_by_day{};
  double ss = 0.0;      // sum of squared responses
  std::size_t rows = 0;  // total (r,t) rows
};

struct ScenarioCache {
  const ScenarioData* data = nullptr;
  std::size_t n_time = 0;
  std::size_t n_real = 0;
  // Regional means: ybar[r][t] per region index; ysum[t] = sum_r ybar.
  std::vector<std::vector<double>> ysum;  // [region][t]
  std::array<double, 365> day_count{};    // t's per day-of-year
};

// Assembles the phi-dependent normal matrix blocks from day-of-year sums.
void assemble_normal_blocks(const Eigen::MatrixXd& u, int p, double r_s,
                            const std::array<double, 365>& count, const std::array<double, 365>& s1,
                            const std::array<double, 365>& s2, Eigen::MatrixXd& xtx_out) {
  xtx_out.setZero(2 * p, 2 * p);
  for (int a = 0; a < p; ++a) {
    for (int b = a; b < p; ++b) {
      double sa = 0.0, sb = 0.0, sc = 0.0;
      for (int d = 0; d < 365; ++d) {
        const double ua_ub = u(d, a) * u(d, b);
        sa += count[static_cast<std::size_t>(d)] * ua_ub;
        sb += s1[static_cast<std::size_t>(d)] * ua_ub;
        sc += s2[static_cast<std::size_t>(d)] * ua_ub;
      }
      xtx_out(a, b) += r_s * sa;
      xtx_out(a, p + b) += r_s * sb;
      if (b != a) xtx_out(b, p + a) += r_s * sb;
      xtx_out(p + a, p + b) += r_s * sc;
    }
  }
}

}  // namespace

WarmingSeries warming_path(const RegionMeanParams& params, const ForcingTrajectory& traj) {
  WarmingSeries w;
  const auto c = forcing_response(traj, params.phi);
  const std::size_t n = c.size();
  w.delta.resize(n);
  w.rate_raw.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    w.delta[t] = params.beta1 * c[t];
    const double prev = (t == 0) ? 0.0 : c[t - 1];
    w.rate_raw[t] = params.beta1 * (c[t] - prev);
  }
  w.rate = moving_average_365(w.rate_raw);
  return w;
}

const RegionMeanParams& MeanModel::params_for_region(int region) const {
  auto it = region_params.find(region);
  if (it == region_params.end()) throw ConfigError("mean model: unknown region");
  return it->second;
}

const RegionMeanParams& MeanModel::params_for_location(std::size_t l) const {
  return params_for_region(regions.region_of(l));
}

const ForcingTrajectory& MeanModel::forcing(const std::string& scenario) const {
  auto it = forcings.find(scenario);
  if (it == forcings.end()) throw ConfigError("mean model: unknown scenario " + scenario);
  return it->second;
}

WarmingSeries MeanModel::warming(const std::string& scenario, int region) const {
  const auto& traj = forcing(scenario);
  auto it = scenario_kinds.find(scenario);
  if (it != scenario_kinds.end() && it->second == ScenarioKind::BaselineEquilibrated) {
    WarmingSeries w;
    w.delta.assign(traj.n_days(), 0.0);
    w.rate.assign(traj.n_days(), 0.0);
    w.rate_raw.assign(traj.n_days(), 0.0);
    return w;
  }
  return warming_path(params_for_region(region), traj);
}

double MeanModel::local_change_at(std::size_t l, double forcing_c, std::int64_t t) const {
  const auto& p = params_for_location(l);
  double seasonal = p.beta1;
  for (std::size_t k = 1; k <= p.gamma_c.size(); ++k) {
    const double arg = kTwoPi * static_cast<double>(k) * static_cast<double>(t) / 365.0;
    seasonal += p.gamma_c[k - 1] * std::cos(arg) + p.zeta_c[k - 1] * std::sin(arg);
  }
  return lambda[l] * forcing_c * seasonal;
}

double MeanModel::local_change(std::size_t l, const std::string& scenario, std::int64_t t) const {
  auto kind = scenario_kinds.find(scenario);
  if (kind != scenario_kinds.end() && kind->second == ScenarioKind::BaselineEquilibrated) return 0.0;
  const auto& p = params_for_location(l);
  const auto c = forcing_response(forcing(scenario), p.phi);
  if (t < 1 || static_cast<std::size_t>(t) > c.size()) {
    throw ConfigError("local_change: day outside trajectory domain");
  }
  return local_change_at(l, c[static_cast<std::size_t>(t - 1)], t);
}

MeanModel fit_mean_model(const ScenarioEnsemble& ensemble, const MeanFitOptions& opts) {
  const int K = opts.n_harmonics;
  if (K < 1) throw ConfigError("fit_mean_model: need at least one harmonic");
  const int p = 2 * K + 1;
  const int q = 2 * p;
  const Eigen::MatrixXd u = harmonic_basis(K);
  const auto& region_ids = ensemble.regions.region_ids();
  const std::size_t n_regions = region_ids.size();

  // Cache regional means and day-of-year aggregates per scenario. The
  // responses are centered per region so the profile search is invariant
  // to constant temperature shifts; the level is restored into beta0.
  std::vector<ScenarioCache> caches;
  std::vector<std::vector<RegionAccum>> accums;  // [scenario][region]
  for (const auto& s : ensemble.scenarios) {
    ScenarioCache cache;
    cache.data = &s;
    cache.n_time = s.n_time();
    cache.n_real = s.n_realizations();
    cache.ysum.assign(n_regions, std::vector<double>(cache.n_time, 0.0));
    for (std::size_t ri = 0; ri < n_regions; ++ri) {
      const auto& members = ensemble.regions.locations_in(region_ids[ri]);
      for (std::size_t t = 0; t < cache.n_time; ++t) {
        double ysum_t = 0.0;
        for (const auto& run : s.runs) {
          double m = 0.0;
          for (std::size_t l : members) m += run.at(t, l);
          ysum_t += m / static_cast<double>(members.size());
        }
        cache.ysum[ri][t] = ysum_t;
      }
    }
    for (std::size_t t = 0; t < cache.n_time; ++t) cache.day_count[t % 365] += 1.0;
    caches.push_back(std::move(cache));
  }
  std::vector<double> center(n_regions, 0.0);
  {
    std::vector<double> total(n_regions, 0.0), rows(n_regions, 0.0);
    for (const auto& cache : caches) {
      for (std::size_t ri = 0; ri < n_regions; ++ri) {
        for (double v : cache.ysum[ri]) total[ri] += v;
        rows[ri] += static_cast<double>(cache.n_time) * static_cast<double>(cache.n_real);
      }
    }
    for (std::size_t ri = 0; ri < n_regions; ++ri) center[ri] = total[ri] / rows[ri];
  }
  for (auto& cache : caches) {
    std::vector<RegionAccum> acc(n_regions);
    for (std::size_t ri = 0; ri < n_regions; ++ri) {
      const auto& members = ensemble.regions.locations_in(region_ids[ri]);
      for (std::size_t t = 0; t < cache.n_time; ++t) {
        cache.ysum[ri][t] -= static_cast<double>(cache.n_real) * center[ri];
        acc[ri].y_by_day[t % 365] += cache.ysum[ri][t];
        acc[ri].rows += cache.n_real;
      }
      // Sum of squares of centered per-realization responses.
      for (std::size_t t = 0; t < cache.n_time; ++t) {
        for (const auto& run : cache.data->runs) {
          double m = 0.0;
          for (std::size_t l : members) m += run.at(t, l);
          m = m / static_cast<double>(members.size()) - center[ri];
          acc[ri].ss += m * m;
        }
      }
    }
    accums.push_back(std::move(acc));
  }

  // The forcing functional must vary somewhere, else beta1 has no leverage.
  {
    bool any_transient = false;
    for (const auto& s : ensemble.scenarios) {
      if (s.id.kind == ScenarioKind::Transient) {
        const auto c = forcing_response(s.forcing, 0.5);
        for (std::size_t t = 0; t < s.n_time(); ++t) {
          if (std::abs(c[t]) > 1e-14) {
            any_transient = true;
            break;
          }
        }
      }
      if (any_transient) break;
    }
    if (!any_transient) {
      throw NumericError("fit_mean_model: beta1 unidentifiable (no forcing variation in ensemble)");
    }
  }

  // Profile the memory parameter: for a candidate phi the model is linear,
  // and the normal matrix is shared by all regions (only X'y differs).
  auto evaluate_phi = [&](double phi, std::vector<double>* rss_out,
                          std::vector<Eigen::VectorXd>* beta_out) {
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(q, q);
    std::vector<Eigen::VectorXd> xty(n_regions, Eigen::VectorXd::Zero(q));
    for (std::size_t si = 0; si < caches.size(); ++si) {
      const auto& cache = caches[si];
      const auto c = forcing_response(cache.data->forcing, phi);
      std::array<double, 365> s1{}, s2{};
      for (std::size_t t = 0; t < cache.n_time; ++t) {
        s1[t % 365] += c[t];
        s2[t % 365] += c[t] * c[t];
      }
      Eigen::MatrixXd xtx_s;
      assemble_normal_blocks(u, p, static_cast<double>(cache.n_real), cache.day_count, s1, s2, xtx_s);
      xtx += xtx_s;
      for (std::size_t ri = 0; ri < n_regions; ++ri) {
        std::array<double, 365> zy{};
        const auto& ysum = cache.ysum[ri];
        for (std::size_t t = 0; t < cache.n_time; ++t) zy[t % 365] += c[t] * ysum[t];
        for (int a = 0; a < p; ++a) {
          double top = 0.0, bot = 0.0;
          for (int d = 0; d < 365; ++d) {
            top += accums[si][ri].y_by_day[static_cast<std::size_t>(d)] * u(d, a);
            bot += zy[static_cast<std::size_t>(d)] * u(d, a);
          }
          xty[ri][a] += top;
          xty[ri][p + a] += bot;
        }
      }
    }
    Eigen::MatrixXd sym = xtx.selfadjointView<Eigen::Upper>();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sym);
    lu.setThreshold(1e-10);
    if (lu.rank() < q) {
      throw NumericError("fit_mean_model: rank-deficient design (beta1 unidentifiable)");
    }
    double total = 0.0;
    for (std::size_t ri = 0; ri < n_regions; ++ri) {
      Eigen::VectorXd beta = lu.solve(xty[ri]);
      double ss = 0.0;
      for (std::size_t si = 0; si < caches.size(); ++si) ss += accums[si][ri].ss;
      const double rss = ss - beta.dot(xty[ri]);
      if (rss_out) (*rss_out)[ri] = rss;
      if (beta_out) (*beta_out)[ri] = beta;
      total += rss;
    }
    return total;
  };

  // Coarse grid, one shared sweep; per-region minima then refined.
  std::vector<double> best_phi(n_regions, 0.0);
  std::vector<double> best_rss(n_regions, std::numeric_limits<double>::infinity());
  std::vector<double> rss(n_regions);
  if (!opts.fixed_phi) {
    for (double phi = 0.0; phi < 1.0 - 0.5 * opts.phi_grid_step; phi += opts.phi_grid_step) {
      evaluate_phi(phi, &rss, nullptr);
      for (std::size_t ri = 0; ri < n_regions; ++ri) {
        if (rss[ri] < best_rss[ri]) {
          best_rss[ri] = rss[ri];
          best_phi[ri] = phi;
        }
      }
    }
  }

  MeanModel model;
  model.n_harmonics = K;
  model.n_lat = ensemble.grid.n_lat;
  model.n_lon = ensemble.grid.n_lon;
  model.regions = ensemble.regions;
  for (const auto& s : ensemble.scenarios) {
    model.forcings.emplace(s.id.label, s.forcing);
    model.scenario_kinds.emplace(s.id.label, s.id.kind);
    model.co2_baseline_ppm = s.forcing.baseline_ppm();
  }

  // Golden-section refinement around each region's grid minimum.
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t ri = 0; ri < n_regions; ++ri) {
    double phi_star;
    if (opts.fixed_phi) {
      if (!(*opts.fixed_phi >= 0.0 && *opts.fixed_phi < 1.0)) {
        throw ConfigError("fit_mean_model: fixed phi must be in [0,1)");
      }
      phi_star = *opts.fixed_phi;
    } else {
      double lo = std::max(0.0, best_phi[ri] - opts.phi_grid_step);
      double hi = std::min(1.0 - 1e-9, best_phi[ri] + opts.phi_grid_step);
      auto rss_at = [&](double phi) {
        evaluate_phi(phi, &rss, nullptr);
        return rss[ri];
      };
      double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
      double f1 = rss_at(x1), f2 = rss_at(x2);
      while (hi - lo > opts.phi_refine_tol) {
        if (f1 <= f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - gr * (hi - lo);
          f1 = rss_at(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + gr * (hi - lo);
          f2 = rss_at(x2);
        }
      }
      phi_star = 0.5 * (lo + hi);
    }
    std::vector<Eigen::VectorXd> betas(n_regions);
    evaluate_phi(phi_star, &rss, &betas);
    const Eigen::VectorXd& b = betas[ri];
    RegionMeanParams rp;
    rp.phi = phi_star;
    rp.beta0 = b[0] + center[ri];
    rp.beta1 = b[p];
    rp.gamma.resize(static_cast<std::size_t>(K));
    rp.zeta.resize(static_cast<std::size_t>(K));
    rp.gamma_c.resize(static_cast<std::size_t>(K));
    rp.zeta_c.resize(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k) {
      rp.gamma[static_cast<std::size_t>(k - 1)] = b[2 * k - 1];
      rp.zeta[static_cast<std::size_t>(k - 1)] = b[2 * k];
      rp.gamma_c[static_cast<std::size_t>(k - 1)] = b[p + 2 * k - 1];
      rp.zeta_c[static_cast<std::size_t>(k - 1)] = b[p + 2 * k];
    }
    model.region_params.emplace(region_ids[ri], std::move(rp));
  }

  model.lambda = fit_pattern_scaling(ensemble);
  return model;
}

std::vector<double> fit_pattern_scaling(const ScenarioEnsemble& ensemble) {
  const std::size_t n_loc = ensemble.grid.n_loc();
  const auto& baseline = ensemble.baseline();
  // Baseline climatology per location over complete years.
  const std::size_t base_years = baseline.n_time() / 365;
  if (base_years == 0) throw ConfigError("fit_pattern_scaling: baseline shorter than a year");
  std::vector<double> base_mean(n_loc, 0.0);
  for (std::size_t t = 0; t < base_years * 365; ++t) {
    for (std::size_t l = 0; l < n_loc; ++l) base_mean[l] += baseline.runs[0].at(t, l);
  }
  for (auto& b : base_mean) b /= static_cast<double>(base_years * 365);

  // Through-origin slope of annual-mean local change on annual-mean
  // regional change, pooled over transient scenarios and years.
  std::vector<double> num(n_loc, 0.0);
  std::map<int, double> den_region;
  for (int region : ensemble.regions.region_ids()) den_region[region] = 0.0;
  std::vector<double> local(n_loc);
  for (const auto* s : ensemble.transients()) {
    const std::size_t years = s->n_time() / 365;
    for (std::size_t y = 0; y < years; ++y) {
      std::fill(local.begin(), local.end(), 0.0);
      for (std::size_t t = y * 365; t < (y + 1) * 365; ++t) {
        for (const auto& run : s->runs) {
          for (std::size_t l = 0; l < n_loc; ++l) local[l] += run.at(t, l);
        }
      }
      const double norm = 1.0 / (365.0 * static_cast<double>(s->runs.size()));
      for (std::size_t l = 0; l < n_loc; ++l) local[l] = local[l] * norm - base_mean[l];
      for (int region : ensemble.regions.region_ids()) {
        const auto& members = ensemble.regions.locations_in(region);
        double g = 0.0;
        for (std::size_t l : members) g += local[l];
        g /= static_cast<double>(members.size());
        for (std::size_t l : members) num[l] += local[l] * g;
        den_region[region] += g * g;
      }
    }
  }
  std::vector<double> lambda(n_loc, 1.0);
  for (int region : ensemble.regions.region_ids()) {
    if (!(den_region[region] > 0.0)) {
      throw NumericError("fit_pattern_scaling: zero regional change variation in region " +
                         std::to_string(region));
    }
    for (std::size_t l : ensemble.regions.locations_in(region)) {
      lambda[l] = num[l] / den_region[region];
    }
  }
  return lambda;
}

void save_mean_model(const std::filesystem::path& path, const MeanModel& model) {
  json j;
  j["n_harmonics"] = model.n_harmonics;
  j["n_lat"] = model.n_lat;
  j["n_lon"] = model.n_lon;
  j["co2_baseline_ppm"] = model.co2_baseline_ppm;
  std::vector<int> region_of;
  for (std::size_t l = 0; l < model.regions.n_loc(); ++l) region_of.push_back(model.regions.region_of(l));
  j["regions"] = region_of;
  j["lambda"] = model.lambda;
  json params = json::object();
  for (const auto& [id, p] : model.region_params) {
    params[std::to_string(id)] = {{"beta0", p.beta0},   {"beta1", p.beta1},
                                  {"phi", p.phi},       {"gamma", p.gamma},
                                  {"zeta", p.zeta},     {"gamma_c", p.gamma_c},
                                  {"zeta_c", p.zeta_c}};
  }
  j["region_params"] = params;
  json scen = json::array();
  for (const auto& [label, traj] : model.forcings) {
    json js;
    js["label"] = label;
    js["kind"] = to_string(model.scenario_kinds.at(label));
    js["start_year"] = traj.start_year();
    json annual = json::array();
    const std::int64_t years = static_cast<std::int64_t>(traj.n_days()) / 365;
    for (std::int64_t y = 0; y < years; ++y) {
      annual.push_back({traj.start_year() + y, traj.ppm(y * 365 + 1)});
    }
    js["co2_annual"] = annual;
    scen.push_back(js);
  }
  j["scenarios"] = scen;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for write: " + path.string());
  out << j.dump(2) << "\n";
}

MeanModel load_mean_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open: " + path.string());
  json j = json::parse(in);
  MeanModel model;
  model.n_harmonics = j.at("n_harmonics").get<int>();
  model.n_lat = j.at("n_lat").get<std::size_t>();
  model.n_lon = j.at("n_lon").get<std::size_t>();
  model.co2_baseline_ppm = j.at("co2_baseline_ppm").get<double>();
  model.regions = RegionPartition(j.at("regions").get<std::vector<int>>());
  model.lambda = j.at("lambda").get<std::vector<double>>();
  for (const auto& [key, jp] : j.at("region_params").items()) {
    RegionMeanParams p;
    p.beta0 = jp.at("beta0").get<double>();
    p.beta1 = jp.at("beta1").get<double>();
    p.phi = jp.at("phi").get<double>();
    p.gamma = jp.at("gamma").get<std::vector<double>>();
    p.zeta = jp.at("zeta").get<std::vector<double>>();
    p.gamma_c = jp.at("gamma_c").get<std::vector<double>>();
    p.zeta_c = jp.at("zeta_c").get<std::vector<double>>();
    model.region_params.emplace(std::stoi(key), std::move(p));
  }
  for (const auto& js : j.at("scenarios")) {
    const auto label = js.at("label").get<std::string>();
    std::vector<std::pair<std::int64_t, double>> annual;
    for (const auto& row : js.at("co2_annual")) {
      annual.emplace_back(row[0].get<std::int64_t>(), row[1].get<double>());
    }
    model.forcings.emplace(label, ForcingTrajectory(label, js.at("start_year").get<std::int64_t>(),
                                                    std::move(annual), model.co2_baseline_ppm));
    model.scenario_kinds.emplace(label, scenario_kind_from_string(js.at("kind").get<std::string>()));
  }
  return model;
}

}  // namespace evospec
