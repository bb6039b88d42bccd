#include <doctest.h>

#include <cmath>

#include "evospec/mean_emulator.hpp"
#include "evospec/rng.hpp"
#include "evospec/synthetic.hpp"
#include "oracles.hpp"

using namespace evospec;

TEST_SUITE_BEGIN("mean_emulator");

namespace {

ForcingTrajectory step_doubling(std::int64_t years) {
  // co2 doubles at the start of the trajectory and holds.
  std::vector<std::pair<std::int64_t, double>> annual;
  for (std::int64_t y = 0; y < years; ++y) annual.emplace_back(1 + y, 2.0 * 289.0);
  return ForcingTrajectory("step", 1, std::move(annual), 289.0);
}

}  // namespace

TEST_CASE("constant baseline co2 gives zero forcing response") {
  const auto traj = ForcingTrajectory::constant("b", 1, 3, 289.0, 289.0);
  for (double phi : {0.0, 0.5, 0.99}) {
    const auto c = forcing_response(traj, phi);
    for (double v : c) CHECK(v == 0.0);
  }
}

TEST_CASE("phi = 0 reduces to the instantaneous log ratio") {
  ForcingTrajectory traj("s", 1, {{1, 289.0}, {2, 350.0}, {3, 400.0}}, 289.0);
  const auto c = forcing_response(traj, 0.0);
  for (std::size_t t = 1; t <= traj.n_days(); ++t) {
    CHECK(c[t - 1] == doctest::Approx(traj.log_ratio(static_cast<std::int64_t>(t))).epsilon(1e-15));
  }
}

TEST_CASE("step doubling follows the geometric closed form exactly") {
  // C(t) = log2 (1 - phi^t) for a step at t=1; at phi=1/2 and t=11 this
  // is log2 (1 - 2^-11).
  const auto traj = step_doubling(1);
  const double phi = 0.5;
  const auto c = forcing_response(traj, phi);
  const double log2 = std::log(2.0);
  for (std::size_t t = 1; t <= 20; ++t) {
    const double want = log2 * (1.0 - std::pow(phi, static_cast<double>(t)));
    CHECK(std::abs(c[t - 1] - want) < 1e-12);
  }
  CHECK(std::abs(c[10] - log2 * (1.0 - std::pow(2.0, -11.0))) < 1e-12);
}

TEST_CASE("recursion equals the truncated direct sum to 1e-12") {
  ForcingTrajectory traj("s", 1, {{1, 289.0}, {2, 330.0}, {3, 360.0}, {4, 410.0}}, 289.0);
  const double phi = 0.85;
  const auto c = forcing_response(traj, phi);
  for (std::size_t t : {1ul, 100ul, 700ul, traj.n_days()}) {
    double direct = 0.0;
    // Terms older than the trajectory start are exactly zero.
    for (std::size_t m = 0; m < t; ++m) {
      direct += (1.0 - phi) * std::pow(phi, static_cast<double>(m)) *
                traj.log_ratio(static_cast<std::int64_t>(t - m));
    }
    CHECK(std::abs(c[t - 1] - direct) < 1e-12);
  }
}

TEST_CASE("monotone co2 gives a nondecreasing forcing response") {
  std::vector<std::pair<std::int64_t, double>> annual;
  for (std::int64_t y = 0; y < 50; ++y) annual.emplace_back(1 + y, 289.0 * std::exp(0.01 * static_cast<double>(y)));
  ForcingTrajectory traj("ramp", 1, std::move(annual), 289.0);
  const auto c = forcing_response(traj, 0.9);
  for (std::size_t t = 1; t < c.size(); ++t) CHECK(c[t] >= c[t - 1] - 1e-15);
}

TEST_CASE("warming path: baseline is identically zero") {
  SyntheticSpec spec;
  spec.n_lat = 1;
  spec.n_lon = 1;
  spec.block_days = 365;
  SyntheticSpec::Scenario base;
  base.label = "pi";
  base.kind = ScenarioKind::BaselineEquilibrated;
  base.years = 3;
  base.realizations = 1;
  base.co2_annual = {289.0, 289.0, 289.0};
  SyntheticSpec::Scenario hi;
  hi.label = "hi";
  hi.kind = ScenarioKind::Transient;
  hi.years = 4;
  hi.realizations = 2;
  hi.co2_annual = {300.0, 330.0, 360.0, 400.0};
  spec.scenarios = {base, hi};
  const auto ens = generate_ensemble(spec);
  const auto model = fit_mean_model(ens, {});
  const auto w = model.warming("pi", 0);
  for (double v : w.delta) CHECK(v == 0.0);
  for (double v : w.rate) CHECK(v == 0.0);
  CHECK(model.local_change(0, "pi", 100) == 0.0);
}

TEST_CASE("warming path under phi=0 and exponential ramp is linear in time") {
  // log(co2(t)/co2_B) = alpha * (year index); with phi = 0 the response
  // equals it, so the yearly-step path has slope alpha/365 per day after
  // annual smoothing. Check the closed form at year granularity.
  const double alpha = 0.02;
  std::vector<std::pair<std::int64_t, double>> annual;
  for (std::int64_t y = 0; y < 30; ++y) {
    annual.emplace_back(1 + y, 289.0 * std::exp(alpha * static_cast<double>(y)));
  }
  ForcingTrajectory traj("ramp", 1, std::move(annual), 289.0);
  RegionMeanParams params;
  params.beta1 = 2.5;
  params.phi = 0.0;
  const auto w = warming_path(params, traj);
  // Mid-year values: Delta = beta1 * alpha * year_index.
  for (std::int64_t y : {3, 10, 25}) {
    const std::size_t t = static_cast<std::size_t>(y) * 365 + 180;
    CHECK(w.delta[t] == doctest::Approx(params.beta1 * alpha * static_cast<double>(y)).epsilon(1e-12));
  }
  // Raw rate: a spike of beta1*alpha at each year boundary, zero within.
  CHECK(w.rate_raw[10] == 0.0);
  CHECK(w.rate_raw[365] == doctest::Approx(params.beta1 * alpha));
  // Smoothed rate in the interior: one spike per 365-day window.
  const std::size_t mid = 15 * 365;
  CHECK(w.rate[mid] == doctest::Approx(params.beta1 * alpha / 365.0).epsilon(1e-9));
}

TEST_CASE("step doubling rate before smoothing is the geometric difference") {
  const auto traj = step_doubling(2);
  RegionMeanParams params;
  params.beta1 = 1.7;
  params.phi = 0.6;
  const auto w = warming_path(params, traj);
  const double log2 = std::log(2.0);
  for (std::size_t t = 1; t <= 30; ++t) {
    // Delta(t) - Delta(t-1) = beta1 log2 (1-phi) phi^(t-1).
    const double want = params.beta1 * log2 * (1.0 - params.phi) *
                        std::pow(params.phi, static_cast<double>(t - 1));
    CHECK(w.rate_raw[t - 1] == doctest::Approx(want).epsilon(1e-12));
  }
}

namespace {

SyntheticSpec recovery_spec(std::uint64_t seed, double phi, double beta1) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.n_lat = 1;
  spec.n_lon = 2;
  spec.block_days = 3650;
  spec.truth.phi = phi;
  spec.truth.beta1 = beta1;
  spec.truth.gamma_c = {-0.4, 0.1};
  spec.truth.zeta_c = {0.2};
  spec.truth.seasonal_amp = 9.0;
  spec.truth.ar1_coef = 0.3;
  SyntheticSpec::Scenario base;
  base.label = "pi";
  base.kind = ScenarioKind::BaselineEquilibrated;
  base.years = 60;
  base.realizations = 1;
  base.co2_annual.assign(60, 289.0);
  SyntheticSpec::Scenario hi;
  hi.label = "hi";
  hi.kind = ScenarioKind::Transient;
  hi.years = 60;
  hi.realizations = 4;
  for (std::int64_t y = 0; y < 60; ++y) {
    hi.co2_annual.push_back(289.0 * std::exp(0.008 * static_cast<double>(y)));
  }
  spec.scenarios = {base, hi};
  return spec;
}

}  // namespace

TEST_CASE("fit recovers the generating parameters on synthetic truth") {
  const auto spec = recovery_spec(1001, 0.9, 3.2);
  const auto ens = generate_ensemble(spec);
  const auto model = fit_mean_model(ens, {});
  const auto& p = model.params_for_region(0);
  CHECK(std::abs(p.phi - 0.9) < 0.05);
  CHECK(std::abs(p.beta1 - 3.2) < 0.25);
  CHECK(std::abs(p.gamma_c[0] - (-0.4)) < 0.15);
  // Pattern scaling with lambda = 1 truth.
  for (double l : model.lambda) CHECK(std::abs(l - 1.0) < 0.08);
}

TEST_CASE("baseline-only ensemble makes beta1 unidentifiable") {
  SyntheticSpec spec;
  spec.n_lat = 1;
  spec.n_lon = 1;
  spec.block_days = 365;
  SyntheticSpec::Scenario base;
  base.label = "pi";
  base.kind = ScenarioKind::BaselineEquilibrated;
  base.years = 4;
  base.realizations = 1;
  base.co2_annual.assign(4, 289.0);
  spec.scenarios = {base};
  const auto ens = generate_ensemble(spec);
  CHECK_THROWS_AS(fit_mean_model(ens, {}), NumericError);
}

TEST_CASE("adding a constant shifts beta0 only") {
  const auto spec = recovery_spec(1002, 0.8, 2.0);
  auto ens = generate_ensemble(spec);
  const auto model_a = fit_mean_model(ens, {});
  for (auto& s : ens.scenarios) {
    for (auto& run : s.runs) {
      for (double& v : run.data) v += 7.5;
    }
  }
  // The RSS profile over phi is shift-invariant up to the search
  // tolerance; the least-squares equivariance is exact at fixed phi.
  const auto model_free = fit_mean_model(ens, {});
  const auto& pa = model_a.params_for_region(0);
  CHECK(std::abs(model_free.params_for_region(0).phi - pa.phi) < 5e-6);

  MeanFitOptions fixed;
  fixed.fixed_phi = pa.phi;
  const auto model_b = fit_mean_model(ens, fixed);
  const auto& pb = model_b.params_for_region(0);
  CHECK(pb.beta0 - pa.beta0 == doctest::Approx(7.5).epsilon(1e-8));
  CHECK(pb.beta1 == doctest::Approx(pa.beta1).epsilon(1e-8));
  for (int k = 0; k < 6; ++k) {
    CHECK(std::abs(pb.gamma[static_cast<std::size_t>(k)] - pa.gamma[static_cast<std::size_t>(k)]) < 1e-8);
    CHECK(std::abs(pb.zeta_c[static_cast<std::size_t>(k)] - pa.zeta_c[static_cast<std::size_t>(k)]) < 1e-8);
  }
}

TEST_CASE("pattern scaling recovers a known lambda field") {
  auto spec = recovery_spec(1003, 0.85, 3.0);
  spec.truth.lambda = {1.0, 1.7};  // mean 1.35: regional mean scales accordingly
  const auto ens = generate_ensemble(spec);
  const auto lambda = fit_pattern_scaling(ens);
  // Through-origin regression recovers lambda relative to the regional
  // mean response; normalize by the mean (1.35) to compare shapes.
  CHECK(lambda[1] / lambda[0] == doctest::Approx(1.7).epsilon(0.05));
}

TEST_CASE("unforced location gets a pattern-scaling factor near zero") {
  auto spec = recovery_spec(1006, 0.85, 3.0);
  spec.truth.lambda = {0.0, 2.0};  // location 0 carries no forced response
  const auto ens = generate_ensemble(spec);
  const auto lambda = fit_pattern_scaling(ens);
  CHECK(std::abs(lambda[0]) < 0.05);
  CHECK(lambda[1] > 1.5);
}

TEST_CASE("local change equals regional change for a single-cell region with lambda 1") {
  const auto spec = recovery_spec(1004, 0.85, 3.0);
  const auto ens = generate_ensemble(spec);
  auto model = fit_mean_model(ens, {});
  model.lambda = {1.0, 1.0};
  // No seasonal-change terms: local change reduces to beta1 C(t).
  auto& p = model.region_params.at(0);
  std::fill(p.gamma_c.begin(), p.gamma_c.end(), 0.0);
  std::fill(p.zeta_c.begin(), p.zeta_c.end(), 0.0);
  const auto c = forcing_response(model.forcing("hi"), p.phi);
  for (std::int64_t t : {500, 5000, 20000}) {
    CHECK(model.local_change(0, "hi", t) ==
          doctest::Approx(p.beta1 * c[static_cast<std::size_t>(t - 1)]).epsilon(1e-12));
  }
}

TEST_CASE("mean model serialization round-trips") {
  const auto spec = recovery_spec(1005, 0.7, 2.5);
  const auto ens = generate_ensemble(spec);
  const auto model = fit_mean_model(ens, {});
  const auto path = std::filesystem::temp_directory_path() / "evospec_tests" / "mean_params.json";
  std::filesystem::create_directories(path.parent_path());
  save_mean_model(path, model);
  const auto loaded = load_mean_model(path);
  const auto& pa = model.params_for_region(0);
  const auto& pb = loaded.params_for_region(0);
  CHECK(pa.beta1 == pb.beta1);
  CHECK(pa.phi == pb.phi);
  CHECK(pa.gamma == pb.gamma);
  CHECK(model.lambda == loaded.lambda);
  CHECK(loaded.forcing("hi").ppm(400) == model.forcing("hi").ppm(400));
}

TEST_SUITE_END();
