#include <doctest.h>

#include "evospec/calendar.hpp"
#include "evospec/grid.hpp"

using namespace evospec;

TEST_SUITE_BEGIN("grid");

TEST_CASE("day of year wraps with period 365 and no leap years") {
  CHECK(Calendar365::day_of_year(1) == 1);
  CHECK(Calendar365::day_of_year(365) == 365);
  CHECK(Calendar365::day_of_year(366) == 1);
  for (std::int64_t t : {1, 37, 365, 400, 3650, 99999}) {
    CHECK(Calendar365::day_of_year(t + 365) == Calendar365::day_of_year(t));
  }
  CHECK(Calendar365::year_of(1, 1870) == 1870);
  CHECK(Calendar365::year_of(365, 1870) == 1870);
  CHECK(Calendar365::year_of(366, 1870) == 1871);
}

TEST_CASE("forcing trajectory step-interpolates annual values") {
  ForcingTrajectory traj("s", 2000, {{2000, 289.0}, {2001, 300.0}, {2002, 330.0}}, 289.0);
  CHECK(traj.n_days() == 3 * 365);
  CHECK(traj.ppm(1) == 289.0);
  CHECK(traj.ppm(365) == 289.0);
  CHECK(traj.ppm(366) == 300.0);
  CHECK(traj.ppm(2 * 365) == 300.0);
  CHECK(traj.ppm(2 * 365 + 1) == 330.0);
  CHECK(traj.log_ratio(100) == doctest::Approx(0.0));
  CHECK(traj.day_of_year_start(2001) == 366);
  CHECK_THROWS_AS(traj.ppm(0), ConfigError);
  CHECK_THROWS_AS(traj.ppm(3 * 365 + 1), ConfigError);
}

TEST_CASE("gaps in the annual table hold the previous value") {
  ForcingTrajectory traj("s", 2000, {{2000, 289.0}, {2003, 320.0}}, 289.0);
  CHECK(traj.ppm(2 * 365 + 5) == 289.0);  // year 2002 inherits 2000's value
  CHECK(traj.ppm(3 * 365 + 1) == 320.0);
}

TEST_CASE("nonpositive co2 is rejected") {
  CHECK_THROWS_AS(ForcingTrajectory("s", 1, {{1, -5.0}}, 289.0), ConfigError);
  CHECK_THROWS_AS(ForcingTrajectory("s", 1, {{1, 400.0}}, 0.0), ConfigError);
}

TEST_CASE("region partition covers every location exactly once") {
  RegionPartition part({0, 0, 1, 1, 2, 1});
  CHECK(part.n_loc() == 6);
  std::size_t covered = 0;
  for (int id : part.region_ids()) covered += part.locations_in(id).size();
  CHECK(covered == 6);
  CHECK(part.region_of(4) == 2);
  CHECK_THROWS_AS(part.locations_in(7), ConfigError);
}

TEST_CASE("grid series column extraction is a strided read") {
  GridSeries g(3, 2);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t l = 0; l < 2; ++l) g.at(t, l) = 10.0 * static_cast<double>(t) + static_cast<double>(l);
  }
  const auto col = g.location_series(1);
  CHECK(col == std::vector<double>{1.0, 11.0, 21.0});
}

TEST_CASE("ensemble validation enforces the structural invariants") {
  ScenarioEnsemble ens;
  ens.grid = GridSpec::regular(1, 2);
  ens.regions = RegionPartition::single_region(2);

  ScenarioData base;
  base.id = {"pi", ScenarioKind::BaselineEquilibrated};
  base.runs.emplace_back(730, 2);
  base.forcing = ForcingTrajectory::constant("pi", 1, 2, 289.0, 289.0);

  ScenarioData trans;
  trans.id = {"hi", ScenarioKind::Transient};
  trans.runs.emplace_back(365, 2);
  trans.runs.emplace_back(365, 2);
  trans.forcing = ForcingTrajectory::constant("hi", 1, 1, 300.0, 289.0);

  ens.scenarios = {base, trans};
  CHECK_NOTHROW(ens.validate());

  SUBCASE("missing baseline") {
    ens.scenarios = {trans};
    CHECK_THROWS_WITH_AS(ens.validate(), "missing baseline scenario", ConfigError);
  }
  SUBCASE("two baselines") {
    ens.scenarios = {base, base};
    CHECK_THROWS_AS(ens.validate(), ConfigError);
  }
  SUBCASE("length mismatch across realizations") {
    ens.scenarios[1].runs[1] = GridSeries(366, 2);
    CHECK_THROWS_WITH_AS(ens.validate(), "scenario 'hi': length mismatch across realizations",
                         ConfigError);
  }
  SUBCASE("non-finite value reported with time and location") {
    ens.scenarios[1].runs[0].at(4, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(ens.validate(),
                         "scenario 'hi' run 0: non-finite value at t=5 loc=2", ConfigError);
  }
  SUBCASE("baseline must be a single run") {
    ens.scenarios[0].runs.emplace_back(730, 2);
    CHECK_THROWS_AS(ens.validate(), ConfigError);
  }
}

TEST_SUITE_END();
