#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evospec/calendar.hpp"
#include "evospec/common.hpp"

namespace evospec {

enum class ScenarioKind { BaselineEquilibrated, Transient };

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& s);

struct ScenarioId {
  std::string label;
  ScenarioKind kind = ScenarioKind::Transient;
};

struct GridSpec {
  std::size_t n_lat = 0;
  std::size_t n_lon = 0;
  std::vector<double> lat;  // per location, degrees
  std::vector<double> lon;

  std::size_t n_loc() const { return n_lat * n_lon; }

  static GridSpec regular(std::size_t n_lat, std::size_t n_lon);
};

/// Total partition of grid locations into regions.
class RegionPartition {
 public:
  RegionPartition() = default;
  RegionPartition(std::vector<int> region_of_location);

  int region_of(std::size_t loc) const { return region_of_[loc]; }
  std::size_t n_loc() const { return region_of_.size(); }
  const std::vector<int>& region_ids() const { return ids_; }
  const std::vector<std::size_t>& locations_in(int region_id) const;

  static RegionPartition single_region(std::size_t n_loc);

 private:
  std::vector<int> region_of_;
  std::vector<int> ids_;  // distinct region ids, sorted
  std::vector<std::vector<std::size_t>> members_;  // parallel to ids_
};

/// Daily CO2 concentrations for one scenario, step-interpolated from an
/// annual trajectory. Pre-history before the trajectory start is implicitly
/// the baseline concentration, so the forcing recursion can start at zero.
class ForcingTrajectory {
 public:
  ForcingTrajectory() = default;
  ForcingTrajectory(std::string scenario_label, std::int64_t start_year,
                    std::vector<std::pair<std::int64_t, double>> annual_ppm, double baseline_ppm);

  const std::string& scenario() const { return label_; }
  std::int64_t start_year() const { return start_year_; }
  double baseline_ppm() const { return baseline_ppm_; }
  std::size_t n_days() const { return static_cast<std::size_t>(n_years_) * Calendar365::days_per_year; }

  /// ppm at day t (1-based from start of trajectory).
  double ppm(std::int64_t t) const;

  /// log(co2(t)/co2_baseline), the forcing increment of the recursion.
  double log_ratio(std::int64_t t) const { return log_ratio_by_year_[year_index(t)]; }

  /// Day offset of calendar year `year`, day 1 of that year, 1-based.
  std::int64_t day_of_year_start(std::int64_t year) const;

  static ForcingTrajectory constant(std::string label, std::int64_t start_year, std::int64_t n_years,
                                    double ppm, double baseline_ppm);

 private:
  std::size_t year_index(std::int64_t t) const;

  std::string label_;
  std::int64_t start_year_ = 0;
  std::int64_t n_years_ = 0;
  double baseline_ppm_ = 0.0;
  std::vector<double> ppm_by_year_;
  std::vector<double> log_ratio_by_year_;
};

/// Time-major gridded daily series: data[t * n_loc + l].
struct GridSeries {
  std::size_t n_time = 0;
  std::size_t n_loc = 0;
  std::vector<double> data;

  GridSeries() = default;
  GridSeries(std::size_t n_time_, std::size_t n_loc_)
      : n_time(n_time_), n_loc(n_loc_), data(n_time_ * n_loc_, 0.0) {}

  double& at(std::size_t t, std::size_t l) { return data[t * n_loc + l]; }
  double at(std::size_t t, std::size_t l) const { return data[t * n_loc + l]; }

  /// Strided copy of one location's series.
  std::vector<double> location_series(std::size_t l) const;
};

struct ScenarioData {
  ScenarioId id;
  std::int64_t start_year = 1;
  std::vector<GridSeries> runs;
  ForcingTrajectory forcing;

  std::size_t n_realizations() const { return runs.size(); }
  std::size_t n_time() const { return runs.empty() ? 0 : runs.front().n_time; }
};

/// Immutable after construction; safe to read from many threads.
struct ScenarioEnsemble {
  GridSpec grid;
  RegionPartition regions;
  std::vector<ScenarioData> scenarios;

  const ScenarioData& baseline() const;
  const ScenarioData& scenario(const std::string& label) const;
  std::vector<const ScenarioData*> transients() const;

  /// Enforces the structural invariants (single baseline, equal lengths
  /// and grids within a scenario, finite values, region partition size).
  void validate() const;
};

}  // namespace evospec
