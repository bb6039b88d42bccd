#include "evospec/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace evospec {

std::string to_string(ScenarioKind kind) {
  return kind == ScenarioKind::BaselineEquilibrated ? "baseline-equilibrated" : "transient";
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
  if (s == "baseline-equilibrated") return ScenarioKind::BaselineEquilibrated;
  if (s == "transient") return ScenarioKind::Transient;
  throw ConfigError("unknown scenario kind: " + s);
}

GridSpec GridSpec::regular(std::size_t n_lat, std::size_t n_lon) {
  GridSpec g;
  g.n_lat = n_lat;
  g.n_lon = n_lon;
  g.lat.resize(n_lat * n_lon);
  g.lon.resize(n_lat * n_lon);
  for (std::size_t i = 0; i < n_lat; ++i) {
    for (std::size_t j = 0; j < n_lon; ++j) {
      const std::size_t l = i * n_lon + j;
      g.lat[l] = -90.0 + 180.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n_lat);
      g.lon[l] = 360.0 * static_cast<double>(j) / static_cast<double>(n_lon);
    }
  }
  return g;
}

RegionPartition::RegionPartition(std::vector<int> region_of_location)
    : region_of_(std::move(region_of_location)) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t l = 0; l < region_of_.size(); ++l) groups[region_of_[l]].push_back(l);
  for (auto& [id, members] : groups) {
    ids_.push_back(id);
    members_.push_back(std::move(members));
  }
}

const std::vector<std::size_t>& RegionPartition::locations_in(int region_id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), region_id);
  if (it == ids_.end() || *it != region_id) throw ConfigError("unknown region id");
  return members_[static_cast<std::size_t>(it - ids_.begin())];
}

RegionPartition RegionPartition::single_region(std::size_t n_loc) {
  return RegionPartition(std::vector<int>(n_loc, 0));
}

ForcingTrajectory::ForcingTrajectory(std::string scenario_label, std::int64_t start_year,
                                     std::vector<std::pair<std::int64_t, double>> annual_ppm,
                                     double baseline_ppm)
    : label_(std::move(scenario_label)), start_year_(start_year), baseline_ppm_(baseline_ppm) {
  if (annual_ppm.empty()) throw ConfigError("forcing trajectory: empty annual table");
  if (baseline_ppm <= 0.0) throw ConfigError("forcing trajectory: baseline ppm must be positive");
  std::sort(annual_ppm.begin(), annual_ppm.end());
  if (annual_ppm.front().first > start_year) {
    throw ConfigError("forcing trajectory: table starts after scenario start year");
  }
  const std::int64_t last_year = annual_ppm.back().first;
  n_years_ = last_year - start_year + 1;
  ppm_by_year_.resize(static_cast<std::size_t>(n_years_));
  std::size_t k = 0;
  double current = annual_ppm.front().second;
  for (std::int64_t y = start_year; y <= last_year; ++y) {
    while (k < annual_ppm.size() && annual_ppm[k].first <= y) current = annual_ppm[k++].second;
    if (current <= 0.0) throw ConfigError("forcing trajectory: co2 must be positive");
    ppm_by_year_[static_cast<std::size_t>(y - start_year)] = current;
  }
  log_ratio_by_year_.resize(ppm_by_year_.size());
  for (std::size_t i = 0; i < ppm_by_year_.size(); ++i) {
    log_ratio_by_year_[i] = std::log(ppm_by_year_[i] / baseline_ppm_);
  }
}

std::size_t ForcingTrajectory::year_index(std::int64_t t) const {
  if (t < 1 || t > static_cast<std::int64_t>(n_days())) {
    throw ConfigError("forcing trajectory: day " + std::to_string(t) + " outside domain");
  }
  return static_cast<std::size_t>((t - 1) / Calendar365::days_per_year);
}

double ForcingTrajectory::ppm(std::int64_t t) const { return ppm_by_year_[year_index(t)]; }

std::int64_t ForcingTrajectory::day_of_year_start(std::int64_t year) const {
  return (year - start_year_) * Calendar365::days_per_year + 1;
}

ForcingTrajectory ForcingTrajectory::constant(std::string label, std::int64_t start_year,
                                              std::int64_t n_years, double ppm, double baseline_ppm) {
  std::vector<std::pair<std::int64_t, double>> annual;
  annual.emplace_back(start_year, ppm);
  annual.emplace_back(start_year + n_years - 1, ppm);
  return ForcingTrajectory(std::move(label), start_year, std::move(annual), baseline_ppm);
}

std::vector<double> GridSeries::location_series(std::size_t l) const {
  std::vector<double> out(n_time);
  for (std::size_t t = 0; t < n_time; ++t) out[t] = data[t * n_loc + l];
  return out;
}

const ScenarioData& ScenarioEnsemble::baseline() const {
  for (const auto& s : scenarios) {
    if (s.id.kind == ScenarioKind::BaselineEquilibrated) return s;
  }
  throw ConfigError("ensemble has no baseline scenario");
}

const ScenarioData& ScenarioEnsemble::scenario(const std::string& label) const {
  for (const auto& s : scenarios) {
    if (s.id.label == label) return s;
  }
  throw ConfigError("unknown scenario: " + label);
}

std::vector<const ScenarioData*> ScenarioEnsemble::transients() const {
  std::vector<const ScenarioData*> out;
  for (const auto& s : scenarios) {
    if (s.id.kind == ScenarioKind::Transient) out.push_back(&s);
  }
  return out;
}

void ScenarioEnsemble::validate() const {
  const std::size_t n_loc = grid.n_loc();
  if (n_loc == 0) throw ConfigError("ensemble: empty grid");
  int n_baseline = 0;
  for (const auto& s : scenarios) {
    if (s.id.kind == ScenarioKind::BaselineEquilibrated) {
      ++n_baseline;
      if (s.runs.size() != 1) {
        throw ConfigError("baseline scenario '" + s.id.label + "' must have exactly one run");
      }
    }
    if (s.runs.empty()) throw ConfigError("scenario '" + s.id.label + "' has no runs");
    const std::size_t n_time = s.runs.front().n_time;
    for (std::size_t r = 0; r < s.runs.size(); ++r) {
      const auto& run = s.runs[r];
      if (run.n_loc != n_loc) {
        throw ConfigError("scenario '" + s.id.label + "' run " + std::to_string(r) +
                          ": grid size mismatch");
      }
      if (run.n_time != n_time) {
        throw ConfigError("scenario '" + s.id.label + "': length mismatch across realizations");
      }
      for (std::size_t i = 0; i < run.data.size(); ++i) {
        if (!std::isfinite(run.data[i])) {
          throw ConfigError("scenario '" + s.id.label + "' run " + std::to_string(r) +
                            ": non-finite value at t=" + std::to_string(i / n_loc + 1) +
                            " loc=" + std::to_string(i % n_loc + 1));
        }
      }
    }
    if (s.forcing.n_days() > 0 && s.forcing.n_days() < s.n_time()) {
      throw ConfigError("scenario '" + s.id.label + "': forcing trajectory shorter than run");
    }
  }
  if (n_baseline != 1) {
    throw ConfigError(n_baseline == 0 ? "missing baseline scenario"
                                      : "ensemble must have exactly one baseline scenario");
  }
  if (regions.n_loc() != n_loc) throw ConfigError("region partition does not cover the grid");
}

}  // namespace evospec
