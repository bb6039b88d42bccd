#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "evospec/grid.hpp"

namespace evospec {

/// Sidecar metadata for a .f64grid payload.
struct GridHeader {
  std::size_t n_time = 0;
  std::size_t n_loc = 0;
  std::size_t n_lat = 0;
  std::size_t n_lon = 0;
  std::string scenario;
  std::string kind = "transient";
  std::int64_t start_year = 1;
};

/// Writes `series` as raw little-endian float64, time-major, to
/// `path` (.f64grid) with a JSON sidecar next to it (.json).
void write_grid_series(const std::filesystem::path& path, const GridSeries& series,
                       const GridHeader& header);

struct LoadedGrid {
  GridSeries series;
  GridHeader header;
};

LoadedGrid load_grid_series(const std::filesystem::path& path);

/// Reads an ensemble manifest (JSON) referencing grid files, CO2
/// trajectory CSVs (year,ppm) and a region CSV (location_index,region_id).
ScenarioEnsemble load_ensemble(const std::filesystem::path& manifest_path);

/// CSV helpers shared by the manifest loader and the CLI.
std::vector<std::pair<std::int64_t, double>> read_co2_csv(const std::filesystem::path& path);
std::vector<int> read_region_csv(const std::filesystem::path& path, std::size_t n_loc);
void write_co2_csv(const std::filesystem::path& path,
                   const std::vector<std::pair<std::int64_t, double>>& rows);
void write_region_csv(const std::filesystem::path& path, const std::vector<int>& region_of_location);

}  // namespace evospec
