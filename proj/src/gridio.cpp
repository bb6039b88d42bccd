#include "evospec/gridio.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace evospec {

using nlohmann::json;

namespace {

static_assert(sizeof(double) == 8);

void byteswap_if_big_endian(std::vector<double>& v) {
  if constexpr (std::endian::native == std::endian::big) {
    for (double& x : v) {
      std::uint64_t bits;
      std::memcpy(&bits, &x, 8);
      bits = __builtin_bswap64(bits);
      std::memcpy(&x, &bits, 8);
    }
  } else {
    (void)v;
  }
}

std::filesystem::path sidecar_path(std::filesystem::path path) {
  path.replace_extension(".json");
  return path;
}

}  // namespace

void write_grid_series(const std::filesystem::path& path, const GridSeries& series,
                       const GridHeader& header) {
  require_finite(series.data, "write_grid_series(" + path.string() + ")");
  if (series.n_time * series.n_loc != series.data.size()) {
    throw ConfigError("write_grid_series: dims inconsistent with payload size");
  }
  std::vector<double> payload = series.data;
  byteswap_if_big_endian(payload);
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for write: " + path.string());
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(double)));
    if (!out) throw ConfigError("write failed: " + path.string());
  }
  json j;
  j["n_time"] = series.n_time;
  j["n_loc"] = series.n_loc;
  j["n_lat"] = header.n_lat;
  j["n_lon"] = header.n_lon;
  j["scenario"] = header.scenario;
  j["kind"] = header.kind;
  j["start_year"] = header.start_year;
  std::ofstream side(sidecar_path(path));
  if (!side) throw ConfigError("cannot open for write: " + sidecar_path(path).string());
  side << j.dump(2) << "\n";
}

LoadedGrid load_grid_series(const std::filesystem::path& path) {
  std::ifstream side(sidecar_path(path));
  if (!side) throw ConfigError("missing sidecar: " + sidecar_path(path).string());
  json j = json::parse(side);
  LoadedGrid g;
  g.header.n_time = j.at("n_time").get<std::size_t>();
  g.header.n_loc = j.at("n_loc").get<std::size_t>();
  g.header.n_lat = j.at("n_lat").get<std::size_t>();
  g.header.n_lon = j.at("n_lon").get<std::size_t>();
  g.header.scenario = j.at("scenario").get<std::string>();
  g.header.kind = j.at("kind").get<std::string>();
  g.header.start_year = j.at("start_year").get<std::int64_t>();

  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  const std::size_t expect = g.header.n_time * g.header.n_loc * sizeof(double);
  if (bytes != expect) {
    throw ConfigError("payload size mismatch for " + path.string() + ": expected " +
                      std::to_string(expect) + " bytes, found " + std::to_string(bytes));
  }
  g.series.n_time = g.header.n_time;
  g.series.n_loc = g.header.n_loc;
  g.series.data.resize(g.header.n_time * g.header.n_loc);
  in.read(reinterpret_cast<char*>(g.series.data.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw ConfigError("read failed: " + path.string());
  byteswap_if_big_endian(g.series.data);
  for (std::size_t i = 0; i < g.series.data.size(); ++i) {
    if (!std::isfinite(g.series.data[i])) {
      throw ConfigError("non-finite value in " + path.string() + " at t=" +
                        std::to_string(i / g.series.n_loc + 1) + " loc=" +
                        std::to_string(i % g.series.n_loc + 1));
    }
  }
  return g;
}

std::vector<std::pair<std::int64_t, double>> read_co2_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open: " + path.string());
  std::vector<std::pair<std::int64_t, double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("year", 0) == 0) continue;  // header
    std::istringstream ss(line);
    std::string ys, ps;
    if (!std::getline(ss, ys, ',') || !std::getline(ss, ps)) {
      throw ConfigError("bad co2 csv row in " + path.string() + ": " + line);
    }
    rows.emplace_back(std::stoll(ys), std::stod(ps));
  }
  if (rows.empty()) throw ConfigError("empty co2 csv: " + path.string());
  return rows;
}

void write_co2_csv(const std::filesystem::path& path,
                   const std::vector<std::pair<std::int64_t, double>>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for write: " + path.string());
  out << "year,ppm\n";
  out.precision(17);
  for (const auto& [y, p] : rows) out << y << "," << p << "\n";
}

std::vector<int> read_region_csv(const std::filesystem::path& path, std::size_t n_loc) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open: " + path.string());
  std::vector<int> region(n_loc, -1);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("location_index", 0) == 0) continue;
    std::istringstream ss(line);
    std::string ls, rs;
    if (!std::getline(ss, ls, ',') || !std::getline(ss, rs)) {
      throw ConfigError("bad region csv row in " + path.string() + ": " + line);
    }
    const std::size_t l = std::stoull(ls);
    if (l < 1 || l > n_loc) throw ConfigError("region csv: location index out of range: " + ls);
    region[l - 1] = std::stoi(rs);
  }
  for (std::size_t l = 0; l < n_loc; ++l) {
    if (region[l] < 0) {
      throw ConfigError("region csv: location " + std::to_string(l + 1) + " unassigned");
    }
  }
  return region;
}

void write_region_csv(const std::filesystem::path& path, const std::vector<int>& region_of_location) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for write: " + path.string());
  out << "location_index,region_id\n";
  for (std::size_t l = 0; l < region_of_location.size(); ++l) {
    out << (l + 1) << "," << region_of_location[l] << "\n";
  }
}

ScenarioEnsemble load_ensemble(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw ConfigError("cannot open manifest: " + manifest_path.string());
  json j = json::parse(in);
  const auto dir = manifest_path.parent_path();

  ScenarioEnsemble ens;
  const std::size_t n_lat = j.at("grid").at("n_lat").get<std::size_t>();
  const std::size_t n_lon = j.at("grid").at("n_lon").get<std::size_t>();
  ens.grid = GridSpec::regular(n_lat, n_lon);
  const double baseline_ppm = j.at("co2_baseline_ppm").get<double>();

  ens.regions = RegionPartition(
      read_region_csv(dir / j.at("regions_csv").get<std::string>(), ens.grid.n_loc()));

  for (const auto& js : j.at("scenarios")) {
    ScenarioData s;
    s.id.label = js.at("label").get<std::string>();
    s.id.kind = scenario_kind_from_string(js.at("kind").get<std::string>());
    s.start_year = js.at("start_year").get<std::int64_t>();
    s.forcing = ForcingTrajectory(s.id.label, s.start_year,
                                  read_co2_csv(dir / js.at("co2_csv").get<std::string>()),
                                  baseline_ppm);
    for (const auto& run_path : js.at("runs")) {
      auto g = load_grid_series(dir / run_path.get<std::string>());
      if (g.header.n_lat != n_lat || g.header.n_lon != n_lon) {
        throw ConfigError("grid dims mismatch in " + run_path.get<std::string>());
      }
      s.runs.push_back(std::move(g.series));
    }
    ens.scenarios.push_back(std::move(s));
  }
  ens.validate();
  return ens;
}

}  // namespace evospec
