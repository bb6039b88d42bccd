#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "evospec/gridio.hpp"
#include "evospec/rng.hpp"
#include "evospec/synthetic.hpp"

using namespace evospec;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* name) {
  const auto dir = fs::temp_directory_path() / "evospec_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE_BEGIN("gridio");

TEST_CASE("2x3 zero grid writes a 48-byte payload with matching sidecar") {
  const auto dir = temp_dir("zeros");
  GridSeries g(2, 3);
  GridHeader h;
  h.n_time = 2;
  h.n_loc = 3;
  h.n_lat = 1;
  h.n_lon = 3;
  h.scenario = "z";
  write_grid_series(dir / "z.f64grid", g, h);
  CHECK(fs::file_size(dir / "z.f64grid") == 48);
  const auto loaded = load_grid_series(dir / "z.f64grid");
  CHECK(loaded.header.n_time == 2);
  CHECK(loaded.header.n_loc == 3);
}

TEST_CASE("value 1.0 at (t=1,l=1) encodes as IEEE-754 little endian") {
  const auto dir = temp_dir("ieee");
  GridSeries g(1, 1);
  g.at(0, 0) = 1.0;
  GridHeader h;
  h.n_time = 1;
  h.n_loc = 1;
  h.n_lat = 1;
  h.n_lon = 1;
  write_grid_series(dir / "one.f64grid", g, h);
  std::ifstream in(dir / "one.f64grid", std::ios::binary);
  std::uint8_t bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  const std::uint8_t expect[8] = {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xF0, 0x3F};
  CHECK(std::memcmp(bytes, expect, 8) == 0);
}

TEST_CASE("write/load round trip is bit exact for random data") {
  const auto dir = temp_dir("roundtrip");
  CounterRng rng(7, 0);
  GridSeries g(50, 7);
  for (double& v : g.data) v = rng.normal() * 100.0;
  GridHeader h;
  h.n_time = 50;
  h.n_loc = 7;
  h.n_lat = 7;
  h.n_lon = 1;
  write_grid_series(dir / "r.f64grid", g, h);
  const auto loaded = load_grid_series(dir / "r.f64grid");
  CHECK(std::memcmp(loaded.series.data.data(), g.data.data(), g.data.size() * 8) == 0);
}

TEST_CASE("non-finite values are rejected at write time") {
  const auto dir = temp_dir("nonfinite");
  GridSeries g(2, 2);
  g.at(1, 0) = std::numeric_limits<double>::infinity();
  GridHeader h;
  h.n_time = 2;
  h.n_loc = 2;
  CHECK_THROWS_AS(write_grid_series(dir / "bad.f64grid", g, h), ConfigError);
}

TEST_CASE("synthetic fixture round-trips through the manifest loader") {
  const auto dir = temp_dir("fixture");
  SyntheticSpec spec;
  spec.seed = 11;
  spec.n_lat = 2;
  spec.n_lon = 2;
  spec.block_days = 365;
  SyntheticSpec::Scenario base;
  base.label = "pi";
  base.kind = ScenarioKind::BaselineEquilibrated;
  base.years = 2;
  base.realizations = 1;
  base.co2_annual = {289.0, 289.0};
  SyntheticSpec::Scenario hi;
  hi.label = "hi";
  hi.kind = ScenarioKind::Transient;
  hi.years = 2;
  hi.realizations = 2;
  hi.co2_annual = {300.0, 320.0};
  spec.scenarios = {base, hi};

  const auto manifest = write_fixture(spec, dir);
  const auto ens = load_ensemble(manifest);
  CHECK(ens.scenarios.size() == 2);
  CHECK(ens.baseline().runs.size() == 1);
  CHECK(ens.scenario("hi").runs.size() == 2);
  CHECK(ens.scenario("hi").n_time() == 730);

  // Byte-identical arrays after the disk round trip.
  const auto mem = generate_ensemble(spec);
  for (std::size_t si = 0; si < mem.scenarios.size(); ++si) {
    for (std::size_t r = 0; r < mem.scenarios[si].runs.size(); ++r) {
      const auto& a = mem.scenarios[si].runs[r].data;
      const auto& b = ens.scenarios[si].runs[r].data;
      REQUIRE(a.size() == b.size());
      CHECK(std::memcmp(a.data(), b.data(), a.size() * 8) == 0);
    }
  }
}

TEST_CASE("manifest with mismatched run lengths is rejected") {
  const auto dir = temp_dir("mismatch");
  SyntheticSpec spec;
  spec.block_days = 365;
  SyntheticSpec::Scenario base;
  base.label = "pi";
  base.kind = ScenarioKind::BaselineEquilibrated;
  base.years = 2;
  base.realizations = 1;
  base.co2_annual = {289.0, 289.0};
  SyntheticSpec::Scenario hi;
  hi.label = "hi";
  hi.kind = ScenarioKind::Transient;
  hi.years = 2;
  hi.realizations = 2;
  hi.co2_annual = {300.0, 320.0};
  spec.scenarios = {base, hi};
  const auto manifest = write_fixture(spec, dir);

  // Truncate one realization on disk: sidecar and payload disagree first.
  GridSeries shorter(365, 4);
  GridHeader h;
  h.n_time = 365;
  h.n_loc = 4;
  h.n_lat = 2;
  h.n_lon = 2;
  h.scenario = "hi";
  write_grid_series(dir / "hi_r1.f64grid", shorter, h);
  CHECK_THROWS_WITH_AS(load_ensemble(manifest),
                       "scenario 'hi': length mismatch across realizations", ConfigError);
}

TEST_SUITE_END();
