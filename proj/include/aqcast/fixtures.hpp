#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "aqcast/data_model.hpp"

namespace aqcast {

enum class PlantedTarget { linear, threshold };

// Synthetic dataset with a known target relationship. The target for day t is a
// function of the (gap-filled) satellite value of day t-1 for the pollutant's band
// and the temperature of day t, plus uniform noise in [-noise, noise].
struct FixtureSpec {
  std::size_t n_stations = 3;
  std::size_t n_days = 120;
  CivilDate start{2022, 11, 1};
  std::uint64_t seed = 20240501;
  PlantedTarget target = PlantedTarget::threshold;
  double noise = 1.0;
  double pollution_missing_rate = 0.05;
  double satellite_missing_rate = 0.05;
  // Also write daily band rasters under satellite/ and derive satellite.csv from them.
  bool satellite_rasters = false;
};

struct FixturePaths {
  std::filesystem::path root;
  std::filesystem::path stations;
  std::filesystem::path pollution;
  std::filesystem::path weather;
  std::filesystem::path satellite_csv;
  std::optional<std::filesystem::path> satellite_rasters;
  std::filesystem::path dem;
  std::filesystem::path landcover;
  std::filesystem::path classmap;
  std::filesystem::path config;
};

// Writes stations.csv, pollution.csv, weather.csv, satellite.csv, dem.asc,
// landcover.asc, classmap.csv and a config.json pointing at them. Byte-identical for
// identical specs. Throws IoError.
FixturePaths generate_fixture(const FixtureSpec& spec, const std::filesystem::path& directory);

} // namespace aqcast
