#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "aqcast/data_model.hpp"
#include "aqcast/raster.hpp"

namespace aqcast {

// Station-aligned daily data over a common date range. `pollution`, `satellite`
// and `topo` are indexed like `stations`.
struct StationDataset {
  std::vector<Station> stations;
  CivilDate start;
  CivilDate end;
  std::vector<PollutantSeries> pollution;
  std::vector<SatelliteSeries> satellite;
  WeatherTable weather;
  std::vector<TopoProfile> topo;

  std::size_t n_days() const noexcept { return static_cast<std::size_t>(days_between(start, end) + 1); }
  std::optional<std::size_t> station_index(std::string_view id) const noexcept;
  // Distinct calendar years in [start, end], ascending.
  std::vector<int> years() const;

  friend bool operator==(const StationDataset&, const StationDataset&) = default;
};

// ---------------------------------------------------------------------------
// Readers and writers for the on-disk schemas

// stations.csv: `station_id,lon,lat,pollutants[,x,y]`; x/y are projected meters.
std::vector<Station> read_stations(const std::filesystem::path& path);
void write_stations(const std::vector<Station>& stations, const std::filesystem::path& path);

// pollution.csv: `station_id,date,pollutant,value`. Every series spans the file's
// date range; absent rows and empty values are missing. Duplicate rows: last wins.
PollutionTable read_pollution(const std::filesystem::path& path, const std::vector<Station>& stations);
void write_pollution(const PollutionTable& table, const std::filesystem::path& path);

// satellite.csv: `station_id,date,no2,o3,so2,hcho,co,aerosol_index`. Unknown station
// ids are kept so that validation can report them.
SatelliteTable read_satellite_csv(const std::filesystem::path& path, const std::vector<Station>& stations);
void write_satellite_csv(const SatelliteTable& table, const std::filesystem::path& path);

// weather.csv: `date,temp,dewpoint,humidity,precip,wind_speed,wind_dir_deg,pressure,cloud_cover,solar_rad`.
// Throws GapError for a missing day and SchemaError for empty or out-of-range fields.
WeatherTable read_weather(const std::filesystem::path& path);
void write_weather(const WeatherTable& table, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Satellite rasters

// One optional grid per band, in kSatelliteBands order.
using DailyBandGrids = std::array<std::optional<RasterGrid>, kSatelliteBandCount>;

// Per-station 500 m radius means for every day in [start, end]; absent dates or
// bands are missing.
SatelliteTable extract_satellite(const std::map<CivilDate, DailyBandGrids>& rasters,
                                 const std::vector<Station>& stations, CivilDate start, CivilDate end);

// Raster files named `<band>_<YYYY-MM-DD>.asc` inside one directory.
class SatelliteRasterIndex {
public:
  explicit SatelliteRasterIndex(const std::filesystem::path& directory);

  std::optional<CivilDate> first() const noexcept;
  std::optional<CivilDate> last() const noexcept;
  const std::map<CivilDate, std::array<std::optional<std::filesystem::path>, kSatelliteBandCount>>&
  files() const noexcept { return files_; }

  // Per point, six band series over [start, end], loading one file at a time.
  std::vector<SatelliteSeries> extract(const std::vector<ProjectedPoint>& points, CivilDate start,
                                       CivilDate end) const;

private:
  std::map<CivilDate, std::array<std::optional<std::filesystem::path>, kSatelliteBandCount>> files_;
};

SatelliteTable extract_satellite(const SatelliteRasterIndex& rasters,
                                 const std::vector<Station>& stations, CivilDate start, CivilDate end);

// ---------------------------------------------------------------------------
// Assembly

struct StaticLayers {
  RasterGrid dem;
  RasterGrid landcover;
  LandCoverMap classmap;
};

std::vector<TopoProfile> compute_topo(const StaticLayers& layers, const std::vector<Station>& stations);

// Common range: latest source start to the earliest of the pollution end, the
// weather end and the day after the satellite end (the last window day precedes
// the target). Without pollution only satellite and weather bound the range.
StationDataset assemble_dataset(std::vector<Station> stations, const std::optional<PollutionTable>& pollution,
                                const SatelliteTable& satellite, const WeatherTable& weather,
                                std::vector<TopoProfile> topo);

// ---------------------------------------------------------------------------
// Missingness

struct MissingnessReport {
  CivilDate start;
  // Per pollutant: stations expected to measure it and the missing fraction per day.
  // Pollutants nobody measures have n_expected == 0 and no fractions.
  std::array<std::size_t, kPollutantCount> n_expected{};
  std::array<std::vector<double>, kPollutantCount> fraction_missing;
};

MissingnessReport missingness_report(const StationDataset& dataset);
// Long format: `pollutant,date,fraction_missing,n_expected`.
void write_missingness_csv(const MissingnessReport& report, const std::filesystem::path& path);

} // namespace aqcast
