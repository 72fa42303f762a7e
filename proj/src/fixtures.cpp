#include "aqcast/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

#include "aqcast/csv.hpp"
#include "aqcast/errors.hpp"
#include "aqcast/features.hpp"
#include "aqcast/ingest.hpp"
#include "aqcast/raster.hpp"

namespace aqcast {

namespace {

constexpr double kXll = 500000.0;
constexpr double kYll = 5000000.0;
constexpr double kExtent = 10000.0;

struct BandShape {
  double base;
  double amplitude;
  double phase_days;
};

constexpr std::array<BandShape, kSatelliteBandCount> kBands{{
    {60.0, 20.0, 100.0},   // no2, winter peak
    {110.0, 25.0, -80.0},  // o3, summer peak
    {2.0, 0.8, 100.0},     // so2
    {8.0, 3.0, -80.0},     // hcho
    {30.0, 6.0, 100.0},    // co
    {0.3, 0.8, 60.0},      // aerosol index, may go negative
}};

// Satellite band driving each pollutant's planted target (kAllPollutants order).
constexpr std::array<std::size_t, kPollutantCount> kDrivingBand{5, 4, 0, 2, 1};

constexpr std::array<std::pair<long long, LandCover>, 27> kClassCodes{{
    {11100, LandCover::urban},     {11210, LandCover::urban},  {11220, LandCover::urban},
    {11230, LandCover::urban},     {11240, LandCover::urban},  {11300, LandCover::urban},
    {12100, LandCover::urban},     {12210, LandCover::road},   {12220, LandCover::road},
    {12230, LandCover::railways},  {12300, LandCover::port},   {12400, LandCover::airports},
    {13100, LandCover::extraction}, {13300, LandCover::no_use}, {13400, LandCover::no_use},
    {14100, LandCover::green},     {14200, LandCover::open_spaces}, {21000, LandCover::green},
    {22000, LandCover::green},     {23000, LandCover::green},  {24000, LandCover::green},
    {25000, LandCover::green},     {31000, LandCover::green},  {32000, LandCover::green},
    {33000, LandCover::open_spaces}, {40000, LandCover::water}, {50000, LandCover::water},
}};

// Portable uniform draws: the standard distributions are implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double symmetric() { return 2.0 * uniform() - 1.0; }
  bool chance(double p) { return uniform() < p; }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

private:
  std::mt19937_64 engine_;
};

double season(const CivilDate& d, double phase_days) {
  return std::sin(2.0 * std::numbers::pi * (day_of_year(d) + phase_days) / 365.0);
}

// Rounded to keep the text files readable; the value written is the value used.
double round_to(double v, double step) { return std::round(v / step) * step; }

ProjectedPoint station_position(std::size_t i) {
  const double fx = std::fmod(0.27 + 0.31 * static_cast<double>(i), 0.7);
  const double fy = std::fmod(0.33 + 0.23 * static_cast<double>(i), 0.7);
  return {kXll + 1500.0 + fx * 7000.0, kYll + 1500.0 + fy * 7000.0};
}

PollutantSet station_pollutants(std::size_t i, std::size_t n) {
  PollutantSet set;
  if (i == 0 || n == 1) {
    for (auto p : kAllPollutants) set.insert(p);
    return set;
  }
  switch (i % 3) {
    case 1: set.insert(Pollutant::PM10); set.insert(Pollutant::PM25); set.insert(Pollutant::NO2); break;
    case 2: set.insert(Pollutant::NO2); set.insert(Pollutant::O3); set.insert(Pollutant::SO2); break;
    default: set.insert(Pollutant::PM10); set.insert(Pollutant::O3); break;
  }
  return set;
}

RasterGrid make_dem() {
  const std::size_t n = 100;
  const double cs = kExtent / static_cast<double>(n);
  std::vector<double> cells(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double x = (static_cast<double>(c) + 0.5) * cs;
      const double y = (static_cast<double>(n - r) - 0.5) * cs;
      const double dx = x - 6000.0, dy = y - 4000.0;
      double alt = 110.0 + 0.004 * x + 0.002 * y + 15.0 * std::exp(-(dx * dx + dy * dy) / (2.0 * 1500.0 * 1500.0));
      alt = round_to(alt, 0.01);
      // A nodata patch in the north-east corner.
      if (r < 5 && c >= 90) alt = -9999.0;
      cells[r * n + c] = alt;
    }
  }
  return RasterGrid(n, n, kXll, kYll, cs, -9999.0, std::move(cells));
}

RasterGrid make_landcover(Rng& rng) {
  const std::size_t n = 100;
  const std::size_t block = 5;
  const std::size_t nb = n / block;
  std::vector<long long> block_class(nb * nb);
  for (auto& code : block_class) {
    // Urban-heavy mix: about half of the blocks draw from the urban codes.
    const std::size_t k = rng.chance(0.5) ? rng.index(7) : rng.index(kClassCodes.size());
    code = kClassCodes[k].first;
  }
  std::vector<double> cells(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      cells[r * n + c] = static_cast<double>(block_class[(r / block) * nb + c / block]);
    }
  }
  return RasterGrid(n, n, kXll, kYll, kExtent / static_cast<double>(n), -9999.0, std::move(cells));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

} // namespace

FixturePaths generate_fixture(const FixtureSpec& spec, const std::filesystem::path& directory) {
  if (spec.n_stations == 0 || spec.n_days < 2) throw ConfigError("fixture needs >= 1 station and >= 2 days");
  std::filesystem::create_directories(directory);
  Rng rng(spec.seed);
  const std::size_t n_days = spec.n_days;
  const CivilDate start = spec.start;
  const CivilDate end = start.plus_days(static_cast<std::int64_t>(n_days) - 1);

  FixturePaths paths;
  paths.root = directory;
  paths.stations = directory / "stations.csv";
  paths.pollution = directory / "pollution.csv";
  paths.weather = directory / "weather.csv";
  paths.satellite_csv = directory / "satellite.csv";
  paths.dem = directory / "dem.asc";
  paths.landcover = directory / "landcover.asc";
  paths.classmap = directory / "classmap.csv";
  paths.config = directory / "config.json";

  // Stations.
  std::vector<Station> stations;
  for (std::size_t i = 0; i < spec.n_stations; ++i) {
    Station st;
    st.id = "ST" + std::to_string(i + 1);
    st.projected = station_position(i);
    st.lon = round_to(9.19 + (st.projected->x - kXll - 5000.0) / 78000.0, 1e-6);
    st.lat = round_to(45.46 + (st.projected->y - kYll - 5000.0) / 111000.0, 1e-6);
    st.measured = station_pollutants(i, spec.n_stations);
    stations.push_back(std::move(st));
  }
  write_stations(stations, paths.stations);

  // Static layers.
  save_grid(make_dem(), paths.dem);
  save_grid(make_landcover(rng), paths.landcover);
  std::map<long long, LandCover> mapping(kClassCodes.begin(), kClassCodes.end());
  save_classmap(LandCoverMap(mapping), paths.classmap);

  // Weather.
  WeatherTable weather;
  for (auto& s : weather) s = DailySeries::missing(start, n_days);
  for (std::size_t i = 0; i < n_days; ++i) {
    const CivilDate d = start.plus_days(static_cast<std::int64_t>(i));
    const double seasonal = season(d, -110.0);
    // Day-to-day variation dominates the seasonal cycle so that the planted interaction
    // is not just a proxy for the time of year.
    const double temp = round_to(13.0 + 4.0 * seasonal + 6.0 * rng.symmetric(), 0.1);
    const std::array<double, kWeatherVariableCount> v{
        temp,
        round_to(temp - 4.0 - 2.0 * rng.uniform(), 0.1),
        round_to(72.0 + 20.0 * rng.symmetric(), 0.1),
        round_to(std::max(0.0, 12.0 * rng.uniform() - 8.0), 0.1),
        round_to(0.5 + 6.0 * rng.uniform(), 0.1),
        round_to(359.0 * rng.uniform(), 1.0),
        round_to(1015.0 + 10.0 * rng.symmetric(), 0.1),
        round_to(100.0 * rng.uniform(), 1.0),
        round_to(std::max(5.0, 180.0 + 120.0 * seasonal + 60.0 * rng.symmetric()), 0.1),
    };
    for (std::size_t k = 0; k < kWeatherVariableCount; ++k) weather[k][i] = Measurement{v[k], Quality::observed};
  }
  write_weather(weather, paths.weather);

  // Satellite, either sampled per station or extracted from generated rasters.
  auto keep_day = [&](std::size_t i) { return i == 0 || i + 1 == n_days || !rng.chance(spec.satellite_missing_rate); };
  SatelliteTable satellite;
  if (spec.satellite_rasters) {
    paths.satellite_rasters = directory / "satellite";
    const std::size_t n = 20;
    const double cs = kExtent / static_cast<double>(n);
    std::map<CivilDate, DailyBandGrids> rasters;
    for (std::size_t i = 0; i < n_days; ++i) {
      const CivilDate d = start.plus_days(static_cast<std::int64_t>(i));
      for (std::size_t b = 0; b < kSatelliteBandCount; ++b) {
        const auto& shape = kBands[b];
        const double level = shape.base + shape.amplitude * (0.4 * season(d, shape.phase_days) + 0.8 * rng.symmetric());
        std::vector<double> cells(n * n);
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t c = 0; c < n; ++c) {
            const double gx = (static_cast<double>(c) + 0.5) / static_cast<double>(n) - 0.5;
            cells[r * n + c] = round_to(level + shape.amplitude * (0.6 * gx + 0.2 * rng.symmetric()), 1e-4);
          }
        }
        if (!keep_day(i)) continue;
        RasterGrid grid(n, n, kXll, kYll, cs, -9999.0, std::move(cells));
        save_grid(grid, *paths.satellite_rasters / (std::string(kSatelliteBands[b]) + "_" + d.to_string() + ".asc"));
        rasters[d][b] = std::move(grid);
      }
    }
    satellite = extract_satellite(rasters, stations, start, end);
  } else {
    for (std::size_t s = 0; s < stations.size(); ++s) {
      auto& bands = satellite[stations[s].id];
      const double offset = 0.3 * static_cast<double>(s % 3) - 0.3;
      for (std::size_t b = 0; b < kSatelliteBandCount; ++b) {
        const auto& shape = kBands[b];
        bands[b] = DailySeries::missing(start, n_days);
        for (std::size_t i = 0; i < n_days; ++i) {
          const CivilDate d = start.plus_days(static_cast<std::int64_t>(i));
          const double v = shape.base + shape.amplitude * (0.4 * season(d, shape.phase_days) + offset + rng.symmetric());
          if (keep_day(i)) bands[b][i] = Measurement{round_to(v, 1e-4), Quality::observed};
        }
      }
    }
  }
  write_satellite_csv(satellite, paths.satellite_csv);

  // Planted targets, computed from the gap-filled satellite series the pipeline sees.
  std::map<std::string, SatelliteSeries> filled;
  for (const auto& [id, bands] : satellite) {
    for (std::size_t b = 0; b < kSatelliteBandCount; ++b) filled[id][b] = interpolate_gaps(bands[b]);
  }
  std::vector<double> temps;
  for (std::size_t i = 0; i < n_days; ++i) temps.push_back(weather[0][i]->value);
  const double temp_median = median(temps);
  std::array<double, kSatelliteBandCount> band_median{};
  for (std::size_t b = 0; b < kSatelliteBandCount; ++b) {
    std::vector<double> values;
    for (const auto& [id, bands] : filled) {
      for (std::size_t i = 0; i < n_days; ++i) values.push_back(bands[b][i]->value);
    }
    band_median[b] = median(values);
  }

  PollutionTable pollution;
  for (const auto& st : stations) {
    auto& per = pollution[st.id];
    const auto& bands = filled.at(st.id);
    for (auto p : st.measured.members()) {
      const std::size_t b = kDrivingBand[index_of(p)];
      const auto& shape = kBands[b];
      DailySeries series = DailySeries::missing(start, n_days);
      for (std::size_t i = 0; i < n_days; ++i) {
        const double sat = bands[b][i == 0 ? 0 : i - 1]->value;
        const double temp = weather[0][i]->value;
        double y = 0.0;
        if (spec.target == PlantedTarget::linear) {
          y = 30.0 + 10.0 * (sat - shape.base) / shape.amplitude + 0.8 * temp;
        } else {
          const bool high = sat > band_median[b] && temp > temp_median;
          y = 30.0 + (high ? 25.0 : 0.0);
        }
        y += spec.noise * rng.symmetric();
        if (rng.chance(spec.pollution_missing_rate)) continue;
        series[i] = Measurement{y, Quality::observed};
      }
      per[index_of(p)] = std::move(series);
    }
  }
  write_pollution(pollution, paths.pollution);

  nlohmann::json config;
  config["stations"] = "stations.csv";
  config["pollution"] = "pollution.csv";
  config["weather"] = "weather.csv";
  if (paths.satellite_rasters) {
    config["satellite_rasters"] = "satellite";
  } else {
    config["satellite_csv"] = "satellite.csv";
  }
  config["dem"] = "dem.asc";
  config["landcover"] = "landcover.asc";
  config["classmap"] = "classmap.csv";
  config["output_dir"] = "out";
  config["pollutants"] = {"PM10", "PM25", "NO2", "SO2", "O3"};
  config["models"] = {"OLS", "SGD", "GBT"};
  config["windows"] = {1, 7, 14};
  config["seed"] = spec.seed;
  auto out = csv::open_output(paths.config);
  out << config.dump(2) << '\n';
  return paths;
}

} // namespace aqcast
