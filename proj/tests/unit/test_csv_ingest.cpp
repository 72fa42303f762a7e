#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "aqcast/csv.hpp"
#include "aqcast/errors.hpp"
#include "aqcast/fixtures.hpp"
#include "aqcast/ingest.hpp"
#include "aqcast/log.hpp"
#include "raster_oracles.hpp"
#include "test_util.hpp"

using namespace aqcast;

namespace {

const char* kStations = "station_id,lon,lat,pollutants,x,y\nST1,9.1,45.4,PM10;NO2,1000,1000\nST2,9.2,45.5,NO2,1800,1300\n";

std::string weather_rows(CivilDate from, int n, CivilDate skip = CivilDate{1, 1, 1}) {
  std::string out = "date,temp,dewpoint,humidity,precip,wind_speed,wind_dir_deg,pressure,cloud_cover,solar_rad\n";
  for (int i = 0; i < n; ++i) {
    const auto d = from.plus_days(i);
    if (d == skip) continue;
    out += d.to_string() + ",10,5,70,0,3,180,1013,50,100\n";
  }
  return out;
}

} // namespace

TEST_CASE("csv helpers") {
  CHECK(csv::split_line("a,\"b,c\",,\"d\"\"e\"") == std::vector<std::string>{"a", "b,c", "", "d\"e"});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 30) - 15);
    CHECK(csv::parse_double(csv::format_double(v)) == v);
  }
  CHECK_FALSE(csv::parse_double("12x").has_value());
  CHECK_FALSE(csv::parse_double("").has_value());
}

TEST_CASE("pollution reader") {
  const auto dir = scratch_dir("pollution");
  write_file(dir / "stations.csv", kStations);
  const auto stations = read_stations(dir / "stations.csv");
  REQUIRE(stations.size() == 2);
  CHECK(stations[1].projected == ProjectedPoint{1800, 1300});
  CHECK(stations[0].measured.contains(Pollutant::PM10));

  write_file(dir / "p.csv", "station_id,date,pollutant,value\nST1,2019-03-02,PM10,41.0\nST1,2019-03-04,PM10,40\n"
                            "ST2,2019-03-02,NO2,\n");
  const auto t = read_pollution(dir / "p.csv", stations);
  const auto& s = *t.at("ST1")[index_of(Pollutant::PM10)];
  CHECK(s.value_at(CivilDate{2019, 3, 2}) == 41.0);
  CHECK_FALSE(s.at(CivilDate{2019, 3, 3}).has_value());
  CHECK(s.size() == 3);

  write_file(dir / "bad.csv", "station_id,date,pollutant,value\nST1,2019-03-02,CO2,41.0\n");
  CHECK_THROWS_AS(read_pollution(dir / "bad.csv", stations), UnknownPollutant);
  write_file(dir / "ghost.csv", "station_id,date,pollutant,value\nXX,2019-03-02,PM10,41.0\n");
  CHECK_THROWS_AS(read_pollution(dir / "ghost.csv", stations), UnknownStation);
  write_file(dir / "num.csv", "station_id,date,pollutant,value\nST1,2019-03-02,PM10,4x\n");
  try {
    read_pollution(dir / "num.csv", stations);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 4);
  }

  SUBCASE("duplicate rows: last wins with a warning") {
    std::vector<std::string> warnings;
    auto prev = log::set_sink([&](log::Level l, const std::string& m) {
      if (l == log::Level::warning) warnings.push_back(m);
    });
    write_file(dir / "dup.csv", "station_id,date,pollutant,value\nST1,2019-03-02,PM10,1\nST1,2019-03-02,PM10,2\n");
    const auto d = read_pollution(dir / "dup.csv", stations);
    log::set_sink(prev);
    CHECK(d.at("ST1")[index_of(Pollutant::PM10)]->value_at(CivilDate{2019, 3, 2}) == 2.0);
    CHECK(warnings.size() == 1);
  }
}

TEST_CASE("weather reader") {
  const auto dir = scratch_dir("weather");
  write_file(dir / "w.csv", weather_rows(CivilDate{2020, 2, 27}, 5));
  const auto w = read_weather(dir / "w.csv");
  CHECK(w.size() == 9);
  for (const auto& s : w) {
    CHECK(s.size() == 5);
    CHECK(s.count_missing() == 0);
  }
  write_file(dir / "gap.csv", weather_rows(CivilDate{2020, 2, 27}, 5, CivilDate{2020, 2, 29}));
  try {
    read_weather(dir / "gap.csv");
    FAIL("expected GapError");
  } catch (const GapError& e) {
    CHECK(std::string(e.what()).find("2020-02-29") != std::string::npos);
  }
  auto text = weather_rows(CivilDate{2020, 1, 1}, 2);
  text.replace(text.rfind(",180,"), 5, ",400,");
  write_file(dir / "dir.csv", text);
  try {
    read_weather(dir / "dir.csv");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("direction outside [0,360]") != std::string::npos);
  }
}

TEST_CASE("satellite extraction from rasters") {
  const auto dir = scratch_dir("satellite");
  write_file(dir / "stations.csv", kStations);
  const auto stations = read_stations(dir / "stations.csv");
  const CivilDate day{2021, 6, 1};

  std::map<CivilDate, DailyBandGrids> rasters;
  rasters[day][0] = RasterGrid(10, 10, 0, 0, 250, -9999, std::vector<double>(100, 7.0));
  std::vector<double> gradient(100);
  for (std::size_t i = 0; i < 100; ++i) gradient[i] = static_cast<double>(i % 10) * 1.5 + static_cast<double>(i / 10) * 0.25;
  rasters[day][5] = RasterGrid(10, 10, 0, 0, 250, -9999, gradient);

  const auto table = extract_satellite(rasters, stations, day, day.next());
  for (const auto& st : stations) {
    const auto& bands = table.at(st.id);
    CHECK(bands[0].value_at(day) == 7.0);
    CHECK(bands[5].value_at(day) == oracle::radius_mean(*rasters[day][5], st.projected->x, st.projected->y, 500.0));
    CHECK_FALSE(bands[1].value_at(day).has_value());
    for (const auto& b : bands) CHECK_FALSE(b.value_at(day.next()).has_value());
  }
}

TEST_CASE("fixture round trip through the writers") {
  const auto dir = scratch_dir("roundtrip");
  FixtureSpec spec;
  spec.satellite_rasters = true;
  const auto paths = generate_fixture(spec, dir / "fx");
  const auto stations = read_stations(paths.stations);
  const auto pollution = read_pollution(paths.pollution, stations);
  const auto satellite = read_satellite_csv(paths.satellite_csv, stations);
  const auto weather = read_weather(paths.weather);

  write_stations(stations, dir / "out/stations.csv");
  write_pollution(pollution, dir / "out/pollution.csv");
  write_satellite_csv(satellite, dir / "out/satellite.csv");
  write_weather(weather, dir / "out/weather.csv");
  const auto stations2 = read_stations(dir / "out/stations.csv");
  CHECK(stations2 == stations);
  CHECK(read_pollution(dir / "out/pollution.csv", stations2) == pollution);
  CHECK(read_satellite_csv(dir / "out/satellite.csv", stations2) == satellite);
  CHECK(read_weather(dir / "out/weather.csv") == weather);

  // The raster path and the pre-extracted csv give the same table.
  const SatelliteRasterIndex index(*paths.satellite_rasters);
  CHECK(extract_satellite(index, stations, *index.first(), *index.last()) == satellite);

  const StaticLayers layers{load_grid(paths.dem), load_grid(paths.landcover), load_classmap(paths.classmap)};
  const auto ds = assemble_dataset(stations, pollution, satellite, weather, compute_topo(layers, stations));
  CHECK(ds.n_days() == 120);
  CHECK(ds.weather.size() == 9);
  CHECK(ds.satellite[0].size() == 6);
}

TEST_CASE("missingness fractions") {
  StationDataset ds;
  ds.start = CivilDate{2020, 1, 1};
  ds.end = CivilDate{2020, 1, 3};
  Station a{"A", 0, 0, {}, std::nullopt}, b{"B", 0, 0, {}, std::nullopt}, c{"C", 0, 0, {}, std::nullopt};
  a.measured.insert(Pollutant::NO2);
  b.measured.insert(Pollutant::NO2);
  c.measured.insert(Pollutant::O3);
  ds.stations = {a, b, c};
  ds.pollution.resize(3);
  // Day 0: both report; day 1: one missing; day 2: both missing.
  ds.pollution[0][index_of(Pollutant::NO2)] = DailySeries(ds.start, {Measurement{1}, Measurement{1}, std::nullopt});
  ds.pollution[1][index_of(Pollutant::NO2)] = DailySeries(ds.start, {Measurement{1}, std::nullopt, std::nullopt});
  ds.pollution[2][index_of(Pollutant::O3)] = DailySeries(ds.start, {Measurement{1}, Measurement{1}, Measurement{1}});
  const auto r = missingness_report(ds);
  CHECK(r.n_expected[index_of(Pollutant::NO2)] == 2);
  CHECK(r.fraction_missing[index_of(Pollutant::NO2)] == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(r.n_expected[index_of(Pollutant::O3)] == 1);
  CHECK(r.fraction_missing[index_of(Pollutant::O3)] == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(r.fraction_missing[index_of(Pollutant::PM10)].empty());

  const auto dir = scratch_dir("missingness");
  write_missingness_csv(r, dir / "m.csv");
  CHECK(read_file(dir / "m.csv").find("NO2,2020-01-02,0.5,2\n") != std::string::npos);
}
