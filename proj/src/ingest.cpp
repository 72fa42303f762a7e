#include "aqcast/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "aqcast/csv.hpp"
#include "aqcast/errors.hpp"
#include "aqcast/log.hpp"

namespace aqcast {

std::optional<std::size_t> StationDataset::station_index(std::string_view id) const noexcept {
  for (std::size_t i = 0; i < stations.size(); ++i) {
    if (stations[i].id == id) return i;
  }
  return std::nullopt;
}

std::vector<int> StationDataset::years() const {
  std::vector<int> out;
  for (int y = start.year; y <= end.year; ++y) out.push_back(y);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Station> read_stations(const std::filesystem::path& path) {
  csv::Reader reader(path);
  reader.expect_header({"station_id", "lon", "lat", "pollutants"}, {"x", "y"});
  const auto x_col = reader.column("x");
  const auto y_col = reader.column("y");
  if (x_col.has_value() != y_col.has_value()) {
    throw SchemaError(reader.file(), 1, 0, "columns x and y must appear together");
  }

  std::vector<Station> out;
  std::set<std::string> seen;
  std::vector<std::string> row;
  while (reader.next(row)) {
    Station st;
    st.id = row[0];
    if (st.id.empty()) reader.fail(0, "empty station id");
    if (!seen.insert(st.id).second) reader.fail(0, "duplicate station id '" + st.id + "'");
    st.lon = reader.parse_double(row, 1);
    st.lat = reader.parse_double(row, 2);
    if (!(st.lon >= -180.0 && st.lon <= 180.0)) reader.fail(1, "longitude outside [-180,180]");
    if (!(st.lat >= -90.0 && st.lat <= 90.0)) reader.fail(2, "latitude outside [-90,90]");
    std::istringstream list(row[3]);
    std::string name;
    while (std::getline(list, name, ';')) {
      if (name.empty()) continue;
      auto p = try_parse_pollutant(name);
      if (!p) reader.fail(3, "unknown pollutant '" + name + "'");
      st.measured.insert(*p);
    }
    if (st.measured.empty()) reader.fail(3, "station measures no pollutant");
    if (x_col) {
      auto x = reader.parse_optional_double(row, *x_col);
      auto y = reader.parse_optional_double(row, *y_col);
      if (x.has_value() != y.has_value()) reader.fail(*x_col, "x and y must both be set or both empty");
      if (x) st.projected = ProjectedPoint{*x, *y};
    }
    out.push_back(std::move(st));
  }
  return out;
}

void write_stations(const std::vector<Station>& stations, const std::filesystem::path& path) {
  const bool with_xy = std::any_of(stations.begin(), stations.end(),
                                   [](const Station& s) { return s.projected.has_value(); });
  auto out = csv::open_output(path);
  out << "station_id,lon,lat,pollutants" << (with_xy ? ",x,y" : "") << '\n';
  for (const auto& st : stations) {
    out << st.id << ',' << csv::format_double(st.lon) << ',' << csv::format_double(st.lat) << ',';
    bool first = true;
    for (auto p : st.measured.members()) {
      out << (first ? "" : ";") << to_string(p);
      first = false;
    }
    if (with_xy) {
      out << ',';
      if (st.projected) {
        out << csv::format_double(st.projected->x) << ',' << csv::format_double(st.projected->y);
      } else {
        out << ',';
      }
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

struct DateRange {
  std::optional<CivilDate> first;
  std::optional<CivilDate> last;
  void include(const CivilDate& d) {
    if (!first || d < *first) first = d;
    if (!last || *last < d) last = d;
  }
  std::size_t length() const { return static_cast<std::size_t>(days_between(*first, *last) + 1); }
};

CivilDate parse_date_field(const csv::Reader& reader, const std::vector<std::string>& row,
                           std::size_t index) {
  auto d = CivilDate::try_parse(row[index]);
  if (!d) reader.fail(index, "invalid ISO-8601 date '" + row[index] + "'");
  return *d;
}

} // namespace

PollutionTable read_pollution(const std::filesystem::path& path, const std::vector<Station>& stations) {
  csv::Reader reader(path);
  reader.expect_header({"station_id", "date", "pollutant", "value"});

  std::map<std::string, const Station*> by_id;
  for (const auto& st : stations) by_id.emplace(st.id, &st);

  struct Row {
    std::string station;
    CivilDate date;
    Pollutant pollutant;
    std::optional<double> value;
    std::size_t line;
  };
  std::vector<Row> rows;
  DateRange range;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    auto it = by_id.find(fields[0]);
    if (it == by_id.end()) {
      throw UnknownStation(reader.file() + ":" + std::to_string(reader.line()) +
                           ": unknown station id '" + fields[0] + "'");
    }
    const CivilDate date = parse_date_field(reader, fields, 1);
    auto p = try_parse_pollutant(fields[2]);
    if (!p) {
      throw UnknownPollutant(reader.file() + ":" + std::to_string(reader.line()) +
                             ": unknown pollutant '" + fields[2] +
                             "'; valid pollutants are {PM10, PM25, NO2, SO2, O3}");
    }
    auto value = reader.parse_optional_double(fields, 3);
    range.include(date);
    if (!it->second->measured.contains(*p)) {
      log::warn(reader.file() + ":" + std::to_string(reader.line()) + ": station " + fields[0] +
                " does not measure " + std::string(to_string(*p)) + "; row ignored");
      continue;
    }
    rows.push_back({fields[0], date, *p, value, reader.line()});
  }

  PollutionTable table;
  if (!range.first) return table;
  for (const auto& st : stations) {
    auto& per = table[st.id];
    for (auto p : st.measured.members()) {
      per[index_of(p)] = DailySeries::missing(*range.first, range.length());
    }
  }
  std::set<std::tuple<std::string, std::int64_t, std::size_t>> seen;
  for (const auto& row : rows) {
    if (!seen.emplace(row.station, row.date.to_days(), index_of(row.pollutant)).second) {
      log::warn(reader.file() + ":" + std::to_string(row.line) + ": duplicate reading for " +
                row.station + " " + row.date.to_string() + " " +
                std::string(to_string(row.pollutant)) + "; keeping the later row");
    }
    Reading r;
    if (row.value) r = Measurement{*row.value, Quality::observed};
    table[row.station][index_of(row.pollutant)]->set(row.date, r);
  }
  return table;
}

void write_pollution(const PollutionTable& table, const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  out << "station_id,date,pollutant,value\n";
  for (const auto& [id, per] : table) {
    for (auto p : kAllPollutants) {
      const auto& s = per[index_of(p)];
      if (!s) continue;
      for (std::size_t i = 0; i < s->size(); ++i) {
        out << id << ',' << s->date_at(i).to_string() << ',' << to_string(p) << ',';
        if ((*s)[i]) out << csv::format_double((*s)[i]->value);
        out << '\n';
      }
    }
  }
}

// ---------------------------------------------------------------------------

SatelliteTable read_satellite_csv(const std::filesystem::path& path, const std::vector<Station>& stations) {
  csv::Reader reader(path);
  std::vector<std::string> header{"station_id", "date"};
  for (auto b : kSatelliteBands) header.emplace_back(b);
  reader.expect_header(header);

  struct Row {
    std::string station;
    CivilDate date;
    std::array<std::optional<double>, kSatelliteBandCount> bands;
  };
  std::vector<Row> rows;
  DateRange range;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    Row row{fields[0], parse_date_field(reader, fields, 1), {}};
    for (std::size_t b = 0; b < kSatelliteBandCount; ++b) {
      row.bands[b] = reader.parse_optional_double(fields, 2 + b);
    }
    range.include(row.date);
    rows.push_back(std::move(row));
  }

  SatelliteTable table;
  if (!range.first) return table;
  auto ensure = [&](const std::string& id) -> SatelliteSeries& {
    auto [it, inserted] = table.try_emplace(id);
    if (inserted) {
      for (auto& s : it->second) s = DailySeries::missing(*range.first, range.length());
    }
    return it->second;
  };
  for (const auto& st : stations) ensure(st.id);
  for (const auto& row : rows) {
    auto& bands = ensure(row.station);
    for (std::size_t b = 0; b < kSatelliteBandCount; ++b) {
      Reading r;
      if (row.bands[b]) r = Measurement{*row.bands[b], Quality::observed};
      bands[b].set(row.date, r);
    }
  }
  return table;
}

void write_satellite_csv(const SatelliteTable& table, const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  out << "station_id,date";
  for (auto b : kSatelliteBands) out << ',' << b;
  out << '\n';
  for (const auto& [id, bands] : table) {
    const auto& first = bands[0];
    for (std::size_t i = 0; i < first.size(); ++i) {
      const CivilDate d = first.date_at(i);
      out << id << ',' << d.to_string();
      for (const auto& band : bands) {
        out << ',';
        if (auto v = band.value_at(d)) out << csv::format_double(*v);
      }
      out << '\n';
    }
  }
}

// ---------------------------------------------------------------------------

WeatherTable read_weather(const std::filesystem::path& path) {
  csv::Reader reader(path);
  std::vector<std::string> header{"date"};
  for (auto v : kWeatherVariables) header.emplace_back(v);
  reader.expect_header(header);

  std::map<CivilDate, std::array<double, kWeatherVariableCount>> rows;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    const CivilDate date = parse_date_field(reader, fields, 0);
    std::array<double, kWeatherVariableCount> values{};
    for (std::size_t k = 0; k < kWeatherVariableCount; ++k) {
      if (fields[k + 1].empty()) {
        reader.fail(k + 1, "missing " + std::string(kWeatherVariables[k]) + " value");
      }
      values[k] = reader.parse_double(fields, k + 1);
    }
    const double dir = values[kWindDirIndex];
    if (!(dir >= 0.0 && dir <= 360.0)) reader.fail(kWindDirIndex + 1, "direction outside [0,360]");
    if (!rows.emplace(date, values).second) reader.fail(0, "duplicate date " + date.to_string());
  }
  if (rows.empty()) throw SchemaError(reader.file(), reader.line(), 0, "no weather rows");

  const CivilDate first = rows.begin()->first;
  const CivilDate last = rows.rbegin()->first;
  const auto length = static_cast<std::size_t>(days_between(first, last) + 1);
  if (rows.size() != length) {
    for (CivilDate d = first; d <= last; d = d.next()) {
      if (!rows.count(d)) throw GapError("weather has no row for " + d.to_string());
    }
  }
  WeatherTable table;
  for (auto& s : table) s = DailySeries::missing(first, length);
  std::size_t i = 0;
  for (const auto& [date, values] : rows) {
    for (std::size_t k = 0; k < kWeatherVariableCount; ++k) {
      table[k][i] = Measurement{values[k], Quality::observed};
    }
    ++i;
  }
  return table;
}

void write_weather(const WeatherTable& table, const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  out << "date";
  for (auto v : kWeatherVariables) out << ',' << v;
  out << '\n';
  for (std::size_t i = 0; i < table[0].size(); ++i) {
    const CivilDate d = table[0].date_at(i);
    out << d.to_string();
    for (const auto& s : table) {
      out << ',';
      if (auto v = s.value_at(d)) out << csv::format_double(*v);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

ProjectedPoint require_projected(const Station& st) {
  if (!st.projected) {
    throw DomainError("station " + st.id + " has no projected x/y coordinates for raster extraction");
  }
  return *st.projected;
}

std::vector<ProjectedPoint> station_points(const std::vector<Station>& stations) {
  std::vector<ProjectedPoint> out;
  out.reserve(stations.size());
  for (const auto& st : stations) out.push_back(require_projected(st));
  return out;
}

SatelliteTable to_table(const std::vector<Station>& stations, std::vector<SatelliteSeries> series) {
  SatelliteTable table;
  for (std::size_t i = 0; i < stations.size(); ++i) table[stations[i].id] = std::move(series[i]);
  return table;
}

std::vector<SatelliteSeries> empty_series(std::size_t n_points, CivilDate start, CivilDate end) {
  if (end < start) throw DomainError("empty satellite range");
  const auto len = static_cast<std::size_t>(days_between(start, end) + 1);
  std::vector<SatelliteSeries> out(n_points);
  for (auto& bands : out) {
    for (auto& s : bands) s = DailySeries::missing(start, len);
  }
  return out;
}

void extract_into(std::vector<SatelliteSeries>& out, const std::vector<ProjectedPoint>& points,
                  const RasterGrid& grid, const CivilDate& date, std::size_t band) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (auto v = radius_mean(grid, points[i].x, points[i].y, kSatelliteRadius)) {
      out[i][band].set(date, Measurement{*v, Quality::observed});
    }
  }
}

} // namespace

SatelliteTable extract_satellite(const std::map<CivilDate, DailyBandGrids>& rasters,
                                 const std::vector<Station>& stations, CivilDate start, CivilDate end) {
  const auto points = station_points(stations);
  auto series = empty_series(points.size(), start, end);
  for (const auto& [date, grids] : rasters) {
    if (date < start || end < date) continue;
    for (std::size_t b = 0; b < kSatelliteBandCount; ++b) {
      if (grids[b]) extract_into(series, points, *grids[b], date, b);
    }
  }
  return to_table(stations, std::move(series));
}

SatelliteRasterIndex::SatelliteRasterIndex(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory)) {
    throw IoError("satellite raster directory " + directory.string() + " does not exist");
  }
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".asc") continue;
    const std::string stem = entry.path().stem().string();
    const auto sep = stem.rfind('_');
    if (sep == std::string::npos) continue;
    auto date = CivilDate::try_parse(std::string_view(stem).substr(sep + 1));
    if (!date) continue;
    const std::string band = stem.substr(0, sep);
    auto it = std::find(kSatelliteBands.begin(), kSatelliteBands.end(), band);
    if (it == kSatelliteBands.end()) {
      log::warn("ignoring raster with unknown band '" + band + "': " + entry.path().string());
      continue;
    }
    files_[*date][static_cast<std::size_t>(it - kSatelliteBands.begin())] = entry.path();
  }
}

std::optional<CivilDate> SatelliteRasterIndex::first() const noexcept {
  if (files_.empty()) return std::nullopt;
  return files_.begin()->first;
}

std::optional<CivilDate> SatelliteRasterIndex::last() const noexcept {
  if (files_.empty()) return std::nullopt;
  return files_.rbegin()->first;
}

std::vector<SatelliteSeries> SatelliteRasterIndex::extract(const std::vector<ProjectedPoint>& points,
                                                           CivilDate start, CivilDate end) const {
  auto series = empty_series(points.size(), start, end);
  for (auto it = files_.lower_bound(start); it != files_.end() && !(end < it->first); ++it) {
    for (std::size_t b = 0; b < kSatelliteBandCount; ++b) {
      if (!it->second[b]) continue;
      const RasterGrid grid = load_grid(*it->second[b]);
      extract_into(series, points, grid, it->first, b);
    }
  }
  return series;
}

SatelliteTable extract_satellite(const SatelliteRasterIndex& rasters,
                                 const std::vector<Station>& stations, CivilDate start, CivilDate end) {
  return to_table(stations, rasters.extract(station_points(stations), start, end));
}

// ---------------------------------------------------------------------------

std::vector<TopoProfile> compute_topo(const StaticLayers& layers, const std::vector<Station>& stations) {
  std::vector<TopoProfile> out;
  out.reserve(stations.size());
  for (const auto& st : stations) {
    const auto pt = require_projected(st);
    out.push_back(topo_profile(layers.dem, layers.landcover, layers.classmap, pt.x, pt.y));
  }
  return out;
}

StationDataset assemble_dataset(std::vector<Station> stations, const std::optional<PollutionTable>& pollution,
                                const SatelliteTable& satellite, const WeatherTable& weather,
                                std::vector<TopoProfile> topo) {
  if (topo.size() != stations.size()) {
    throw DimensionMismatch("topography profiles (" + std::to_string(topo.size()) +
                            ") do not match stations (" + std::to_string(stations.size()) + ")");
  }
  if (weather[0].empty()) throw DomainError("weather table is empty");

  std::optional<CivilDate> sat_first, sat_last;
  for (const auto& st : stations) {
    auto it = satellite.find(st.id);
    if (it == satellite.end() || it->second[0].empty()) continue;
    const auto& s = it->second[0];
    if (!sat_first || s.start() < *sat_first) sat_first = s.start();
    if (!sat_last || *sat_last < s.end()) sat_last = s.end();
  }
  if (!sat_first) throw DomainError("no satellite data for any station");

  CivilDate start = std::max(*sat_first, weather[0].start());
  CivilDate end = std::min(sat_last->next(), weather[0].end());
  if (pollution) {
    std::optional<CivilDate> pol_first, pol_last;
    for (const auto& [id, per] : *pollution) {
      for (const auto& s : per) {
        if (!s || s->empty()) continue;
        if (!pol_first || s->start() < *pol_first) pol_first = s->start();
        if (!pol_last || *pol_last < s->end()) pol_last = s->end();
      }
    }
    if (!pol_first) throw DomainError("no pollution readings");
    start = std::max(start, *pol_first);
    end = std::min(end, *pol_last);
  }
  if (end < start) {
    throw DomainError("sources do not overlap in time (common range would be " + start.to_string() +
                      ".." + end.to_string() + ")");
  }

  StationDataset ds;
  ds.start = start;
  ds.end = end;
  for (std::size_t k = 0; k < kWeatherVariableCount; ++k) ds.weather[k] = weather[k].clipped(start, end);
  for (const auto& st : stations) {
    PollutantSeries per;
    if (pollution) {
      auto it = pollution->find(st.id);
      for (auto p : st.measured.members()) {
        if (it != pollution->end() && it->second[index_of(p)]) {
          per[index_of(p)] = it->second[index_of(p)]->clipped(start, end);
        } else {
          per[index_of(p)] = DailySeries::missing(start, ds.n_days());
        }
      }
    }
    ds.pollution.push_back(std::move(per));

    SatelliteSeries bands;
    auto it = satellite.find(st.id);
    for (std::size_t b = 0; b < kSatelliteBandCount; ++b) {
      bands[b] = it == satellite.end() ? DailySeries::missing(start, ds.n_days())
                                       : it->second[b].clipped(start, end);
    }
    ds.satellite.push_back(std::move(bands));
  }
  ds.stations = std::move(stations);
  ds.topo = std::move(topo);
  return ds;
}

// ---------------------------------------------------------------------------

MissingnessReport missingness_report(const StationDataset& dataset) {
  MissingnessReport report;
  report.start = dataset.start;
  const std::size_t days = dataset.n_days();
  for (auto p : kAllPollutants) {
    const auto k = index_of(p);
    std::vector<std::size_t> missing(days, 0);
    for (std::size_t s = 0; s < dataset.stations.size(); ++s) {
      if (!dataset.stations[s].measured.contains(p)) continue;
      ++report.n_expected[k];
      const auto& series = dataset.pollution[s][k];
      for (std::size_t i = 0; i < days; ++i) {
        const CivilDate d = dataset.start.plus_days(static_cast<std::int64_t>(i));
        if (!series || !series->at(d)) ++missing[i];
      }
    }
    if (report.n_expected[k] == 0) continue;
    auto& fractions = report.fraction_missing[k];
    fractions.resize(days);
    for (std::size_t i = 0; i < days; ++i) {
      fractions[i] = static_cast<double>(missing[i]) / static_cast<double>(report.n_expected[k]);
    }
  }
  return report;
}

void write_missingness_csv(const MissingnessReport& report, const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  out << "pollutant,date,fraction_missing,n_expected\n";
  for (auto p : kAllPollutants) {
    const auto k = index_of(p);
    const auto& fractions = report.fraction_missing[k];
    for (std::size_t i = 0; i < fractions.size(); ++i) {
      out << to_string(p) << ',' << report.start.plus_days(static_cast<std::int64_t>(i)).to_string()
          << ',' << csv::format_double(fractions[i]) << ',' << report.n_expected[k] << '\n';
    }
  }
}

} // namespace aqcast
