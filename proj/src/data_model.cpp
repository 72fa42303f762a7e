#include "aqcast/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "aqcast/errors.hpp"

namespace aqcast {

namespace {

constexpr std::array<std::string_view, kPollutantCount> kPollutantNames{"PM10", "PM25", "NO2",
                                                                         "SO2", "O3"};

std::string valid_pollutant_list() {
  std::string out;
  for (auto name : kPollutantNames) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

} // namespace

std::string_view to_string(Pollutant p) noexcept { return kPollutantNames[index_of(p)]; }

std::optional<Pollutant> try_parse_pollutant(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kPollutantCount; ++i) {
    if (kPollutantNames[i] == name) return kAllPollutants[i];
  }
  // PM2.5 is the common spelling in source portals.
  if (name == "PM2.5") return Pollutant::PM25;
  return std::nullopt;
}

Pollutant parse_pollutant(std::string_view name) {
  if (auto p = try_parse_pollutant(name)) return *p;
  throw UnknownPollutant("unknown pollutant '" + std::string(name) +
                         "'; valid pollutants are {" + valid_pollutant_list() + "}");
}

std::vector<Pollutant> PollutantSet::members() const {
  std::vector<Pollutant> out;
  for (auto p : kAllPollutants) {
    if (contains(p)) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------

bool is_leap_year(int year) noexcept {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) noexcept {
  static constexpr std::array<int, 12> kDays{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap_year(year)) return 29;
  return kDays[static_cast<std::size_t>(month - 1)];
}

bool CivilDate::is_valid(int year, int month, int day) noexcept {
  return month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month);
}

CivilDate CivilDate::make(int year, int month, int day) {
  if (!is_valid(year, month, day)) {
    throw ParseError("invalid calendar date " + std::to_string(year) + "-" +
                     std::to_string(month) + "-" + std::to_string(day));
  }
  return CivilDate{year, month, day};
}

std::optional<CivilDate> CivilDate::try_parse(std::string_view text) noexcept {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto field = [&](std::size_t pos, std::size_t len, int& out) {
    const char* first = text.data() + pos;
    const char* last = first + len;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
  };
  int y = 0, m = 0, d = 0;
  if (!field(0, 4, y) || !field(5, 2, m) || !field(8, 2, d)) return std::nullopt;
  if (!is_valid(y, m, d)) return std::nullopt;
  return CivilDate{y, m, d};
}

CivilDate CivilDate::parse(std::string_view text) {
  if (auto d = try_parse(text)) return *d;
  throw ParseError("invalid ISO-8601 date '" + std::string(text) + "'");
}

// Days-from-civil and its inverse over 400-year eras.
std::int64_t CivilDate::to_days() const noexcept {
  const std::int64_t y = static_cast<std::int64_t>(year) - (month <= 2 ? 1 : 0);
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const std::int64_t yoe = y - era * 400;
  const std::int64_t mp = (month + 9) % 12;
  const std::int64_t doy = (153 * mp + 2) / 5 + day - 1;
  const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

CivilDate CivilDate::from_days(std::int64_t z) noexcept {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const std::int64_t doe = z - era * 146097;
  const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const std::int64_t mp = (5 * doy + 2) / 153;
  const std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
  const std::int64_t m = mp < 10 ? mp + 3 : mp - 9;
  const std::int64_t y = yoe + era * 400 + (m <= 2 ? 1 : 0);
  return CivilDate{static_cast<int>(y), static_cast<int>(m), static_cast<int>(d)};
}

std::string CivilDate::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

int day_of_year(const CivilDate& d) noexcept {
  return static_cast<int>(d.to_days() - CivilDate{d.year, 1, 1}.to_days());
}

int weekday(const CivilDate& d) noexcept {
  // 1970-01-01 was a Thursday (3 with Monday = 0).
  const std::int64_t w = (d.to_days() + 3) % 7;
  return static_cast<int>(w < 0 ? w + 7 : w);
}

// ---------------------------------------------------------------------------

DailySeries::DailySeries(CivilDate start, std::vector<Reading> values)
    : start_(start), values_(std::move(values)) {}

DailySeries DailySeries::missing(CivilDate start, std::size_t length) {
  return DailySeries(start, std::vector<Reading>(length));
}

std::optional<std::size_t> DailySeries::index_of(const CivilDate& d) const noexcept {
  const auto offset = days_between(start_, d);
  if (offset < 0 || static_cast<std::size_t>(offset) >= values_.size()) return std::nullopt;
  return static_cast<std::size_t>(offset);
}

Reading DailySeries::at(const CivilDate& d) const noexcept {
  if (auto i = index_of(d)) return values_[*i];
  return std::nullopt;
}

std::optional<double> DailySeries::value_at(const CivilDate& d) const noexcept {
  if (auto r = at(d)) return r->value;
  return std::nullopt;
}

void DailySeries::set(const CivilDate& d, Reading r) {
  auto i = index_of(d);
  if (!i) throw DomainError("date " + d.to_string() + " outside series range");
  values_[*i] = r;
}

std::size_t DailySeries::count_missing() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](const Reading& r) { return !r; }));
}

DailySeries DailySeries::clipped(const CivilDate& from, const CivilDate& to) const {
  const auto len = days_between(from, to) + 1;
  if (len <= 0) throw DomainError("empty clip range " + from.to_string() + ".." + to.to_string());
  std::vector<Reading> out(static_cast<std::size_t>(len));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = at(from.plus_days(static_cast<std::int64_t>(i)));
  }
  return DailySeries(from, std::move(out));
}

// ---------------------------------------------------------------------------

namespace {

SourceCoverage coverage_of(std::string source, const std::vector<const DailySeries*>& series) {
  SourceCoverage cov;
  cov.source = std::move(source);
  for (const auto* s : series) {
    if (s->empty()) continue;
    if (!cov.first || s->start() < *cov.first) cov.first = s->start();
    if (!cov.last || *cov.last < s->end()) cov.last = s->end();
    cov.n_values += s->size();
    cov.n_missing += s->count_missing();
  }
  return cov;
}

template <typename Check>
void scan(const DailySeries& s, Check&& check) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i]) check(s.date_at(i), s[i]->value);
  }
}

} // namespace

ValidationReport validate_dataset(const std::vector<Station>& stations,
                                  const PollutionTable& pollution,
                                  const SatelliteTable& satellite,
                                  const WeatherTable& weather) {
  ValidationReport report;
  std::map<std::string, const Station*> by_id;
  for (const auto& st : stations) {
    if (!by_id.emplace(st.id, &st).second) {
      report.violations.push_back({"stations", st.id, std::nullopt, "duplicate station id"});
    }
    if (!(st.lon >= -180.0 && st.lon <= 180.0) || !(st.lat >= -90.0 && st.lat <= 90.0)) {
      report.violations.push_back({"stations", st.id, std::nullopt, "coordinates out of range"});
    }
    if (st.measured.empty()) {
      report.violations.push_back({"stations", st.id, std::nullopt, "station measures no pollutant"});
    }
  }

  std::vector<const DailySeries*> all_pollution;
  for (const auto& [id, per_pollutant] : pollution) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      report.violations.push_back({"pollution", id, std::nullopt, "unknown station id '" + id + "'"});
    }
    for (auto p : kAllPollutants) {
      const auto& s = per_pollutant[index_of(p)];
      if (!s) continue;
      all_pollution.push_back(&*s);
      if (it != by_id.end() && !it->second->measured.contains(p)) {
        report.violations.push_back({"pollution", id, std::nullopt,
                                     "readings for " + std::string(to_string(p)) +
                                         " which the station does not measure"});
      }
      scan(*s, [&](const CivilDate& d, double v) {
        if (!std::isfinite(v)) {
          report.violations.push_back({"pollution", id, d, "non-finite concentration"});
        } else if (v < 0.0) {
          report.violations.push_back({"pollution", id, d,
                                       "negative concentration (" + std::string(to_string(p)) + ")"});
        }
      });
    }
  }

  std::vector<const DailySeries*> all_satellite;
  for (const auto& [id, bands] : satellite) {
    if (!by_id.count(id)) {
      report.violations.push_back({"satellite", id, std::nullopt, "unknown station id '" + id + "'"});
    }
    for (std::size_t b = 0; b < kSatelliteBandCount; ++b) {
      all_satellite.push_back(&bands[b]);
      scan(bands[b], [&](const CivilDate& d, double v) {
        if (!std::isfinite(v)) {
          report.violations.push_back({"satellite", id, d,
                                       "non-finite " + std::string(kSatelliteBands[b]) + " value"});
        }
      });
    }
  }

  std::vector<const DailySeries*> all_weather;
  for (std::size_t k = 0; k < kWeatherVariableCount; ++k) {
    all_weather.push_back(&weather[k]);
    const std::string name(kWeatherVariables[k]);
    scan(weather[k], [&](const CivilDate& d, double v) {
      if (!std::isfinite(v)) {
        report.violations.push_back({"weather", "", d, "non-finite " + name});
        return;
      }
      if ((name == "precip" || name == "wind_speed" || name == "solar_rad") && v < 0.0) {
        report.violations.push_back({"weather", "", d, "negative " + name});
      } else if ((name == "humidity" || name == "cloud_cover") && (v < 0.0 || v > 100.0)) {
        report.violations.push_back({"weather", "", d, name + " outside [0,100]"});
      } else if (k == kWindDirIndex && (v < 0.0 || v > 360.0)) {
        report.violations.push_back({"weather", "", d, "direction outside [0,360]"});
      }
    });
  }

  report.coverage.push_back(coverage_of("pollution", all_pollution));
  report.coverage.push_back(coverage_of("satellite", all_satellite));
  report.coverage.push_back(coverage_of("weather", all_weather));
  return report;
}

} // namespace aqcast
