#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aqcast {

// ---------------------------------------------------------------------------
// Pollutants

enum class Pollutant : std::uint8_t { PM10 = 0, PM25, NO2, SO2, O3 };

inline constexpr std::size_t kPollutantCount = 5;
inline constexpr std::array<Pollutant, kPollutantCount> kAllPollutants{
    Pollutant::PM10, Pollutant::PM25, Pollutant::NO2, Pollutant::SO2, Pollutant::O3};

std::string_view to_string(Pollutant p) noexcept;
// Throws UnknownPollutant naming the valid set.
Pollutant parse_pollutant(std::string_view name);
std::optional<Pollutant> try_parse_pollutant(std::string_view name) noexcept;
inline constexpr std::size_t index_of(Pollutant p) noexcept { return static_cast<std::size_t>(p); }

class PollutantSet {
public:
  PollutantSet() = default;

  void insert(Pollutant p) noexcept { bits_ |= bit(p); }
  bool contains(Pollutant p) const noexcept { return (bits_ & bit(p)) != 0; }
  bool empty() const noexcept { return bits_ == 0; }
  std::vector<Pollutant> members() const;
  friend bool operator==(const PollutantSet&, const PollutantSet&) = default;

private:
  static constexpr std::uint8_t bit(Pollutant p) noexcept {
    return static_cast<std::uint8_t>(1u << index_of(p));
  }
  std::uint8_t bits_ = 0;
};

// ---------------------------------------------------------------------------
// Calendar

// Proleptic Gregorian calendar date. Construct through make() or parse() to get a
// validated value; aggregate initialisation is allowed for literals in tests.
struct CivilDate {
  int year = 1970;
  int month = 1;
  int day = 1;

  static bool is_valid(int year, int month, int day) noexcept;
  static CivilDate make(int year, int month, int day);
  // ISO-8601 `YYYY-MM-DD`. Throws ParseError.
  static CivilDate parse(std::string_view text);
  static std::optional<CivilDate> try_parse(std::string_view text) noexcept;
  static CivilDate from_days(std::int64_t days_since_epoch) noexcept;

  std::int64_t to_days() const noexcept;
  CivilDate plus_days(std::int64_t n) const noexcept { return from_days(to_days() + n); }
  CivilDate next() const noexcept { return plus_days(1); }
  CivilDate prev() const noexcept { return plus_days(-1); }
  std::string to_string() const;

  friend auto operator<=>(const CivilDate&, const CivilDate&) = default;
};

bool is_leap_year(int year) noexcept;
int days_in_month(int year, int month) noexcept;
// Signed number of days from `a` to `b`.
inline std::int64_t days_between(const CivilDate& a, const CivilDate& b) noexcept {
  return b.to_days() - a.to_days();
}

// Zero-based ordinal within the year: Jan 1 -> 0, Dec 31 -> 364 or 365.
int day_of_year(const CivilDate& d) noexcept;
// Zero-based, Monday -> 0 ... Sunday -> 6.
int weekday(const CivilDate& d) noexcept;

// ---------------------------------------------------------------------------
// Series

enum class Quality : std::uint8_t { observed, interpolated };

struct Measurement {
  double value = 0.0;
  Quality quality = Quality::observed;
  friend bool operator==(const Measurement&, const Measurement&) = default;
};

// A missing day is an empty optional.
using Reading = std::optional<Measurement>;

class DailySeries {
public:
  DailySeries() = default;
  DailySeries(CivilDate start, std::vector<Reading> values);
  // `length` days starting at `start`, all missing.
  static DailySeries missing(CivilDate start, std::size_t length);

  const CivilDate& start() const noexcept { return start_; }
  CivilDate end() const noexcept { return start_.plus_days(static_cast<std::int64_t>(values_.size()) - 1); }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  CivilDate date_at(std::size_t i) const noexcept { return start_.plus_days(static_cast<std::int64_t>(i)); }
  std::optional<std::size_t> index_of(const CivilDate& d) const noexcept;
  bool covers(const CivilDate& d) const noexcept { return index_of(d).has_value(); }

  const Reading& operator[](std::size_t i) const { return values_[i]; }
  Reading& operator[](std::size_t i) { return values_[i]; }
  // Missing if `d` is outside the series.
  Reading at(const CivilDate& d) const noexcept;
  std::optional<double> value_at(const CivilDate& d) const noexcept;
  void set(const CivilDate& d, Reading r);

  const std::vector<Reading>& values() const noexcept { return values_; }
  std::size_t count_missing() const noexcept;

  // Restricts to [from, to]; days outside the original range become missing.
  DailySeries clipped(const CivilDate& from, const CivilDate& to) const;

  friend bool operator==(const DailySeries&, const DailySeries&) = default;

private:
  CivilDate start_{};
  std::vector<Reading> values_;
};

// ---------------------------------------------------------------------------
// Stations and source tables

struct ProjectedPoint {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const ProjectedPoint&, const ProjectedPoint&) = default;
};

struct Station {
  std::string id;
  double lon = 0.0;
  double lat = 0.0;
  PollutantSet measured;
  // Coordinates in the raster CRS (meters). Required for any raster extraction.
  std::optional<ProjectedPoint> projected;
  friend bool operator==(const Station&, const Station&) = default;
};

inline constexpr std::size_t kSatelliteBandCount = 6;
inline constexpr std::array<std::string_view, kSatelliteBandCount> kSatelliteBands{
    "no2", "o3", "so2", "hcho", "co", "aerosol_index"};

inline constexpr std::size_t kWeatherVariableCount = 9;
inline constexpr std::array<std::string_view, kWeatherVariableCount> kWeatherVariables{
    "temp", "dewpoint", "humidity", "precip", "wind_speed",
    "wind_dir_deg", "pressure", "cloud_cover", "solar_rad"};
inline constexpr std::size_t kWindDirIndex = 5;

// Per station id, one optional series per pollutant (indexed by index_of(Pollutant)).
using PollutantSeries = std::array<std::optional<DailySeries>, kPollutantCount>;
using PollutionTable = std::map<std::string, PollutantSeries>;
// Per station id, one series per satellite band in kSatelliteBands order.
using SatelliteSeries = std::array<DailySeries, kSatelliteBandCount>;
using SatelliteTable = std::map<std::string, SatelliteSeries>;
// City-level weather, kWeatherVariables order.
using WeatherTable = std::array<DailySeries, kWeatherVariableCount>;

// ---------------------------------------------------------------------------
// Validation

struct SourceCoverage {
  std::string source;
  std::optional<CivilDate> first;
  std::optional<CivilDate> last;
  std::size_t n_values = 0;
  std::size_t n_missing = 0;
};

struct Violation {
  std::string source;
  std::string station_id;
  std::optional<CivilDate> date;
  std::string message;
};

struct ValidationReport {
  std::vector<SourceCoverage> coverage;
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

// Checks loaded sources for range violations and referential integrity. Missing
// values are counted, never reported as violations.
ValidationReport validate_dataset(const std::vector<Station>& stations,
                                  const PollutionTable& pollution,
                                  const SatelliteTable& satellite,
                                  const WeatherTable& weather);

} // namespace aqcast
