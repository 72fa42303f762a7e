#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aqcast/data_model.hpp"
#include "aqcast/ingest.hpp"

namespace aqcast {

// ---------------------------------------------------------------------------
// Encodings

// (sin, cos) of a compass angle in degrees. Throws DomainError outside [0, 360].
std::pair<double, double> encode_wind(double alpha_deg);

inline constexpr int kDayOfYearPeriod = 366;
inline constexpr int kMonthPeriod = 12;
inline constexpr int kWeekdayPeriod = 7;

// (sin, cos) of 2*pi*f/period. Throws DomainError unless 0 <= f < period.
std::pair<double, double> encode_cyclic(int f, int period);

// Interior gaps are filled linearly between the bracketing observations, leading and
// trailing gaps with the nearest observation. Filled values are tagged interpolated.
// Throws AllMissing if the series has no value.
DailySeries interpolate_gaps(const DailySeries& series);

// ---------------------------------------------------------------------------
// Min-max scaling

struct ValueRange {
  double min = 0.0;
  double max = 0.0;
  friend bool operator==(const ValueRange&, const ValueRange&) = default;
};

// Per-variable min-max scaling learnt from training data; no clamping on apply.
class Normalizer {
public:
  Normalizer() = default;
  Normalizer(std::vector<std::string> variables, std::vector<ValueRange> ranges);

  // One column of training values per variable.
  static Normalizer fit(std::vector<std::string> variables,
                        const std::vector<std::vector<double>>& columns);

  double apply(std::size_t variable, double x) const noexcept;

  const std::vector<std::string>& variables() const noexcept { return variables_; }
  const std::vector<ValueRange>& ranges() const noexcept { return ranges_; }
  bool empty() const noexcept { return variables_.empty(); }

  friend bool operator==(const Normalizer&, const Normalizer&) = default;

private:
  std::vector<std::string> variables_;
  std::vector<ValueRange> ranges_;
};

// ---------------------------------------------------------------------------
// Feature layout

inline constexpr std::size_t kEncodedWeatherCount = 10;
inline constexpr std::size_t kTopoFeatureCount = 13;
inline constexpr std::size_t kTemporalFeatureCount = 6;
inline constexpr std::size_t kDayBlockSize = kSatelliteBandCount + kEncodedWeatherCount + kTopoFeatureCount;

inline constexpr std::array<std::string_view, kEncodedWeatherCount> kEncodedWeatherNames{
    "temp", "dewpoint", "humidity", "precip", "wind_speed",
    "wd_sin", "wd_cos", "pressure", "cloud_cover", "solar_rad"};

// Variables scaled by the normalizer. Land-cover fractions and sin/cos encodings are
// already bounded and are passed through.
const std::vector<std::string>& normalized_variables();

struct WindowConfig {
  int w = 7;
};

// Column order for a window length w:
//   for each day d = t-w .. t-1:  6 satellite | 10 encoded weather | 13 topography
//   6 temporal encodings of day t-1 (day of year, month, weekday; sin then cos)
//   10 encoded weather values of day t (forecast proxy)
class FeatureLayout {
public:
  FeatureLayout() = default;
  explicit FeatureLayout(int w);

  int w() const noexcept { return w_; }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  // Index into normalized_variables() or nullopt for pass-through columns.
  const std::vector<std::optional<std::size_t>>& column_variables() const noexcept { return column_variables_; }

  static std::size_t expected_size(int w) noexcept {
    return static_cast<std::size_t>(w) * kDayBlockSize + kTemporalFeatureCount + kEncodedWeatherCount;
  }

private:
  int w_ = 0;
  std::vector<std::string> names_;
  std::vector<std::optional<std::size_t>> column_variables_;
};

struct WindowedSample {
  std::string station_id;
  CivilDate target_date;
  std::vector<double> features;
  double target = 0.0;
};

struct WindowSet {
  Pollutant pollutant = Pollutant::PM10;
  FeatureLayout layout;
  std::vector<WindowedSample> samples;
  std::size_t dropped_missing_target = 0;
  std::size_t dropped_missing_features = 0;
  bool empty_output() const noexcept { return samples.empty(); }
};

// Fills satellite gaps per station and band. Bands with no observation at all stay
// missing (with a warning); windows touching them are dropped.
StationDataset prepare_dataset(const StationDataset& dataset);

// The 13 static values of one station; a missing altitude scale borrows the nearest
// available one.
std::array<std::optional<double>, kTopoFeatureCount> topo_features(const TopoProfile& topo);

// Raw (unscaled) feature vector for a target date `t` from explicit inputs. Missing if
// any input value is missing. Throws InsufficientHistory when [t-w, t] is not covered.
std::optional<std::vector<double>> assemble_features(const SatelliteSeries& satellite,
                                                     const WeatherTable& weather,
                                                     const TopoProfile& topo, CivilDate t, int w);

std::optional<std::vector<double>> station_features(const StationDataset& dataset, std::size_t station,
                                                    CivilDate t, int w);

// One sample per (station measuring p, day t >= start + w) with an observed target.
// Features are scaled when a normalizer is given.
WindowSet build_windows(const StationDataset& dataset, Pollutant p, const WindowConfig& config,
                        const Normalizer* normalizer = nullptr);

// Min/max per normalized variable over every column of the given samples.
Normalizer fit_normalizer(const std::vector<const WindowedSample*>& samples, const FeatureLayout& layout);
void apply_normalizer(const Normalizer& normalizer, const FeatureLayout& layout, std::vector<double>& features);

// `features.csv`: feature columns, then target, station_id, date.
void write_features_csv(const WindowSet& set, const std::filesystem::path& path);

} // namespace aqcast
