#include "aqcast/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "aqcast/csv.hpp"
#include "aqcast/errors.hpp"
#include "aqcast/log.hpp"

namespace aqcast {

std::pair<double, double> encode_wind(double alpha_deg) {
  if (!(alpha_deg >= 0.0 && alpha_deg <= 360.0)) {
    throw DomainError("wind direction " + csv::format_double(alpha_deg) + " outside [0,360]");
  }
  // 360 is north again; reduce so that it encodes bit-identically to 0.
  const double rad = std::numbers::pi * (alpha_deg == 360.0 ? 0.0 : alpha_deg) / 180.0;
  return {std::sin(rad), std::cos(rad)};
}

std::pair<double, double> encode_cyclic(int f, int period) {
  if (period <= 0 || f < 0 || f >= period) {
    throw DomainError("cyclic value " + std::to_string(f) + " outside [0," + std::to_string(period) + ")");
  }
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(f) / static_cast<double>(period);
  return {std::sin(angle), std::cos(angle)};
}

DailySeries interpolate_gaps(const DailySeries& series) {
  std::vector<std::size_t> observed;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i]) observed.push_back(i);
  }
  if (observed.empty()) throw AllMissing("series starting " + series.start().to_string() + " has no value");

  std::vector<Reading> out = series.values();
  for (std::size_t i = 0; i < observed.front(); ++i) {
    out[i] = Measurement{series[observed.front()]->value, Quality::interpolated};
  }
  for (std::size_t i = observed.back() + 1; i < out.size(); ++i) {
    out[i] = Measurement{series[observed.back()]->value, Quality::interpolated};
  }
  for (std::size_t k = 0; k + 1 < observed.size(); ++k) {
    const std::size_t a = observed[k];
    const std::size_t b = observed[k + 1];
    if (b == a + 1) continue;
    const double va = series[a]->value;
    const double vb = series[b]->value;
    const double span = static_cast<double>(b - a);
    for (std::size_t i = a + 1; i < b; ++i) {
      const double frac = static_cast<double>(i - a) / span;
      out[i] = Measurement{va + (vb - va) * frac, Quality::interpolated};
    }
  }
  return DailySeries(series.start(), std::move(out));
}

// ---------------------------------------------------------------------------

Normalizer::Normalizer(std::vector<std::string> variables, std::vector<ValueRange> ranges)
    : variables_(std::move(variables)), ranges_(std::move(ranges)) {
  if (variables_.size() != ranges_.size()) {
    throw DimensionMismatch("normalizer has " + std::to_string(variables_.size()) + " variables but " +
                            std::to_string(ranges_.size()) + " ranges");
  }
}

Normalizer Normalizer::fit(std::vector<std::string> variables, const std::vector<std::vector<double>>& columns) {
  if (variables.size() != columns.size()) {
    throw DimensionMismatch("normalizer fit: variable/column count mismatch");
  }
  std::vector<ValueRange> ranges;
  ranges.reserve(columns.size());
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k].empty()) throw EmptyInput("normalizer fit: no training values for " + variables[k]);
    const auto [lo, hi] = std::minmax_element(columns[k].begin(), columns[k].end());
    ranges.push_back({*lo, *hi});
  }
  return Normalizer(std::move(variables), std::move(ranges));
}

double Normalizer::apply(std::size_t variable, double x) const noexcept {
  const auto& r = ranges_[variable];
  if (r.max == r.min) return 0.0;
  return (x - r.min) / (r.max - r.min);
}

// ---------------------------------------------------------------------------

namespace {

// Weather variables in encoded order map to raw weather indices; wind direction
// expands into two columns.
constexpr std::array<std::size_t, 8> kScaledWeather{0, 1, 2, 3, 4, 6, 7, 8};

std::vector<std::string> make_normalized_variables() {
  std::vector<std::string> out;
  for (auto b : kSatelliteBands) out.push_back("sat_" + std::string(b));
  for (auto k : kScaledWeather) out.push_back("wx_" + std::string(kWeatherVariables[k]));
  out.insert(out.end(), {"alt_point", "alt_100m", "alt_1km"});
  return out;
}

std::optional<std::size_t> variable_index(const std::string& name) {
  const auto& vars = normalized_variables();
  auto it = std::find(vars.begin(), vars.end(), name);
  if (it == vars.end()) return std::nullopt;
  return static_cast<std::size_t>(it - vars.begin());
}

std::string day_suffix(int lag) { return "[t-" + std::to_string(lag) + "]"; }

} // namespace

const std::vector<std::string>& normalized_variables() {
  static const std::vector<std::string> vars = make_normalized_variables();
  return vars;
}

FeatureLayout::FeatureLayout(int w) : w_(w) {
  if (w < 1) throw DomainError("window length must be >= 1, got " + std::to_string(w));
  auto add = [&](const std::string& base, const std::string& suffix) {
    names_.push_back(base + suffix);
    column_variables_.push_back(variable_index(base));
  };
  for (int lag = w; lag >= 1; --lag) {
    const auto suffix = day_suffix(lag);
    for (auto b : kSatelliteBands) add("sat_" + std::string(b), suffix);
    for (auto v : kEncodedWeatherNames) add("wx_" + std::string(v), suffix);
    add("alt_point", suffix);
    add("alt_100m", suffix);
    add("alt_1km", suffix);
    for (auto c : kLandCoverNames) add("lc_" + std::string(c), suffix);
  }
  for (auto t : {"doy", "month", "weekday"}) {
    add(std::string(t) + "_sin", "[t-1]");
    add(std::string(t) + "_cos", "[t-1]");
  }
  for (auto v : kEncodedWeatherNames) add("wx_" + std::string(v), "[t]");
}

// ---------------------------------------------------------------------------

StationDataset prepare_dataset(const StationDataset& dataset) {
  StationDataset out = dataset;
  for (std::size_t s = 0; s < out.stations.size(); ++s) {
    for (std::size_t b = 0; b < kSatelliteBandCount; ++b) {
      auto& series = out.satellite[s][b];
      if (series.count_missing() == 0) continue;
      if (series.count_missing() == series.size()) {
        log::warn("station " + out.stations[s].id + " has no " + std::string(kSatelliteBands[b]) +
                  " observation; its windows are dropped");
        continue;
      }
      series = interpolate_gaps(series);
    }
  }
  return out;
}

std::array<std::optional<double>, kTopoFeatureCount> topo_features(const TopoProfile& topo) {
  const std::array<std::optional<double>, 3> alt{topo.altitude.alt_point, topo.altitude.alt_100m,
                                                 topo.altitude.alt_1km};
  std::array<std::optional<double>, kTopoFeatureCount> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    out[i] = alt[i];
    // Nearest scale first, coarser scale on ties.
    for (std::size_t d = 1; d < 3 && !out[i]; ++d) {
      if (i + d < 3 && alt[i + d]) out[i] = alt[i + d];
      else if (i >= d && alt[i - d]) out[i] = alt[i - d];
    }
  }
  for (std::size_t k = 0; k < kLandCoverCount; ++k) out[3 + k] = topo.landcover[k];
  return out;
}

namespace {

// Appends the 10 encoded weather values of day d; false if any is missing.
bool append_weather(const WeatherTable& weather, const CivilDate& d, std::vector<double>& out) {
  for (std::size_t k = 0; k < kWeatherVariableCount; ++k) {
    auto v = weather[k].value_at(d);
    if (!v) return false;
    if (k == kWindDirIndex) {
      const auto [s, c] = encode_wind(*v);
      out.push_back(s);
      out.push_back(c);
    } else {
      out.push_back(*v);
    }
  }
  return true;
}

} // namespace

std::optional<std::vector<double>> assemble_features(const SatelliteSeries& satellite,
                                                     const WeatherTable& weather,
                                                     const TopoProfile& topo, CivilDate t, int w) {
  if (w < 1) throw DomainError("window length must be >= 1");
  const CivilDate first = t.plus_days(-w);
  const CivilDate last = t.prev();
  for (const auto& s : satellite) {
    if (!s.covers(first) || !s.covers(last)) {
      throw InsufficientHistory("satellite data does not cover " + first.to_string() + ".." + last.to_string());
    }
  }
  for (const auto& s : weather) {
    if (!s.covers(first) || !s.covers(t)) {
      throw InsufficientHistory("weather data does not cover " + first.to_string() + ".." + t.to_string());
    }
  }
  const auto static_block = topo_features(topo);
  for (const auto& v : static_block) {
    if (!v) return std::nullopt;
  }

  std::vector<double> out;
  out.reserve(FeatureLayout::expected_size(w));
  for (CivilDate d = first; d <= last; d = d.next()) {
    for (const auto& s : satellite) {
      auto v = s.value_at(d);
      if (!v) return std::nullopt;
      out.push_back(*v);
    }
    if (!append_weather(weather, d, out)) return std::nullopt;
    for (const auto& v : static_block) out.push_back(*v);
  }
  const auto [doy_s, doy_c] = encode_cyclic(day_of_year(last), kDayOfYearPeriod);
  const auto [mon_s, mon_c] = encode_cyclic(last.month - 1, kMonthPeriod);
  const auto [wd_s, wd_c] = encode_cyclic(weekday(last), kWeekdayPeriod);
  out.insert(out.end(), {doy_s, doy_c, mon_s, mon_c, wd_s, wd_c});
  if (!append_weather(weather, t, out)) return std::nullopt;
  return out;
}

std::optional<std::vector<double>> station_features(const StationDataset& dataset, std::size_t station,
                                                    CivilDate t, int w) {
  return assemble_features(dataset.satellite.at(station), dataset.weather, dataset.topo.at(station), t, w);
}

WindowSet build_windows(const StationDataset& dataset, Pollutant p, const WindowConfig& config,
                        const Normalizer* normalizer) {
  WindowSet set;
  set.pollutant = p;
  set.layout = FeatureLayout(config.w);
  for (std::size_t s = 0; s < dataset.stations.size(); ++s) {
    const auto& st = dataset.stations[s];
    if (!st.measured.contains(p)) continue;
    const auto& target_series = dataset.pollution[s][index_of(p)];
    if (!target_series) continue;
    for (CivilDate t = dataset.start.plus_days(config.w); t <= dataset.end; t = t.next()) {
      auto target = target_series->value_at(t);
      if (!target) {
        ++set.dropped_missing_target;
        continue;
      }
      auto features = station_features(dataset, s, t, config.w);
      if (!features) {
        ++set.dropped_missing_features;
        continue;
      }
      if (normalizer) apply_normalizer(*normalizer, set.layout, *features);
      set.samples.push_back({st.id, t, std::move(*features), *target});
    }
  }
  return set;
}

Normalizer fit_normalizer(const std::vector<const WindowedSample*>& samples, const FeatureLayout& layout) {
  const auto& vars = normalized_variables();
  std::vector<std::vector<double>> columns(vars.size());
  for (const auto* sample : samples) {
    if (sample->features.size() != layout.size()) {
      throw DimensionMismatch("sample has " + std::to_string(sample->features.size()) +
                              " features, layout expects " + std::to_string(layout.size()));
    }
    for (std::size_t j = 0; j < layout.size(); ++j) {
      if (auto v = layout.column_variables()[j]) columns[*v].push_back(sample->features[j]);
    }
  }
  return Normalizer::fit(vars, columns);
}

void apply_normalizer(const Normalizer& normalizer, const FeatureLayout& layout, std::vector<double>& features) {
  if (features.size() != layout.size()) {
    throw DimensionMismatch("feature vector has " + std::to_string(features.size()) +
                            " values, layout expects " + std::to_string(layout.size()));
  }
  if (normalizer.variables() != normalized_variables()) {
    throw DimensionMismatch("normalizer variables do not match the feature layout");
  }
  for (std::size_t j = 0; j < features.size(); ++j) {
    if (auto v = layout.column_variables()[j]) features[j] = normalizer.apply(*v, features[j]);
  }
}

void write_features_csv(const WindowSet& set, const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  for (const auto& name : set.layout.names()) out << name << ',';
  out << "target,station_id,date\n";
  for (const auto& sample : set.samples) {
    for (double v : sample.features) out << csv::format_double(v) << ',';
    out << csv::format_double(sample.target) << ',' << sample.station_id << ','
        << sample.target_date.to_string() << '\n';
  }
}

} // namespace aqcast
