#pragma once

// Small hand-built station datasets for feature and evaluation tests.

#include <cmath>

#include "aqcast/ingest.hpp"

inline aqcast::StationDataset make_dataset(aqcast::CivilDate start, std::size_t days, std::size_t stations,
                                           aqcast::Pollutant p = aqcast::Pollutant::PM10) {
  using namespace aqcast;
  StationDataset ds;
  ds.start = start;
  ds.end = start.plus_days(static_cast<std::int64_t>(days) - 1);
  for (std::size_t k = 0; k < kWeatherVariableCount; ++k) {
    ds.weather[k] = DailySeries::missing(start, days);
    for (std::size_t i = 0; i < days; ++i) {
      const double v = k == kWindDirIndex ? std::fmod(37.0 * static_cast<double>(i), 360.0)
                                          : 10.0 * static_cast<double>(k) + std::sin(0.3 * static_cast<double>(i));
      ds.weather[k][i] = Measurement{v};
    }
  }
  for (std::size_t s = 0; s < stations; ++s) {
    Station st{"S" + std::to_string(s), 9.0, 45.0, {}, ProjectedPoint{1000.0 * static_cast<double>(s), 0.0}};
    st.measured.insert(p);
    ds.stations.push_back(st);
    PollutantSeries per;
    per[index_of(p)] = DailySeries::missing(start, days);
    SatelliteSeries bands;
    for (std::size_t b = 0; b < kSatelliteBandCount; ++b) bands[b] = DailySeries::missing(start, days);
    for (std::size_t i = 0; i < days; ++i) {
      (*per[index_of(p)])[i] = Measurement{20.0 + static_cast<double>(i % 9) + static_cast<double>(s)};
      for (std::size_t b = 0; b < kSatelliteBandCount; ++b) {
        bands[b][i] = Measurement{static_cast<double>(b) + 0.1 * static_cast<double>((i * 7 + s * 3) % 11)};
      }
    }
    ds.pollution.push_back(per);
    ds.satellite.push_back(bands);
    TopoProfile topo;
    topo.altitude = {120.0 + static_cast<double>(s), 121.0, 119.5};
    topo.landcover[0] = 0.6;
    topo.landcover[7] = 0.4;
    ds.topo.push_back(topo);
  }
  return ds;
}
