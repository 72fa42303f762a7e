#include <doctest.h>

#include "aqcast/data_model.hpp"
#include "aqcast/errors.hpp"

using namespace aqcast;

namespace {

// Naive oracle: walk day by day from 1900-01-01 using month lengths from a table.
struct NaiveCalendar {
  int y = 1900, m = 1, d = 1;
  static int month_length(int y, int m) {
    static const int len[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    return m == 2 && leap ? 29 : len[m - 1];
  }
  void advance() {
    if (++d > month_length(y, m)) {
      d = 1;
      if (++m > 12) {
        m = 1;
        ++y;
      }
    }
  }
};

} // namespace

TEST_CASE("pollutant names") {
  CHECK(parse_pollutant("PM25") == Pollutant::PM25);
  CHECK(parse_pollutant("PM2.5") == Pollutant::PM25);
  for (auto p : kAllPollutants) CHECK(parse_pollutant(to_string(p)) == p);
  try {
    parse_pollutant("CO2");
    FAIL("expected UnknownPollutant");
  } catch (const UnknownPollutant& e) {
    CHECK(std::string(e.what()).find("PM10") != std::string::npos);
  }
  PollutantSet s;
  CHECK(s.empty());
  s.insert(Pollutant::O3);
  CHECK(s.contains(Pollutant::O3));
  CHECK_FALSE(s.contains(Pollutant::NO2));
}

TEST_CASE("calendar against day-by-day walk 1900-2100") {
  NaiveCalendar naive;
  CivilDate d = CivilDate::make(1900, 1, 1);
  int ordinal = 0;
  int prev_year = 1900;
  const auto origin = d;
  while (naive.y <= 2100) {
    if (naive.y != prev_year) {
      ordinal = 0;
      prev_year = naive.y;
    }
    REQUIRE(d == CivilDate{naive.y, naive.m, naive.d});
    CHECK(day_of_year(d) == ordinal);
    CHECK(days_between(origin, d) == d.to_days() - origin.to_days());
    CHECK(d.next().prev() == d);
    CHECK(CivilDate::parse(d.to_string()) == d);
    CHECK(day_of_year(d) <= 365);
    if (day_of_year(d) == 365) CHECK(is_leap_year(d.year));
    naive.advance();
    d = d.next();
    ++ordinal;
  }
  CHECK(days_between(origin, CivilDate{2101, 1, 1}) == 73414);
}

TEST_CASE("day_of_year examples") {
  CHECK(day_of_year(CivilDate{2023, 1, 1}) == 0);
  CHECK(day_of_year(CivilDate{2020, 12, 31}) == 365);
  CHECK(day_of_year(CivilDate{2018, 5, 15}) == 31 + 28 + 31 + 30 + 14);
  CHECK(day_of_year(CivilDate{2018, 5, 15}) == 134);
}

TEST_CASE("weekday examples") {
  CHECK(weekday(CivilDate{2024, 1, 1}) == 0);
  CHECK(weekday(CivilDate{2024, 1, 7}) == 6);
  CivilDate d{1999, 12, 25};
  for (int i = 0; i < 500; ++i, d = d.next()) CHECK(weekday(d) == weekday(d.plus_days(7)));
}

TEST_CASE("date parsing rejects invalid input") {
  CHECK_THROWS_AS(CivilDate::parse("2023-02-29"), ParseError);
  CHECK_THROWS_AS(CivilDate::parse("2023-13-01"), ParseError);
  CHECK_THROWS_AS(CivilDate::parse("20230101"), ParseError);
  CHECK(CivilDate::parse("2024-02-29") == CivilDate{2024, 2, 29});
  CHECK_FALSE(CivilDate::try_parse("x").has_value());
}

TEST_CASE("series indexing round trip") {
  const CivilDate start{2019, 2, 20};
  auto s = DailySeries::missing(start, 20);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s.index_of(s.date_at(i)) == i);
    s.set(s.date_at(i), Measurement{static_cast<double>(i)});
  }
  CHECK(s.end() == CivilDate{2019, 3, 11});
  CHECK(s.value_at(CivilDate{2019, 3, 1}) == 9.0);
  CHECK_FALSE(s.covers(start.prev()));
  CHECK_FALSE(s.at(start.prev()).has_value());
  const auto c = s.clipped(start.plus_days(-2), start.plus_days(1));
  CHECK(c.size() == 4);
  CHECK_FALSE(c[0].has_value());
  CHECK(c[3]->value == 1.0);
}

TEST_CASE("validation") {
  Station st{"ST1", 9.19, 45.46, {}, std::nullopt};
  st.measured.insert(Pollutant::PM10);
  const CivilDate start{2020, 1, 1};
  PollutionTable pollution;
  auto series = DailySeries::missing(start, 3);
  series.set(start, Measurement{10.0});
  pollution["ST1"][index_of(Pollutant::PM10)] = series;
  SatelliteTable satellite;
  for (auto& b : satellite["ST1"]) b = DailySeries::missing(start, 3);
  WeatherTable weather;
  for (auto& w : weather) w = DailySeries(start, {Measurement{5.0}, Measurement{5.0}, Measurement{5.0}});

  CHECK(validate_dataset({st}, pollution, satellite, weather).ok());

  SUBCASE("negative concentration") {
    pollution["ST1"][index_of(Pollutant::PM10)]->set(start.next(), Measurement{-3.0});
    const auto r = validate_dataset({st}, pollution, satellite, weather);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].message.find("negative concentration") != std::string::npos);
  }
  SUBCASE("unknown station in satellite data") {
    satellite["GHOST"] = satellite["ST1"];
    const auto r = validate_dataset({st}, pollution, satellite, weather);
    REQUIRE_FALSE(r.ok());
    bool named = false;
    for (const auto& v : r.violations) named |= v.message.find("GHOST") != std::string::npos || v.station_id == "GHOST";
    CHECK(named);
  }
}
