// Writes the synthetic fixture dataset into a directory.
#include <iostream>

#include <CLI11.hpp>

#include "aqcast/errors.hpp"
#include "aqcast/fixtures.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic aqcast fixture dataset", "aqcast-fixture"};
  aqcast::FixtureSpec spec;
  std::string dir;
  std::string target = "threshold";
  std::string start = spec.start.to_string();
  app.add_option("dir", dir, "Output directory")->required();
  app.add_option("--stations", spec.n_stations, "Number of stations");
  app.add_option("--days", spec.n_days, "Number of days");
  app.add_option("--start", start, "First date (YYYY-MM-DD)");
  app.add_option("--seed", spec.seed, "Generator seed");
  app.add_option("--target", target, "Planted target")->check(CLI::IsMember({"linear", "threshold"}));
  app.add_option("--noise", spec.noise, "Uniform noise half-width");
  app.add_option("--pollution-missing", spec.pollution_missing_rate, "Missing rate of pollution values");
  app.add_option("--satellite-missing", spec.satellite_missing_rate, "Missing rate of satellite values");
  app.add_flag("--rasters", spec.satellite_rasters, "Also write daily satellite rasters");
  CLI11_PARSE(app, argc, argv);

  try {
    spec.start = aqcast::CivilDate::parse(start);
    spec.target = target == "linear" ? aqcast::PlantedTarget::linear : aqcast::PlantedTarget::threshold;
    const auto paths = aqcast::generate_fixture(spec, dir);
    std::cout << paths.config.string() << '\n';
  } catch (const aqcast::Error& e) {
    std::cerr << "error (" << e.kind() << "): " << e.what() << '\n';
    return static_cast<int>(e.error_class());
  }
  return 0;
}
