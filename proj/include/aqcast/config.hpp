#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aqcast/data_model.hpp"
#include "aqcast/evaluate.hpp"
#include "aqcast/models.hpp"

namespace aqcast {

struct GridSpec {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;
  double cell_size = 500.0;
  // The station-trained model applied to every cell.
  Pollutant pollutant = Pollutant::PM10;
  ModelKind model = ModelKind::GBT;
  int w = 7;

  void validate() const;
  std::size_t n_cols() const noexcept;
  std::size_t n_rows() const noexcept;
};

struct RunConfig {
  std::filesystem::path stations;
  std::filesystem::path pollution;
  std::filesystem::path weather;
  std::optional<std::filesystem::path> satellite_csv;
  std::optional<std::filesystem::path> satellite_rasters;
  std::filesystem::path dem;
  std::filesystem::path landcover;
  std::filesystem::path classmap;

  std::vector<Pollutant> pollutants{kAllPollutants.begin(), kAllPollutants.end()};
  std::vector<ModelKind> models{kAllModelKinds.begin(), kAllModelKinds.end()};
  std::vector<int> windows{1, 7, 14};
  LearnerConfig learners;

  std::filesystem::path output_dir{"out"};
  std::optional<std::filesystem::path> models_dir;  // defaults to output_dir/models
  std::uint64_t seed = 42;
  std::size_t workers = 1;
  bool write_features = false;

  std::optional<CivilDate> predict_date;
  std::optional<GridSpec> grid;

  std::filesystem::path model_directory() const { return models_dir ? *models_dir : output_dir / "models"; }
  // Seed applies to every stochastic learner.
  void set_seed(std::uint64_t s) noexcept {
    seed = s;
    learners.sgd.seed = s;
  }
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

// JSON config; relative paths resolve against the config file's directory. Path keys
// can be overridden by AQCAST_<KEY> environment variables (e.g. AQCAST_WEATHER).
// Unknown keys and invalid values throw ConfigError.
RunConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env);
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir,
                       const EnvLookup& env = process_env);

enum class Inputs { full, without_pollution };

// Throws ConfigError if a referenced input does not exist.
void check_inputs_exist(const RunConfig& config, Inputs inputs);

} // namespace aqcast
