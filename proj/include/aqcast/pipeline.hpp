#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aqcast/config.hpp"
#include "aqcast/data_model.hpp"
#include "aqcast/evaluate.hpp"
#include "aqcast/ingest.hpp"

namespace aqcast {

// Reads every configured source and assembles the station dataset.
StationDataset load_dataset(const RunConfig& config, Inputs inputs = Inputs::full);

// Model file for one (pollutant, kind, w) under a models directory.
std::filesystem::path model_path(const std::filesystem::path& models_dir, Pollutant p, ModelKind kind, int w);

// Source-level checks; writes validation.json into the output directory.
ValidationReport cmd_validate(const RunConfig& config);

// Writes missingness.csv and returns its path.
std::filesystem::path cmd_report(const RunConfig& config);

// Fits one model per configured (pollutant, kind, w) on all samples.
std::vector<std::filesystem::path> cmd_train(const RunConfig& config);

// Leave-one-year-out over the configured grid; writes results.csv,
// results_table.csv and results_table.txt.
std::vector<CvRow> cmd_evaluate(const RunConfig& config);

struct StationPrediction {
  Pollutant pollutant = Pollutant::PM10;
  ModelKind model = ModelKind::OLS;
  int w = 0;
  std::string station_id;
  CivilDate date;
  std::optional<double> value;  // missing when an input window has no data
};

// Next-day predictions for every station at `predict_date` using saved models;
// writes predictions.csv.
std::vector<StationPrediction> cmd_predict(const RunConfig& config);

struct GridPrediction {
  std::size_t cell_id = 0;
  double x = 0.0;
  double y = 0.0;
  std::optional<double> value;
};

// Applies the station-trained model of `config.grid` to every cell center of the
// grid at `predict_date`. Cells are numbered row-major from the south-west corner.
// Writes grid_predictions.csv.
std::vector<GridPrediction> cmd_predict_grid(const RunConfig& config);

// A saved model must expect exactly the feature layout of window length w; throws
// DimensionMismatch otherwise.
void check_model_layout(const ForecastModel& model, int w);

} // namespace aqcast
