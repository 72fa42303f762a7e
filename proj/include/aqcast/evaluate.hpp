#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aqcast/features.hpp"
#include "aqcast/models.hpp"

namespace aqcast {

double mae(std::span<const double> pred, std::span<const double> actual);
double rmse(std::span<const double> pred, std::span<const double> actual);

// Actuals with |a| below this are excluded from MAPE.
inline constexpr double kMapeMinActual = 1e-6;

struct MapeResult {
  double value = 0.0;  // fraction, not percent
  std::size_t excluded = 0;
};

MapeResult mape(std::span<const double> pred, std::span<const double> actual);

struct FoldSpec {
  int test_year = 0;
  std::vector<int> train_years;
};

// One fold per distinct target year, ascending. Throws InsufficientYears below two.
std::vector<FoldSpec> make_folds(const std::vector<WindowedSample>& samples);

struct LearnerConfig {
  SgdConfig sgd;
  GbtConfig gbt;
};

struct CvRow {
  Pollutant pollutant = Pollutant::PM10;
  ModelKind model = ModelKind::OLS;
  int w = 0;
  std::optional<int> fold_year;  // nullopt for the aggregate row
  double mae = 0.0;
  double mape = 0.0;
  double rmse = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_mape_excluded = 0;
};

// Fold rows in year order followed by one aggregate row (unweighted fold mean).
using CvReport = std::vector<CvRow>;

// Fits the normalizer and the model on training rows and evaluates the test rows.
ForecastModel train_model(const WindowSet& windows, const std::vector<const WindowedSample*>& train,
                          ModelKind kind, const LearnerConfig& config);

// Leave-one-year-out cross-validation on prebuilt (unscaled) windows.
CvReport loyo_cv(const WindowSet& windows, ModelKind kind, const LearnerConfig& config);
CvReport loyo_cv(const StationDataset& dataset, Pollutant p, ModelKind kind, int w,
                 const LearnerConfig& config);

// `results.csv`: pollutant,model,w,fold_year,mae,mape,rmse,n_samples,n_mape_excluded.
void write_results_csv(const std::vector<CvRow>& rows, const std::filesystem::path& path);

struct ResultsTable {
  std::string csv;   // pollutant,model,w,mae,mape,rmse
  std::string text;  // aligned, best model per (pollutant, w, metric) wrapped in **
};

// Throws MissingCell naming every requested combination without an aggregate row.
ResultsTable results_table(const std::vector<CvRow>& rows, const std::vector<Pollutant>& pollutants,
                           const std::vector<ModelKind>& models, const std::vector<int>& windows);

} // namespace aqcast
