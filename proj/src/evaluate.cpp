#include "aqcast/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "aqcast/csv.hpp"
#include "aqcast/errors.hpp"

namespace aqcast {

namespace {

void check_pair(std::span<const double> pred, std::span<const double> actual) {
  if (pred.size() != actual.size()) {
    throw LengthMismatch("prediction length " + std::to_string(pred.size()) + " != actual length " +
                         std::to_string(actual.size()));
  }
  if (pred.empty()) throw EmptyInput("metric over zero samples");
}

} // namespace

double mae(std::span<const double> pred, std::span<const double> actual) {
  check_pair(pred, actual);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - actual[i]);
  return s / static_cast<double>(pred.size());
}

double rmse(std::span<const double> pred, std::span<const double> actual) {
  check_pair(pred, actual);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - actual[i]) * (pred[i] - actual[i]);
  return std::sqrt(s / static_cast<double>(pred.size()));
}

MapeResult mape(std::span<const double> pred, std::span<const double> actual) {
  check_pair(pred, actual);
  MapeResult out;
  double s = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (std::abs(actual[i]) < kMapeMinActual) {
      ++out.excluded;
      continue;
    }
    s += std::abs(pred[i] - actual[i]) / std::abs(actual[i]);
    ++used;
  }
  if (used == 0) throw AllExcluded("every actual value is below " + csv::format_double(kMapeMinActual));
  out.value = s / static_cast<double>(used);
  return out;
}

std::vector<FoldSpec> make_folds(const std::vector<WindowedSample>& samples) {
  std::set<int> years;
  for (const auto& s : samples) years.insert(s.target_date.year);
  if (years.size() < 2) {
    throw InsufficientYears("leave-one-year-out needs samples from at least two years, found " +
                            std::to_string(years.size()));
  }
  std::vector<FoldSpec> folds;
  for (int test : years) {
    FoldSpec f{test, {}};
    for (int y : years) {
      if (y != test) f.train_years.push_back(y);
    }
    folds.push_back(std::move(f));
  }
  return folds;
}

ForecastModel train_model(const WindowSet& windows, const std::vector<const WindowedSample*>& train,
                          ModelKind kind, const LearnerConfig& config) {
  if (train.empty()) throw EmptyInput("no training samples");
  Normalizer normalizer = fit_normalizer(train, windows.layout);
  FeatureMatrix x;
  std::vector<double> y;
  y.reserve(train.size());
  for (const auto* s : train) {
    std::vector<double> f = s->features;
    apply_normalizer(normalizer, windows.layout, f);
    x.append_row(f);
    y.push_back(s->target);
  }
  ForecastModel model;
  switch (kind) {
    case ModelKind::OLS: model = fit_ols(x, y); break;
    case ModelKind::SGD: model = fit_sgd(x, y, config.sgd); break;
    case ModelKind::GBT: model = fit_gbt(x, y, config.gbt); break;
  }
  model.pollutant = windows.pollutant;
  model.w = windows.layout.w();
  model.feature_names = windows.layout.names();
  model.normalizer = std::move(normalizer);
  return model;
}

CvReport loyo_cv(const WindowSet& windows, ModelKind kind, const LearnerConfig& config) {
  const auto folds = make_folds(windows.samples);
  CvReport report;
  CvRow total{windows.pollutant, kind, windows.layout.w(), std::nullopt};
  for (const auto& fold : folds) {
    std::vector<const WindowedSample*> train, test;
    for (const auto& s : windows.samples) {
      (s.target_date.year == fold.test_year ? test : train).push_back(&s);
    }
    const ForecastModel model = train_model(windows, train, kind, config);
    std::vector<double> pred, actual;
    for (const auto* s : test) {
      std::vector<double> f = s->features;
      apply_normalizer(model.normalizer, windows.layout, f);
      pred.push_back(predict_one(model, f));
      actual.push_back(s->target);
    }
    CvRow row{windows.pollutant, kind, windows.layout.w(), fold.test_year};
    row.mae = mae(pred, actual);
    const auto m = mape(pred, actual);
    row.mape = m.value;
    row.n_mape_excluded = m.excluded;
    row.rmse = rmse(pred, actual);
    row.n_samples = test.size();
    total.mae += row.mae;
    total.mape += row.mape;
    total.rmse += row.rmse;
    total.n_samples += row.n_samples;
    total.n_mape_excluded += row.n_mape_excluded;
    report.push_back(row);
  }
  const auto k = static_cast<double>(folds.size());
  total.mae /= k;
  total.mape /= k;
  total.rmse /= k;
  report.push_back(total);
  return report;
}

CvReport loyo_cv(const StationDataset& dataset, Pollutant p, ModelKind kind, int w,
                 const LearnerConfig& config) {
  const WindowSet windows = build_windows(prepare_dataset(dataset), p, WindowConfig{w});
  return loyo_cv(windows, kind, config);
}

void write_results_csv(const std::vector<CvRow>& rows, const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  out << "pollutant,model,w,fold_year,mae,mape,rmse,n_samples,n_mape_excluded\n";
  for (const auto& r : rows) {
    out << to_string(r.pollutant) << ',' << to_string(r.model) << ',' << r.w << ','
        << (r.fold_year ? std::to_string(*r.fold_year) : std::string("ALL")) << ','
        << csv::format_double(r.mae) << ',' << csv::format_double(r.mape) << ','
        << csv::format_double(r.rmse) << ',' << r.n_samples << ',' << r.n_mape_excluded << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

} // namespace

ResultsTable results_table(const std::vector<CvRow>& rows, const std::vector<Pollutant>& pollutants,
                           const std::vector<ModelKind>& models, const std::vector<int>& windows) {
  using Key = std::tuple<Pollutant, ModelKind, int>;
  std::map<Key, const CvRow*> cells;
  for (const auto& r : rows) {
    if (!r.fold_year) cells[{r.pollutant, r.model, r.w}] = &r;
  }
  std::vector<std::string> missing;
  for (auto p : pollutants) {
    for (auto m : models) {
      for (int w : windows) {
        if (!cells.count({p, m, w})) {
          missing.push_back(std::string(to_string(p)) + "/" + std::string(to_string(m)) + "/w=" + std::to_string(w));
        }
      }
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw MissingCell("results table lacks aggregate rows for: " + list);
  }

  ResultsTable table;
  std::ostringstream csv_out;
  csv_out << "pollutant,model,w,mae,mape,rmse\n";
  for (auto p : pollutants) {
    for (auto m : models) {
      for (int w : windows) {
        const auto* c = cells.at({p, m, w});
        csv_out << to_string(p) << ',' << table_label(m) << ',' << w << ',' << csv::format_double(c->mae)
                << ',' << csv::format_double(c->mape) << ',' << csv::format_double(c->rmse) << '\n';
      }
    }
  }
  table.csv = csv_out.str();

  constexpr std::size_t kCol = 15;  // widest %.4g value plus the bold markers and a space
  std::ostringstream text;
  text << pad("Pollutant", 10) << pad("Model", 9);
  for (int w : windows) {
    text << "| " << pad("w = " + std::to_string(w), 3 * kCol);
  }
  text << '\n' << pad("", 19);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    text << "| " << pad("MAE", kCol) << pad("MAPE", kCol) << pad("RMSE", kCol);
  }
  text << '\n';
  for (auto p : pollutants) {
    for (auto m : models) {
      text << pad(std::string(to_string(p)), 10) << pad(std::string(table_label(m)), 9);
      for (int w : windows) {
        text << "| ";
        const auto* c = cells.at({p, m, w});
        const std::array<double, 3> values{c->mae, c->mape, c->rmse};
        for (std::size_t metric = 0; metric < 3; ++metric) {
          bool best = true;
          for (auto other : models) {
            const auto* o = cells.at({p, other, w});
            const std::array<double, 3> ov{o->mae, o->mape, o->rmse};
            if (ov[metric] < values[metric]) best = false;
          }
          const std::string cell = short_number(values[metric]);
          text << pad(best && models.size() > 1 ? "**" + cell + "**" : cell, kCol);
        }
      }
      text << '\n';
    }
  }
  table.text = text.str();
  return table;
}

} // namespace aqcast
