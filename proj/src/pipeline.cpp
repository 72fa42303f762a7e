#include "aqcast/pipeline.hpp"

#include <atomic>
#include <exception>
#include <thread>

#include <json.hpp>

#include "aqcast/csv.hpp"
#include "aqcast/errors.hpp"
#include "aqcast/features.hpp"
#include "aqcast/log.hpp"
#include "aqcast/raster.hpp"

namespace aqcast {

namespace {

// Runs fn(0..n-1) on up to `workers` threads. Results must be written by index; the
// exception of the lowest failing index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(workers, n); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct LoadedSources {
  std::vector<Station> stations;
  std::optional<PollutionTable> pollution;
  SatelliteTable satellite;
  WeatherTable weather;
};

SatelliteTable load_satellite(const RunConfig& config, const std::vector<Station>& stations) {
  if (config.satellite_csv) return read_satellite_csv(*config.satellite_csv, stations);
  const SatelliteRasterIndex index(*config.satellite_rasters);
  if (!index.first()) throw IoError("no satellite rasters in " + config.satellite_rasters->string());
  return extract_satellite(index, stations, *index.first(), *index.last());
}

LoadedSources load_sources(const RunConfig& config, Inputs inputs) {
  check_inputs_exist(config, inputs);
  LoadedSources src;
  src.stations = read_stations(config.stations);
  log::info("read " + std::to_string(src.stations.size()) + " stations");
  if (inputs == Inputs::full) src.pollution = read_pollution(config.pollution, src.stations);
  src.weather = read_weather(config.weather);
  src.satellite = load_satellite(config, src.stations);
  return src;
}

StaticLayers load_layers(const RunConfig& config) {
  return StaticLayers{load_grid(config.dem), load_grid(config.landcover), load_classmap(config.classmap)};
}

std::string date_text(const std::optional<CivilDate>& d) { return d ? d->to_string() : std::string(); }

struct Job {
  Pollutant pollutant;
  ModelKind model;
  int w;
};

std::vector<Job> job_grid(const RunConfig& config) {
  std::vector<Job> jobs;
  for (auto p : config.pollutants) {
    for (auto m : config.models) {
      for (int w : config.windows) jobs.push_back({p, m, w});
    }
  }
  return jobs;
}

// Windows per (pollutant, w), built once and shared by the model kinds.
std::map<std::pair<Pollutant, int>, WindowSet> build_all_windows(const StationDataset& prepared,
                                                                 const RunConfig& config) {
  std::map<std::pair<Pollutant, int>, WindowSet> out;
  for (auto p : config.pollutants) {
    for (int w : config.windows) {
      auto set = build_windows(prepared, p, WindowConfig{w});
      log::info(std::string(to_string(p)) + " w=" + std::to_string(w) + ": " +
                std::to_string(set.samples.size()) + " samples, " + std::to_string(set.dropped_missing_target) +
                " dropped for missing target, " + std::to_string(set.dropped_missing_features) +
                " for missing inputs");
      if (set.empty_output()) log::warn("no valid sample for " + std::string(to_string(p)) + " w=" + std::to_string(w));
      out.emplace(std::make_pair(p, w), std::move(set));
    }
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = csv::open_output(path);
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::optional<double> predict_features(const ForecastModel& model, std::optional<std::vector<double>> features) {
  if (!features) return std::nullopt;
  const FeatureLayout layout(model.w);
  apply_normalizer(model.normalizer, layout, *features);
  return predict_one(model, *features);
}

CivilDate require_predict_date(const RunConfig& config) {
  if (!config.predict_date) throw ConfigError("config key 'predict_date' is required for prediction");
  return *config.predict_date;
}

} // namespace

StationDataset load_dataset(const RunConfig& config, Inputs inputs) {
  auto src = load_sources(config, inputs);
  auto topo = compute_topo(load_layers(config), src.stations);
  return assemble_dataset(std::move(src.stations), src.pollution, src.satellite, src.weather, std::move(topo));
}

std::filesystem::path model_path(const std::filesystem::path& models_dir, Pollutant p, ModelKind kind, int w) {
  return models_dir / (std::string(to_string(p)) + "_" + std::string(to_string(kind)) + "_w" + std::to_string(w) + ".json");
}

void check_model_layout(const ForecastModel& model, int w) {
  const FeatureLayout layout(w);
  if (model.n_features() != layout.size()) {
    throw DimensionMismatch("model expects " + std::to_string(model.n_features()) + " features but w=" +
                            std::to_string(w) + " inputs produce " + std::to_string(layout.size()));
  }
  if (model.w != w || model.feature_names != layout.names()) {
    throw DimensionMismatch("model feature order differs from the w=" + std::to_string(w) + " layout");
  }
}

// ---------------------------------------------------------------------------

ValidationReport cmd_validate(const RunConfig& config) {
  const auto src = load_sources(config, Inputs::full);
  auto report = validate_dataset(src.stations, *src.pollution, src.satellite, src.weather);

  nlohmann::json doc;
  doc["ok"] = report.ok();
  doc["coverage"] = nlohmann::json::array();
  for (const auto& c : report.coverage) {
    doc["coverage"].push_back({{"source", c.source}, {"first", date_text(c.first)}, {"last", date_text(c.last)},
                               {"n_values", c.n_values}, {"n_missing", c.n_missing}});
  }
  doc["violations"] = nlohmann::json::array();
  for (const auto& v : report.violations) {
    doc["violations"].push_back(
        {{"source", v.source}, {"station_id", v.station_id}, {"date", date_text(v.date)}, {"message", v.message}});
  }
  write_text(config.output_dir / "validation.json", doc.dump(2) + "\n");
  return report;
}

std::filesystem::path cmd_report(const RunConfig& config) {
  const auto dataset = load_dataset(config, Inputs::full);
  const auto path = config.output_dir / "missingness.csv";
  write_missingness_csv(missingness_report(dataset), path);
  return path;
}

std::vector<std::filesystem::path> cmd_train(const RunConfig& config) {
  const auto prepared = prepare_dataset(load_dataset(config, Inputs::full));
  const auto windows = build_all_windows(prepared, config);
  const auto jobs = job_grid(config);
  std::vector<std::filesystem::path> paths(jobs.size());
  std::filesystem::create_directories(config.model_directory());
  parallel_for(jobs.size(), config.workers, [&](std::size_t i) {
    const auto& job = jobs[i];
    const auto& set = windows.at({job.pollutant, job.w});
    if (set.empty_output()) {
      throw EmptyInput("no training samples for " + std::string(to_string(job.pollutant)) + " w=" + std::to_string(job.w));
    }
    std::vector<const WindowedSample*> all;
    for (const auto& s : set.samples) all.push_back(&s);
    const auto model = train_model(set, all, job.model, config.learners);
    paths[i] = model_path(config.model_directory(), job.pollutant, job.model, job.w);
    save_model(model, paths[i]);
  });
  return paths;
}

std::vector<CvRow> cmd_evaluate(const RunConfig& config) {
  const auto prepared = prepare_dataset(load_dataset(config, Inputs::full));
  const auto windows = build_all_windows(prepared, config);
  if (config.write_features) {
    for (const auto& [key, set] : windows) {
      write_features_csv(set, config.output_dir / ("features_" + std::string(to_string(key.first)) + "_w" +
                                                   std::to_string(key.second) + ".csv"));
    }
  }
  const auto jobs = job_grid(config);
  std::vector<CvReport> reports(jobs.size());
  parallel_for(jobs.size(), config.workers, [&](std::size_t i) {
    const auto& job = jobs[i];
    reports[i] = loyo_cv(windows.at({job.pollutant, job.w}), job.model, config.learners);
    log::info(std::string(to_string(job.pollutant)) + " " + std::string(to_string(job.model)) + " w=" +
              std::to_string(job.w) + ": MAE " + csv::format_double(reports[i].back().mae));
  });
  std::vector<CvRow> rows;
  for (const auto& r : reports) rows.insert(rows.end(), r.begin(), r.end());
  write_results_csv(rows, config.output_dir / "results.csv");
  const auto table = results_table(rows, config.pollutants, config.models, config.windows);
  write_text(config.output_dir / "results_table.csv", table.csv);
  write_text(config.output_dir / "results_table.txt", table.text);
  return rows;
}

std::vector<StationPrediction> cmd_predict(const RunConfig& config) {
  const CivilDate t = require_predict_date(config);
  const auto prepared = prepare_dataset(load_dataset(config, Inputs::without_pollution));
  std::vector<StationPrediction> out;
  for (const auto& job : job_grid(config)) {
    const auto model = load_model(model_path(config.model_directory(), job.pollutant, job.model, job.w));
    check_model_layout(model, job.w);
    if (model.pollutant != job.pollutant || model.kind != job.model) {
      throw CorruptModel("model file contents do not match its name for " + std::string(to_string(job.pollutant)) +
                         "/" + std::string(to_string(job.model)) + "/w=" + std::to_string(job.w));
    }
    for (std::size_t s = 0; s < prepared.stations.size(); ++s) {
      StationPrediction p{job.pollutant, job.model, job.w, prepared.stations[s].id, t, std::nullopt};
      p.value = predict_features(model, station_features(prepared, s, t, job.w));
      out.push_back(std::move(p));
    }
  }
  auto file = csv::open_output(config.output_dir / "predictions.csv");
  file << "pollutant,model,w,station_id,date,prediction\n";
  for (const auto& p : out) {
    file << to_string(p.pollutant) << ',' << to_string(p.model) << ',' << p.w << ',' << p.station_id << ','
         << p.date.to_string() << ',' << (p.value ? csv::format_double(*p.value) : std::string()) << '\n';
  }
  return out;
}

std::vector<GridPrediction> cmd_predict_grid(const RunConfig& config) {
  const CivilDate t = require_predict_date(config);
  if (!config.grid) throw ConfigError("config key 'grid' is required for predict-grid");
  if (!config.satellite_rasters) throw ConfigError("predict-grid needs 'satellite_rasters'");
  const GridSpec& grid = *config.grid;
  grid.validate();
  check_inputs_exist(config, Inputs::without_pollution);

  const auto model = load_model(model_path(config.model_directory(), grid.pollutant, grid.model, grid.w));
  check_model_layout(model, grid.w);

  // Every cell center stands in for a station; the same assembly path as cmd_predict.
  const std::size_t nx = grid.n_cols();
  const std::size_t ny = grid.n_rows();
  std::vector<Station> cells;
  cells.reserve(nx * ny);
  for (std::size_t r = 0; r < ny; ++r) {
    for (std::size_t c = 0; c < nx; ++c) {
      Station cell;
      cell.id = "cell" + std::to_string(r * nx + c);
      cell.measured.insert(grid.pollutant);
      cell.projected = ProjectedPoint{grid.xmin + (static_cast<double>(c) + 0.5) * grid.cell_size,
                                      grid.ymin + (static_cast<double>(r) + 0.5) * grid.cell_size};
      cells.push_back(std::move(cell));
    }
  }
  const auto weather = read_weather(config.weather);
  const SatelliteRasterIndex index(*config.satellite_rasters);
  if (!index.first()) throw IoError("no satellite rasters in " + config.satellite_rasters->string());
  const auto satellite = extract_satellite(index, cells, *index.first(), *index.last());
  auto topo = compute_topo(load_layers(config), cells);
  const auto prepared = prepare_dataset(assemble_dataset(cells, std::nullopt, satellite, weather, std::move(topo)));

  std::vector<GridPrediction> out(cells.size());
  parallel_for(cells.size(), config.workers, [&](std::size_t i) {
    out[i] = GridPrediction{i, cells[i].projected->x, cells[i].projected->y,
                            predict_features(model, station_features(prepared, i, t, grid.w))};
  });
  auto file = csv::open_output(config.output_dir / "grid_predictions.csv");
  file << "cell_id,x,y,prediction\n";
  for (const auto& g : out) {
    file << g.cell_id << ',' << csv::format_double(g.x) << ',' << csv::format_double(g.y) << ','
         << (g.value ? csv::format_double(*g.value) : std::string()) << '\n';
  }
  return out;
}

} // namespace aqcast
