#include "aqcast/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "aqcast/errors.hpp"

namespace aqcast {

using nlohmann::json;

void GridSpec::validate() const {
  if (!(cell_size > 0.0)) throw ConfigError("grid cell_size must be > 0");
  if (!(xmax > xmin) || !(ymax > ymin)) throw ConfigError("grid bounding box must have positive area");
  if (w < 1) throw ConfigError("grid w must be >= 1");
}

namespace {

std::size_t cell_count(double extent, double size) {
  // Tolerate round-off so that 5000 / 500 gives 10 cells, not 11.
  return static_cast<std::size_t>(std::ceil(extent / size - 1e-9));
}

} // namespace

std::size_t GridSpec::n_cols() const noexcept { return cell_count(xmax - xmin, cell_size); }
std::size_t GridSpec::n_rows() const noexcept { return cell_count(ymax - ymin, cell_size); }

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

namespace {

const std::set<std::string> kTopKeys{
    "stations", "pollution", "weather", "satellite_csv", "satellite_rasters", "dem", "landcover",
    "classmap", "pollutants", "models", "windows", "sgd", "gbt", "output_dir", "models_dir",
    "seed", "workers", "write_features", "predict_date", "grid"};

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown config key '" + where + key + "'");
  }
}

template <typename T>
T get(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + key + "' has the wrong type");
  }
}

} // namespace

RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir,
                       const EnvLookup& env) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc, kTopKeys, "");

  RunConfig cfg;
  auto resolve = [&](const std::string& key) -> std::optional<std::filesystem::path> {
    std::string upper = "AQCAST_";
    for (char c : key) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (auto v = env(upper)) return std::filesystem::path(*v);
    if (!doc.contains(key)) return std::nullopt;
    std::filesystem::path p = get<std::string>(doc, key, "");
    return p.is_absolute() ? p : base_dir / p;
  };
  auto required = [&](const std::string& key) {
    return resolve(key).value_or(std::filesystem::path{});
  };
  cfg.stations = required("stations");
  cfg.pollution = required("pollution");
  cfg.weather = required("weather");
  cfg.satellite_csv = resolve("satellite_csv");
  cfg.satellite_rasters = resolve("satellite_rasters");
  cfg.dem = required("dem");
  cfg.landcover = required("landcover");
  cfg.classmap = required("classmap");
  if (auto out = resolve("output_dir")) cfg.output_dir = *out;
  else cfg.output_dir = base_dir / "out";
  cfg.models_dir = resolve("models_dir");

  if (doc.contains("pollutants")) {
    cfg.pollutants.clear();
    for (const auto& name : get<std::vector<std::string>>(doc, "pollutants", "")) {
      try {
        cfg.pollutants.push_back(parse_pollutant(name));
      } catch (const UnknownPollutant& e) {
        throw ConfigError(e.what());
      }
    }
    if (cfg.pollutants.empty()) throw ConfigError("config lists no pollutants");
  }
  if (doc.contains("models")) {
    cfg.models.clear();
    for (const auto& name : get<std::vector<std::string>>(doc, "models", "")) {
      cfg.models.push_back(parse_model_kind(name));
    }
    if (cfg.models.empty()) throw ConfigError("config lists no models");
  }
  if (doc.contains("windows")) {
    cfg.windows = get<std::vector<int>>(doc, "windows", "");
    if (cfg.windows.empty()) throw ConfigError("config lists no window lengths");
    for (int w : cfg.windows) {
      if (w < 1) throw ConfigError("window lengths must be >= 1, got " + std::to_string(w));
    }
  }
  if (doc.contains("seed")) cfg.set_seed(get<std::uint64_t>(doc, "seed", ""));
  if (doc.contains("sgd")) {
    const auto& s = doc.at("sgd");
    reject_unknown(s, {"initial_rate", "decay", "epochs", "l2", "seed"}, "sgd.");
    if (s.contains("initial_rate")) cfg.learners.sgd.initial_rate = get<double>(s, "initial_rate", "sgd.");
    if (s.contains("decay")) cfg.learners.sgd.decay = get<double>(s, "decay", "sgd.");
    if (s.contains("epochs")) cfg.learners.sgd.epochs = get<int>(s, "epochs", "sgd.");
    if (s.contains("l2")) cfg.learners.sgd.l2 = get<double>(s, "l2", "sgd.");
    if (s.contains("seed")) cfg.learners.sgd.seed = get<std::uint64_t>(s, "seed", "sgd.");
  }
  if (doc.contains("gbt")) {
    const auto& g = doc.at("gbt");
    reject_unknown(g, {"n_trees", "learning_rate", "max_depth", "min_samples_leaf"}, "gbt.");
    if (g.contains("n_trees")) cfg.learners.gbt.n_trees = get<int>(g, "n_trees", "gbt.");
    if (g.contains("learning_rate")) cfg.learners.gbt.learning_rate = get<double>(g, "learning_rate", "gbt.");
    if (g.contains("max_depth")) cfg.learners.gbt.max_depth = get<int>(g, "max_depth", "gbt.");
    if (g.contains("min_samples_leaf")) {
      const int leaf = get<int>(g, "min_samples_leaf", "gbt.");
      if (leaf < 1) throw ConfigError("gbt min_samples_leaf must be >= 1");
      cfg.learners.gbt.min_samples_leaf = static_cast<std::size_t>(leaf);
    }
  }
  cfg.learners.sgd.validate();
  cfg.learners.gbt.validate();
  if (doc.contains("workers")) {
    const int workers = get<int>(doc, "workers", "");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    cfg.workers = static_cast<std::size_t>(workers);
  }
  if (doc.contains("write_features")) cfg.write_features = get<bool>(doc, "write_features", "");
  if (doc.contains("predict_date")) {
    auto d = CivilDate::try_parse(get<std::string>(doc, "predict_date", ""));
    if (!d) throw ConfigError("predict_date must be an ISO-8601 date");
    cfg.predict_date = d;
  }
  if (doc.contains("grid")) {
    const auto& g = doc.at("grid");
    reject_unknown(g, {"xmin", "ymin", "xmax", "ymax", "cell_size", "pollutant", "model", "w"}, "grid.");
    GridSpec spec;
    spec.xmin = get<double>(g, "xmin", "grid.");
    spec.ymin = get<double>(g, "ymin", "grid.");
    spec.xmax = get<double>(g, "xmax", "grid.");
    spec.ymax = get<double>(g, "ymax", "grid.");
    if (g.contains("cell_size")) spec.cell_size = get<double>(g, "cell_size", "grid.");
    if (g.contains("pollutant")) {
      try {
        spec.pollutant = parse_pollutant(get<std::string>(g, "pollutant", "grid."));
      } catch (const UnknownPollutant& e) {
        throw ConfigError(e.what());
      }
    }
    if (g.contains("model")) spec.model = parse_model_kind(get<std::string>(g, "model", "grid."));
    if (g.contains("w")) spec.w = get<int>(g, "w", "grid.");
    spec.validate();
    cfg.grid = spec;
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const EnvLookup& env) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_config(text.str(), base, env);
}

void check_inputs_exist(const RunConfig& config, Inputs inputs) {
  auto need = [](const std::filesystem::path& p, const std::string& key) {
    if (p.empty()) throw ConfigError("config is missing required key '" + key + "'");
    if (!std::filesystem::exists(p)) throw ConfigError("input '" + key + "' not found: " + p.string());
  };
  need(config.stations, "stations");
  if (inputs == Inputs::full) need(config.pollution, "pollution");
  need(config.weather, "weather");
  need(config.dem, "dem");
  need(config.landcover, "landcover");
  need(config.classmap, "classmap");
  if (config.satellite_csv.has_value() == config.satellite_rasters.has_value()) {
    throw ConfigError("config must set exactly one of 'satellite_csv' and 'satellite_rasters'");
  }
  if (config.satellite_csv) need(*config.satellite_csv, "satellite_csv");
  if (config.satellite_rasters) need(*config.satellite_rasters, "satellite_rasters");
}

} // namespace aqcast
