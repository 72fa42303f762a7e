#include "aqcast/models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "aqcast/csv.hpp"
#include "aqcast/errors.hpp"

namespace aqcast {

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  FeatureMatrix m;
  for (const auto& r : rows) m.append_row(r);
  return m;
}

void FeatureMatrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && data_.empty()) {
    cols_ = values.size();
  } else if (values.size() != cols_) {
    throw DimensionMismatch("row has " + std::to_string(values.size()) + " values, matrix has " +
                            std::to_string(cols_) + " columns");
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::OLS: return "OLS";
    case ModelKind::SGD: return "SGD";
    case ModelKind::GBT: return "GBT";
  }
  return "?";
}

std::string_view table_label(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::OLS: return "LR";
    case ModelKind::SGD: return "SGDReg";
    case ModelKind::GBT: return "GradBst";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "OLS" || upper == "LR") return ModelKind::OLS;
  if (upper == "SGD" || upper == "SGDREG") return ModelKind::SGD;
  if (upper == "GBT" || upper == "GRADBST") return ModelKind::GBT;
  throw ConfigError("unknown model kind '" + std::string(name) + "'; valid kinds are {OLS, SGD, GBT}");
}

void SgdConfig::validate() const {
  if (!(initial_rate > 0.0) || !std::isfinite(initial_rate)) throw ConfigError("sgd initial_rate must be > 0");
  if (!(decay >= 0.0)) throw ConfigError("sgd decay must be >= 0");
  if (epochs < 0) throw ConfigError("sgd epochs must be >= 0");
  if (!(l2 >= 0.0)) throw ConfigError("sgd l2 must be >= 0");
}

void GbtConfig::validate() const {
  if (n_trees < 1) throw ConfigError("gbt n_trees must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw ConfigError("gbt learning_rate must be in (0,1]");
  if (max_depth < 0) throw ConfigError("gbt max_depth must be >= 0");
  if (min_samples_leaf < 1) throw ConfigError("gbt min_samples_leaf must be >= 1");
}

// ---------------------------------------------------------------------------

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw CorruptModel("regression tree without nodes");
  const int n = static_cast<int>(nodes_.size());
  for (const auto& node : nodes_) {
    if (!std::isfinite(node.value)) throw CorruptModel("non-finite leaf value");
    if (node.feature >= 0 && (node.left <= 0 || node.left >= n || node.right <= 0 || node.right >= n)) {
      throw CorruptModel("regression tree child index out of range");
    }
  }
}

double RegressionTree::predict(std::span<const double> x) const noexcept {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& node = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                            : node.right);
  }
  return nodes_[i].value;
}

int RegressionTree::depth() const noexcept {
  std::vector<int> depth(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (nodes_[i].feature >= 0) {
      depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
    }
  }
  return deepest;
}

// ---------------------------------------------------------------------------

namespace {

void check_training_shape(const FeatureMatrix& x, std::span<const double> y) {
  if (x.rows() != y.size()) {
    throw DimensionMismatch("design matrix has " + std::to_string(x.rows()) + " rows but " +
                            std::to_string(y.size()) + " targets");
  }
  if (x.rows() == 0) throw EmptyInput("no training samples");
}

ForecastModel bare_model(ModelKind kind, std::size_t n_features) {
  ForecastModel m;
  m.kind = kind;
  m.feature_names.reserve(n_features);
  for (std::size_t j = 0; j < n_features; ++j) m.feature_names.push_back("f" + std::to_string(j));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

} // namespace

ForecastModel fit_ols(const FeatureMatrix& x, std::span<const double> y) {
  check_training_shape(x, y);
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto p = static_cast<Eigen::Index>(x.cols());
  Eigen::MatrixXd a(n, p);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) a(i, j) = x(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::RowVectorXd col_mean = a.colwise().mean();
  const double y_mean = b.mean();
  a.rowwise() -= col_mean;
  b.array() -= y_mean;

  LinearParams params;
  params.weights.assign(static_cast<std::size_t>(p), 0.0);
  if (p > 0) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    const Eigen::VectorXd w = cod.solve(b);
    for (Eigen::Index j = 0; j < p; ++j) params.weights[static_cast<std::size_t>(j)] = w(j);
    params.intercept = y_mean - col_mean.dot(w);
  } else {
    params.intercept = y_mean;
  }
  for (double v : params.weights) {
    if (!std::isfinite(v)) throw DivergenceError("least-squares solution is not finite");
  }
  auto model = bare_model(ModelKind::OLS, x.cols());
  model.params = std::move(params);
  return model;
}

double sgd_sample_loss(std::span<const double> weights, double intercept, std::span<const double> x,
                       double y, double l2) noexcept {
  const double err = dot(weights, x) + intercept - y;
  return 0.5 * err * err + 0.5 * l2 * dot(weights, weights);
}

std::vector<double> sgd_sample_gradient(std::span<const double> weights, double intercept,
                                        std::span<const double> x, double y, double l2) {
  if (weights.size() != x.size()) throw DimensionMismatch("gradient: weight/sample size mismatch");
  const double err = dot(weights, x) + intercept - y;
  std::vector<double> g(weights.size() + 1);
  for (std::size_t j = 0; j < weights.size(); ++j) g[j] = err * x[j] + l2 * weights[j];
  g.back() = err;
  return g;
}

ForecastModel fit_sgd(const FeatureMatrix& x, std::span<const double> y, const SgdConfig& config) {
  config.validate();
  check_training_shape(x, y);
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  std::vector<double> w(p, 0.0);
  double b = 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);
  std::uint64_t step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng() % i);
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t i : order) {
      const auto row = x.row(i);
      const double err = dot(w, row) + b - y[i];
      const double eta = config.initial_rate / (1.0 + static_cast<double>(step) * config.decay);
      for (std::size_t j = 0; j < p; ++j) w[j] -= eta * (err * row[j] + config.l2 * w[j]);
      b -= eta * err;
      ++step;
      if (!std::isfinite(err) || !std::isfinite(b)) {
        throw DivergenceError("SGD loss became non-finite at epoch " + std::to_string(epoch) +
                              "; lower initial_rate");
      }
    }
    for (double v : w) {
      if (!std::isfinite(v)) throw DivergenceError("SGD weights became non-finite at epoch " + std::to_string(epoch));
    }
  }
  auto model = bare_model(ModelKind::SGD, p);
  model.params = LinearParams{std::move(w), b};
  return model;
}

// ---------------------------------------------------------------------------
// Regression trees

namespace {

// Level-wise exhaustive split search over presorted feature columns. Every impure
// node with a valid split is split. Candidate
// thresholds are midpoints between consecutive distinct values; among equal scores
// the lowest feature index and then the lowest threshold win.
constexpr double kTieTolerance = 1e-12;

class TreeBuilder {
public:
  explicit TreeBuilder(const FeatureMatrix& x) : x_(x), sorted_(x.cols()) {
    for (std::size_t f = 0; f < x.cols(); ++f) {
      auto& idx = sorted_[f];
      idx.resize(x.rows());
      std::iota(idx.begin(), idx.end(), 0u);
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
    }
  }

  RegressionTree build(std::span<const double> y, int max_depth, std::size_t min_leaf) const {
    const std::size_t n = x_.rows();
    std::vector<TreeNode> nodes(1);
    std::vector<int> node_of(n, 0);
    std::vector<int> open{0};

    for (int depth = 0; depth < max_depth && !open.empty(); ++depth) {
      std::vector<Stats> stats(nodes.size());
      for (std::size_t i = 0; i < n; ++i) {
        auto& s = stats[static_cast<std::size_t>(node_of[i])];
        ++s.count;
        s.sum += y[i];
        s.min = std::min(s.min, y[i]);
        s.max = std::max(s.max, y[i]);
      }
      std::vector<int> slot(nodes.size(), -1);
      std::vector<int> candidates;
      for (int id : open) {
        const auto& s = stats[static_cast<std::size_t>(id)];
        if (s.count >= 2 * min_leaf && !s.pure()) {
          slot[static_cast<std::size_t>(id)] = static_cast<int>(candidates.size());
          candidates.push_back(id);
        }
      }
      if (candidates.empty()) break;

      std::vector<Best> best(candidates.size());
      std::vector<Running> run(candidates.size());
      for (std::size_t f = 0; f < x_.cols(); ++f) {
        std::fill(run.begin(), run.end(), Running{});
        for (std::uint32_t i : sorted_[f]) {
          const int k = slot[static_cast<std::size_t>(node_of[i])];
          if (k < 0) continue;
          auto& r = run[static_cast<std::size_t>(k)];
          const double v = x_(i, f);
          if (r.count > 0 && v != r.last) {
            const auto& total = stats[static_cast<std::size_t>(candidates[static_cast<std::size_t>(k)])];
            const std::size_t n_right = total.count - r.count;
            if (r.count >= min_leaf && n_right >= min_leaf) {
              const double s_right = total.sum - r.sum;
              const double score = r.sum * r.sum / static_cast<double>(r.count) +
                                   s_right * s_right / static_cast<double>(n_right);
              auto& b = best[static_cast<std::size_t>(k)];
              // Scores within rounding noise count as ties and keep the earlier split.
              if (b.feature < 0 || score > b.score + kTieTolerance * std::abs(b.score)) {
                double threshold = r.last + (v - r.last) / 2.0;
                if (!(threshold < v)) threshold = r.last;
                b = {score, static_cast<int>(f), threshold};
              }
            }
          }
          ++r.count;
          r.sum += y[i];
          r.last = v;
        }
      }

      std::vector<int> next_open;
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        const int id = candidates[k];
        const auto& b = best[k];
        // Impure nodes split even without immediate gain (XOR needs a zero-gain root).
        if (b.feature < 0) continue;
        auto& node = nodes[static_cast<std::size_t>(id)];
        node.feature = b.feature;
        node.threshold = b.threshold;
        node.left = static_cast<int>(nodes.size());
        node.right = node.left + 1;
        next_open.push_back(node.left);
        next_open.push_back(node.right);
        nodes.emplace_back();
        nodes.emplace_back();
      }
      if (next_open.empty()) break;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& node = nodes[static_cast<std::size_t>(node_of[i])];
        if (node.feature < 0) continue;
        node_of[i] = x_(i, static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left : node.right;
      }
      open = std::move(next_open);
    }

    std::vector<double> sum(nodes.size(), 0.0);
    std::vector<std::size_t> count(nodes.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[static_cast<std::size_t>(node_of[i])] += y[i];
      ++count[static_cast<std::size_t>(node_of[i])];
    }
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (nodes[k].feature < 0 && count[k] > 0) nodes[k].value = sum[k] / static_cast<double>(count[k]);
    }
    return RegressionTree(std::move(nodes));
  }

private:
  struct Stats {
    std::size_t count = 0;
    double sum = 0.0;
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    bool pure() const noexcept { return !(min < max); }
  };
  struct Running {
    std::size_t count = 0;
    double sum = 0.0;
    double last = 0.0;
  };
  struct Best {
    double score = 0.0;
    int feature = -1;
    double threshold = 0.0;
  };

  const FeatureMatrix& x_;
  std::vector<std::vector<std::uint32_t>> sorted_;
};

} // namespace

RegressionTree fit_tree(const FeatureMatrix& x, std::span<const double> y, int max_depth,
                        std::size_t min_samples_leaf) {
  check_training_shape(x, y);
  if (max_depth < 0 || min_samples_leaf < 1) throw ConfigError("invalid tree limits");
  return TreeBuilder(x).build(y, max_depth, min_samples_leaf);
}

ForecastModel fit_gbt(const FeatureMatrix& x, std::span<const double> y, const GbtConfig& config) {
  config.validate();
  check_training_shape(x, y);
  if (x.rows() < 2 * config.min_samples_leaf) {
    throw ConfigError("gradient boosting needs at least " + std::to_string(2 * config.min_samples_leaf) +
                      " samples, got " + std::to_string(x.rows()));
  }
  const std::size_t n = x.rows();
  BoostedParams params;
  params.base = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  std::vector<double> current(n, params.base);
  std::vector<double> residual(n);
  const TreeBuilder builder(x);
  for (int stage = 0; stage < config.n_trees; ++stage) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - current[i];
    RegressionTree tree = builder.build(residual, config.max_depth, config.min_samples_leaf);
    for (std::size_t i = 0; i < n; ++i) current[i] += config.learning_rate * tree.predict(x.row(i));
    params.trees.push_back(std::move(tree));
    params.scales.push_back(config.learning_rate);
  }
  auto model = bare_model(ModelKind::GBT, x.cols());
  model.params = std::move(params);
  return model;
}

std::vector<double> staged_training_mse(const ForecastModel& model, const FeatureMatrix& x,
                                        std::span<const double> y) {
  const auto* params = std::get_if<BoostedParams>(&model.params);
  if (!params) throw DomainError("staged_training_mse needs a boosted model");
  check_training_shape(x, y);
  std::vector<double> current(x.rows(), params->base);
  auto mse = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) s += (y[i] - current[i]) * (y[i] - current[i]);
    return s / static_cast<double>(x.rows());
  };
  std::vector<double> out{mse()};
  for (std::size_t k = 0; k < params->trees.size(); ++k) {
    for (std::size_t i = 0; i < x.rows(); ++i) current[i] += params->scales[k] * params->trees[k].predict(x.row(i));
    out.push_back(mse());
  }
  return out;
}

// ---------------------------------------------------------------------------

double predict_one(const ForecastModel& model, std::span<const double> x) {
  if (x.size() != model.n_features()) {
    throw DimensionMismatch("model expects " + std::to_string(model.n_features()) + " features, got " +
                            std::to_string(x.size()));
  }
  if (const auto* lin = std::get_if<LinearParams>(&model.params)) {
    return lin->intercept + dot(lin->weights, x);
  }
  const auto& gb = std::get<BoostedParams>(model.params);
  double sum = 0.0;
  for (std::size_t k = 0; k < gb.trees.size(); ++k) sum += gb.scales[k] * gb.trees[k].predict(x);
  return gb.base + sum;
}

std::vector<double> predict(const ForecastModel& model, const FeatureMatrix& x) {
  if (x.rows() > 0 && x.cols() != model.n_features()) {
    throw DimensionMismatch("model expects " + std::to_string(model.n_features()) + " features, got " +
                            std::to_string(x.cols()));
  }
  std::vector<double> out;
  out.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(predict_one(model, x.row(i)));
  return out;
}

// ---------------------------------------------------------------------------
// Model files

namespace {

using nlohmann::json;

std::string fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json payload_of(const ForecastModel& model) {
  json p;
  p["kind"] = std::string(to_string(model.kind));
  p["pollutant"] = std::string(to_string(model.pollutant));
  p["w"] = model.w;
  p["feature_names"] = model.feature_names;
  json norm;
  norm["variables"] = model.normalizer.variables();
  std::vector<double> lo, hi;
  for (const auto& r : model.normalizer.ranges()) {
    lo.push_back(r.min);
    hi.push_back(r.max);
  }
  norm["min"] = lo;
  norm["max"] = hi;
  p["normalizer"] = norm;
  if (const auto* lin = std::get_if<LinearParams>(&model.params)) {
    p["params"] = {{"weights", lin->weights}, {"intercept", lin->intercept}};
  } else {
    const auto& gb = std::get<BoostedParams>(model.params);
    json trees = json::array();
    for (const auto& tree : gb.trees) {
      json t;
      std::vector<int> feature, left, right;
      std::vector<double> threshold, value;
      for (const auto& node : tree.nodes()) {
        feature.push_back(node.feature);
        threshold.push_back(node.threshold);
        left.push_back(node.left);
        right.push_back(node.right);
        value.push_back(node.value);
      }
      t["feature"] = feature;
      t["threshold"] = threshold;
      t["left"] = left;
      t["right"] = right;
      t["value"] = value;
      trees.push_back(std::move(t));
    }
    p["params"] = {{"base", gb.base}, {"trees", std::move(trees)}, {"scales", gb.scales}};
  }
  return p;
}

ForecastModel model_of(const json& p) {
  ForecastModel m;
  m.kind = parse_model_kind(p.at("kind").get<std::string>());
  m.pollutant = parse_pollutant(p.at("pollutant").get<std::string>());
  m.w = p.at("w").get<int>();
  m.feature_names = p.at("feature_names").get<std::vector<std::string>>();
  const auto& norm = p.at("normalizer");
  auto lo = norm.at("min").get<std::vector<double>>();
  auto hi = norm.at("max").get<std::vector<double>>();
  if (lo.size() != hi.size()) throw CorruptModel("normalizer min/max length mismatch");
  std::vector<ValueRange> ranges;
  for (std::size_t k = 0; k < lo.size(); ++k) ranges.push_back({lo[k], hi[k]});
  m.normalizer = Normalizer(norm.at("variables").get<std::vector<std::string>>(), std::move(ranges));
  const auto& params = p.at("params");
  if (m.kind == ModelKind::GBT) {
    BoostedParams gb;
    gb.base = params.at("base").get<double>();
    gb.scales = params.at("scales").get<std::vector<double>>();
    for (const auto& t : params.at("trees")) {
      auto feature = t.at("feature").get<std::vector<int>>();
      auto threshold = t.at("threshold").get<std::vector<double>>();
      auto left = t.at("left").get<std::vector<int>>();
      auto right = t.at("right").get<std::vector<int>>();
      auto value = t.at("value").get<std::vector<double>>();
      const std::size_t n = feature.size();
      if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n) {
        throw CorruptModel("tree arrays have inconsistent lengths");
      }
      std::vector<TreeNode> nodes(n);
      for (std::size_t k = 0; k < n; ++k) {
        if (feature[k] >= static_cast<int>(m.feature_names.size())) {
          throw CorruptModel("tree splits on feature index beyond the feature list");
        }
        nodes[k] = {feature[k], threshold[k], left[k], right[k], value[k]};
      }
      gb.trees.emplace_back(std::move(nodes));
    }
    if (gb.scales.size() != gb.trees.size()) throw CorruptModel("tree/scale count mismatch");
    m.params = std::move(gb);
  } else {
    LinearParams lin;
    lin.weights = params.at("weights").get<std::vector<double>>();
    lin.intercept = params.at("intercept").get<double>();
    if (lin.weights.size() != m.feature_names.size()) {
      throw DimensionMismatch("model file has " + std::to_string(lin.weights.size()) + " weights for " +
                              std::to_string(m.feature_names.size()) + " features");
    }
    m.params = std::move(lin);
  }
  return m;
}

} // namespace

void save_model(const ForecastModel& model, const std::filesystem::path& path) {
  const json payload = payload_of(model);
  json doc;
  doc["format"] = "aqcast-model";
  doc["version"] = kModelFormatVersion;
  doc["checksum"] = fnv1a64(payload.dump());
  doc["payload"] = payload;
  auto out = csv::open_output(path);
  out << doc.dump(1) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

ForecastModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buffer.str());
  } catch (const json::exception& e) {
    throw CorruptModel(path.string() + ": unreadable model file (" + e.what() + ")");
  }
  try {
    if (!doc.is_object() || doc.value("format", "") != "aqcast-model") {
      throw CorruptModel(path.string() + ": not a model file");
    }
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw VersionError(path.string() + ": unsupported model format version " + std::to_string(version) +
                         " (supported: " + std::to_string(kModelFormatVersion) + ")");
    }
    const auto& payload = doc.at("payload");
    if (fnv1a64(payload.dump()) != doc.at("checksum").get<std::string>()) {
      throw CorruptModel(path.string() + ": checksum mismatch");
    }
    try {
      return model_of(payload);
    } catch (const Error& e) {
      // Unknown kinds, pollutants or inconsistent trees inside an intact container.
      throw CorruptModel(path.string() + ": invalid model contents (" + e.what() + ")");
    }
  } catch (const json::exception& e) {
    throw CorruptModel(path.string() + ": malformed model file (" + e.what() + ")");
  }
}

} // namespace aqcast
