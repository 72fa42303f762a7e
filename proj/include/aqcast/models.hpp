#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aqcast/data_model.hpp"
#include "aqcast/features.hpp"

namespace aqcast {

// Dense row-major design matrix.
class FeatureMatrix {
public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  void append_row(std::span<const double> values);

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class ModelKind : std::uint8_t { OLS = 0, SGD, GBT };

inline constexpr std::array<ModelKind, 3> kAllModelKinds{ModelKind::OLS, ModelKind::SGD, ModelKind::GBT};

std::string_view to_string(ModelKind kind) noexcept;
// Label used in the text results table: LR, SGDReg, GradBst.
std::string_view table_label(ModelKind kind) noexcept;
// Accepts OLS/LR, SGD/SGDReg, GBT/GradBst (case-insensitive). Throws ConfigError.
ModelKind parse_model_kind(std::string_view name);

struct SgdConfig {
  double initial_rate = 0.01;
  double decay = 1e-4;  // eta_k = initial_rate / (1 + k * decay), k counts updates
  int epochs = 200;
  double l2 = 0.0;
  std::uint64_t seed = 42;

  void validate() const;
};

struct GbtConfig {
  int n_trees = 200;
  double learning_rate = 0.05;
  int max_depth = 3;
  std::size_t min_samples_leaf = 5;

  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class RegressionTree {
public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes);

  double predict(std::span<const double> x) const noexcept;
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  int depth() const noexcept;

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

private:
  std::vector<TreeNode> nodes_;
};

struct LinearParams {
  std::vector<double> weights;
  double intercept = 0.0;
  friend bool operator==(const LinearParams&, const LinearParams&) = default;
};

struct BoostedParams {
  double base = 0.0;
  std::vector<RegressionTree> trees;
  std::vector<double> scales;  // per-tree shrinkage
  friend bool operator==(const BoostedParams&, const BoostedParams&) = default;
};

struct ForecastModel {
  ModelKind kind = ModelKind::OLS;
  Pollutant pollutant = Pollutant::PM10;
  int w = 0;
  std::vector<std::string> feature_names;
  Normalizer normalizer;
  std::variant<LinearParams, BoostedParams> params;

  std::size_t n_features() const noexcept { return feature_names.size(); }
  friend bool operator==(const ForecastModel&, const ForecastModel&) = default;
};

// Minimum-norm least squares with an intercept, via a complete orthogonal
// decomposition of the centered design matrix.
ForecastModel fit_ols(const FeatureMatrix& x, std::span<const double> y);

// Per-sample squared-loss gradient steps over shuffled epochs.
ForecastModel fit_sgd(const FeatureMatrix& x, std::span<const double> y, const SgdConfig& config);

// Loss 0.5 * (w.x + b - y)^2 + 0.5 * l2 * |w|^2 for one sample, and its gradient
// (d/dw..., d/db).
double sgd_sample_loss(std::span<const double> weights, double intercept, std::span<const double> x,
                       double y, double l2) noexcept;
std::vector<double> sgd_sample_gradient(std::span<const double> weights, double intercept,
                                        std::span<const double> x, double y, double l2);

// Squared-error boosting of depth-limited regression trees from mean(y).
ForecastModel fit_gbt(const FeatureMatrix& x, std::span<const double> y, const GbtConfig& config);

// One least-squares regression tree on `y`, restricted to the given rows.
RegressionTree fit_tree(const FeatureMatrix& x, std::span<const double> y, int max_depth,
                        std::size_t min_samples_leaf);

// Training MSE after each boosting stage (index 0 is the base value alone).
std::vector<double> staged_training_mse(const ForecastModel& model, const FeatureMatrix& x,
                                        std::span<const double> y);

double predict_one(const ForecastModel& model, std::span<const double> x);
std::vector<double> predict(const ForecastModel& model, const FeatureMatrix& x);

// Versioned JSON container with a checksum over its payload.
inline constexpr int kModelFormatVersion = 1;
void save_model(const ForecastModel& model, const std::filesystem::path& path);
ForecastModel load_model(const std::filesystem::path& path);

} // namespace aqcast
