#include <doctest.h>

#include <cmath>
#include <random>

#include "aqcast/errors.hpp"
#include "aqcast/models.hpp"
#include "learner_oracles.hpp"
#include "test_util.hpp"

using namespace aqcast;

namespace {

const LinearParams& linear(const ForecastModel& m) { return std::get<LinearParams>(m.params); }

double training_mse(const ForecastModel& m, const FeatureMatrix& x, const std::vector<double>& y) {
  const auto p = predict(m, x);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (p[i] - y[i]) * (p[i] - y[i]);
  return s / static_cast<double>(y.size());
}

FeatureMatrix column(std::initializer_list<double> xs) {
  std::vector<std::vector<double>> rows;
  for (double v : xs) rows.push_back({v});
  return FeatureMatrix::from_rows(rows);
}

GbtConfig gbt(int trees, double lr, int depth, std::size_t leaf) {
  GbtConfig c;
  c.n_trees = trees;
  c.learning_rate = lr;
  c.max_depth = depth;
  c.min_samples_leaf = leaf;
  return c;
}

} // namespace

TEST_CASE("OLS exact fits") {
  const auto x = column({0, 1, 2, 3, 4});
  const std::vector<double> y{1, 3, 5, 7, 9};
  const auto m = fit_ols(x, y);
  CHECK(std::abs(linear(m).weights[0] - 2.0) <= 1e-10);
  CHECK(std::abs(linear(m).intercept - 1.0) <= 1e-10);
  const double five[] = {5.0};
  CHECK(std::abs(predict_one(m, five) - 11.0) <= 1e-10);

  const auto single = fit_ols(column({3.0}), std::vector<double>{7.5});
  CHECK(predict_one(single, std::vector<double>{3.0}) == doctest::Approx(7.5).epsilon(1e-14));
}

TEST_CASE("OLS recovers a planted model and leaves orthogonal residuals") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t p = 1 + rep % 6;
    const auto x = oracle::random_matrix(rng, 40 + 5 * rep, p);
    std::vector<double> beta(p);
    std::uniform_real_distribution<double> u(-5, 5);
    for (auto& b : beta) b = u(rng);
    const double b0 = u(rng);
    std::vector<double> y(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      y[i] = b0;
      for (std::size_t j = 0; j < p; ++j) y[i] += beta[j] * x(i, j);
    }
    const auto m = fit_ols(x, y);
    for (std::size_t j = 0; j < p; ++j) CHECK(std::abs(linear(m).weights[j] - beta[j]) <= 1e-10);
    CHECK(std::abs(linear(m).intercept - b0) <= 1e-10);

    // Noisy targets: residuals orthogonal to every column and to the ones column.
    std::normal_distribution<double> noise(0.0, 1.0);
    for (auto& v : y) v += noise(rng);
    const auto noisy = fit_ols(x, y);
    const auto pred = predict(noisy, x);
    for (std::size_t j = 0; j <= p; ++j) {
      double dot = 0.0;
      for (std::size_t i = 0; i < x.rows(); ++i) dot += (y[i] - pred[i]) * (j < p ? x(i, j) : 1.0);
      CHECK(std::abs(dot) <= 1e-8);
    }
  }
}

TEST_CASE("OLS with a duplicated column matches the pseudo-inverse") {
  std::mt19937_64 rng(4);
  auto base = oracle::random_matrix(rng, 30, 2);
  FeatureMatrix x(30, 3);
  std::vector<double> y(30);
  for (std::size_t i = 0; i < 30; ++i) {
    x(i, 0) = base(i, 0);
    x(i, 1) = base(i, 1);
    x(i, 2) = base(i, 0);
    y[i] = 4.0 * base(i, 0) - 2.0 * base(i, 1) + 0.5;
  }
  const auto m = fit_ols(x, y);
  const auto [w, b] = oracle::pinv_least_squares(x, y);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(std::isfinite(linear(m).weights[j]));
    CHECK(std::abs(linear(m).weights[j] - w[j]) <= 1e-9);
  }
  CHECK(std::abs(linear(m).weights[0] - 2.0) <= 1e-9);
  CHECK(std::abs(linear(m).intercept - b) <= 1e-9);
  const auto pred = predict(m, x);
  for (std::size_t i = 0; i < 30; ++i) CHECK(std::abs(pred[i] - y[i]) <= 1e-9);
}

TEST_CASE("SGD") {
  std::mt19937_64 rng(8);
  const auto x = oracle::random_matrix(rng, 100, 1, 0.0, 1.0);
  std::vector<double> y(100);
  for (std::size_t i = 0; i < 100; ++i) y[i] = 3.0 * x(i, 0);

  SUBCASE("no epochs") {
    SgdConfig cfg;
    cfg.epochs = 0;
    const auto m = fit_sgd(x, y, cfg);
    CHECK(linear(m).weights == std::vector<double>{0.0});
    CHECK(linear(m).intercept == 0.0);
    CHECK(predict_one(m, std::vector<double>{0.7}) == 0.0);
  }
  SUBCASE("converges to the closed-form solution") {
    const auto m = fit_sgd(x, y, SgdConfig{});
    const auto ols = fit_ols(x, y);
    CHECK(std::abs(linear(m).weights[0] - linear(ols).weights[0]) <= 1e-2);
    CHECK(std::abs(linear(m).weights[0] - 3.0) <= 1e-2);
  }
  SUBCASE("diverges with a huge step") {
    SgdConfig cfg;
    cfg.initial_rate = 1e6;
    CHECK_THROWS_AS(fit_sgd(x, y, cfg), DivergenceError);
  }
  SUBCASE("deterministic for a seed") {
    SgdConfig cfg;
    cfg.epochs = 20;
    CHECK(fit_sgd(x, y, cfg) == fit_sgd(x, y, cfg));
    auto other = cfg;
    other.seed = 43;
    CHECK_FALSE(fit_sgd(x, y, cfg) == fit_sgd(x, y, other));
  }
  SUBCASE("config validation") {
    SgdConfig cfg;
    cfg.initial_rate = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
}

TEST_CASE("SGD gradient matches central differences") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int probe = 0; probe < 100; ++probe) {
    const std::size_t p = 1 + probe % 7;
    std::vector<double> w(p), x(p);
    for (auto& v : w) v = u(rng);
    for (auto& v : x) v = u(rng);
    const double b = u(rng), y = 3.0 * u(rng), l2 = probe % 2 ? 0.1 : 0.0;
    std::vector<double> params = w;
    params.push_back(b);
    auto loss = [&](const std::vector<double>& q) {
      return sgd_sample_loss(std::span<const double>(q.data(), p), q[p], x, y, l2);
    };
    const auto fd = oracle::central_difference(loss, params, 1e-5);
    const auto g = sgd_sample_gradient(w, b, x, y, l2);
    REQUIRE(g.size() == p + 1);
    for (std::size_t i = 0; i <= p; ++i) {
      const double scale = std::max({std::abs(g[i]), std::abs(fd[i]), 1e-3});
      CHECK(std::abs(g[i] - fd[i]) / scale <= 1e-6);
    }
  }
}

TEST_CASE("GBT basics") {
  std::mt19937_64 rng(17);
  const auto x = oracle::random_matrix(rng, 50, 3);
  SUBCASE("constant target") {
    const std::vector<double> y(50, 4.25);
    const auto m = fit_gbt(x, y, gbt(10, 0.3, 3, 2));
    for (double p : predict(m, x)) CHECK(p == 4.25);
    CHECK(training_mse(m, x, y) == 0.0);
  }
  SUBCASE("depth zero predicts the mean") {
    std::vector<double> y(50);
    double mean = 0.0;
    for (std::size_t i = 0; i < 50; ++i) mean += (y[i] = x(i, 0) * 10.0 + x(i, 1));
    mean /= 50.0;
    const auto m = fit_gbt(x, y, gbt(1, 1.0, 0, 1));
    for (double p : predict(m, x)) CHECK(p == doctest::Approx(mean).epsilon(1e-14));
  }
  SUBCASE("xor") {
    const auto xx = FeatureMatrix::from_rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    const std::vector<double> y{0, 1, 1, 0};
    const auto m = fit_gbt(xx, y, gbt(1, 1.0, 2, 1));
    CHECK(training_mse(m, xx, y) == 0.0);
  }
  SUBCASE("too few samples for the leaf size") {
    CHECK_THROWS_AS(fit_gbt(oracle::random_matrix(rng, 5, 1), std::vector<double>(5, 1.0), gbt(5, 0.1, 2, 3)),
                    ConfigError);
  }
}

TEST_CASE("GBT staged training MSE never increases") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lr(0.05, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 20 + 7 * rep, p = 1 + rep % 4;
    const auto x = oracle::random_matrix(rng, n, p);
    std::vector<double> y(n);
    std::normal_distribution<double> noise;
    for (std::size_t i = 0; i < n; ++i) y[i] = std::sin(3 * x(i, 0)) + (x(i, p - 1) > 0 ? 2 : 0) + noise(rng);
    const auto m = fit_gbt(x, y, gbt(30, lr(rng), 1 + rep % 4, 1 + rep % 3));
    const auto mse = staged_training_mse(m, x, y);
    REQUIRE(mse.size() == 31);
    for (std::size_t k = 1; k < mse.size(); ++k) CHECK(mse[k] <= mse[k - 1] + 1e-12 * mse[0]);
  }
}

TEST_CASE("tree split search matches exhaustive enumeration") {
  std::mt19937_64 rng(555);
  std::uniform_int_distribution<int> small(0, 4);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = 2 + rep % 7, p = 1 + rep % 3;
    FeatureMatrix x(n, p);
    std::vector<double> y(n);
    // Small integer grids so that ties happen often.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) x(i, j) = small(rng);
      y[i] = small(rng);
    }
    const std::size_t leaf = 1 + rep % 2;
    const auto splits = oracle::all_splits(x, y, leaf);
    const auto tree = fit_tree(x, y, 1, leaf);
    const auto& root = tree.nodes().front();
    // Pure nodes and nodes without a valid split stay leaves; otherwise the best split
    // is taken even if it does not reduce the error.
    if (splits.empty() || oracle::sse_of(y) == 0.0) {
      CHECK(root.feature == -1);
      continue;
    }
    double best = splits.front().sse;
    for (const auto& s : splits) best = std::min(best, s.sse);
    REQUIRE(root.feature >= 0);
    const oracle::Split* first = nullptr;
    for (const auto& s : splits) {
      if (s.sse <= best + 1e-9 && (!first || s.feature < first->feature ||
                                   (s.feature == first->feature && s.threshold < first->threshold))) {
        first = &s;
      }
    }
    CHECK(root.feature == first->feature);
    CHECK(root.threshold == first->threshold);
  }
}

TEST_CASE("determinism and persistence") {
  std::mt19937_64 rng(31);
  const auto x = oracle::random_matrix(rng, 80, 4);
  std::vector<double> y(80);
  for (std::size_t i = 0; i < 80; ++i) y[i] = x(i, 0) * x(i, 1) + x(i, 2);
  SgdConfig sgd;
  sgd.epochs = 10;
  const std::vector<ForecastModel> models{fit_ols(x, y), fit_sgd(x, y, sgd), fit_gbt(x, y, gbt(25, 0.1, 3, 2))};
  CHECK(fit_gbt(x, y, gbt(25, 0.1, 3, 2)) == models[2]);

  const auto dir = scratch_dir("models_io");
  const auto probes = oracle::random_matrix(rng, 100, 4, -3, 3);
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto path = dir / ("m" + std::to_string(k) + ".json");
    save_model(models[k], path);
    const auto loaded = load_model(path);
    CHECK(loaded == models[k]);
    CHECK(predict(loaded, probes) == predict(models[k], probes));
    CHECK(predict(models[k], probes) == predict(models[k], probes));
  }

  const auto text = read_file(dir / "m2.json");
  write_file(dir / "truncated.json", text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(load_model(dir / "truncated.json"), CorruptModel);
  auto tampered = text;
  tampered[tampered.rfind("\"threshold\":") + 13] ^= 1;
  write_file(dir / "tampered.json", tampered);
  CHECK_THROWS_AS(load_model(dir / "tampered.json"), CorruptModel);
  auto future = text;
  future.replace(future.find("\"version\": 1"), 12, "\"version\": 99");
  write_file(dir / "future.json", future);
  CHECK_THROWS_AS(load_model(dir / "future.json"), VersionError);
  CHECK_THROWS_AS(load_model(dir / "absent.json"), IoError);

  CHECK_THROWS_AS(predict_one(models[0], std::vector<double>{1.0, 2.0}), DimensionMismatch);
}
