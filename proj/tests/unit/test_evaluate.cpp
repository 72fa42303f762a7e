#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "aqcast/errors.hpp"
#include "aqcast/evaluate.hpp"
#include "dataset_builder.hpp"
#include "test_util.hpp"

using namespace aqcast;

namespace {

using V = std::vector<double>;

WindowedSample sample_on(CivilDate d, double target) {
  return WindowedSample{"S", d, {target}, target};
}

CvRow aggregate(Pollutant p, ModelKind m, int w, double mae, double mape, double rmse) {
  return CvRow{p, m, w, std::nullopt, mae, mape, rmse, 10, 0};
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_CASE("metric examples") {
  CHECK(mae(V{110, 90}, V{100, 100}) == 10.0);
  CHECK(mae(V{1, 2, 3}, V{1, 2, 3}) == 0.0);
  CHECK(mae(V{3}, V{0}) == 3.0);

  const auto m = mape(V{110}, V{100});
  CHECK(m.value == doctest::Approx(0.10).epsilon(1e-15));
  CHECK(m.excluded == 0);
  const auto z = mape(V{5, 110}, V{0, 100});
  CHECK(z.excluded == 1);
  CHECK(z.value == doctest::Approx(0.10).epsilon(1e-15));
  const auto same = mape(V{4, 5}, V{4, 5});
  CHECK(same.value == 0.0);
  CHECK(same.excluded == 0);
  CHECK_THROWS_AS(mape(V{1}, V{0}), AllExcluded);

  CHECK(std::abs(rmse(V{3, 4}, V{0, 0}) - 3.5355) <= 1e-4);
  CHECK(rmse(V{7, 8}, V{7, 8}) == 0.0);

  CHECK_THROWS_AS(mae(V{1, 2}, V{1}), LengthMismatch);
  CHECK_THROWS_AS(rmse(V{}, V{}), EmptyInput);
}

TEST_CASE("RMSE dominates MAE") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 10000; ++i) {
    V a(1 + rng() % 20), b(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      a[k] = u(rng);
      b[k] = u(rng);
    }
    CHECK(rmse(a, b) >= mae(a, b));
  }
}

TEST_CASE("folds") {
  std::vector<WindowedSample> samples;
  for (int y = 2018; y <= 2023; ++y) {
    for (int k = 0; k < 3; ++k) samples.push_back(sample_on(CivilDate{y, 3 + k, 1}, 1.0));
  }
  const auto folds = make_folds(samples);
  REQUIRE(folds.size() == 6);
  for (std::size_t i = 0; i < folds.size(); ++i) {
    CHECK(folds[i].test_year == 2018 + static_cast<int>(i));
    CHECK(folds[i].train_years.size() == 5);
    CHECK(std::find(folds[i].train_years.begin(), folds[i].train_years.end(), folds[i].test_year) ==
          folds[i].train_years.end());
  }
  CHECK_THROWS_AS(make_folds({sample_on(CivilDate{2020, 1, 1}, 1.0)}), InsufficientYears);
}

TEST_CASE("leave-one-year-out on two years") {
  auto ds = make_dataset(CivilDate{2021, 11, 1}, 120, 2);
  const auto windows = build_windows(ds, Pollutant::PM10, WindowConfig{3});
  LearnerConfig cfg;
  const auto report = loyo_cv(windows, ModelKind::OLS, cfg);
  REQUIRE(report.size() == 3);
  CHECK(report[0].fold_year == 2021);
  CHECK(report[1].fold_year == 2022);
  CHECK_FALSE(report[2].fold_year.has_value());
  CHECK(report[2].n_samples == windows.samples.size());
  CHECK(report[0].n_samples + report[1].n_samples == windows.samples.size());
  CHECK(std::abs(report[2].mae - (report[0].mae + report[1].mae) / 2) <= 1e-12);
  CHECK(std::abs(report[2].rmse - (report[0].rmse + report[1].rmse) / 2) <= 1e-12);
  CHECK(std::abs(report[2].mape - (report[0].mape + report[1].mape) / 2) <= 1e-12);

  // Each fold is the model trained on the other year only.
  for (int fold = 0; fold < 2; ++fold) {
    const int test_year = *report[static_cast<std::size_t>(fold)].fold_year;
    std::vector<const WindowedSample*> train;
    V pred, actual;
    for (const auto& s : windows.samples) {
      if (s.target_date.year != test_year) train.push_back(&s);
    }
    const auto model = train_model(windows, train, ModelKind::OLS, cfg);
    for (const auto& s : windows.samples) {
      if (s.target_date.year != test_year) continue;
      auto f = s.features;
      apply_normalizer(model.normalizer, windows.layout, f);
      pred.push_back(predict_one(model, f));
      actual.push_back(s.target);
    }
    CHECK(report[static_cast<std::size_t>(fold)].mae == mae(pred, actual));
  }

  // The dataset overload is a thin wrapper.
  const auto direct = loyo_cv(ds, Pollutant::PM10, ModelKind::OLS, 3, cfg);
  CHECK(direct.back().mae == report.back().mae);
}

TEST_CASE("results outputs") {
  std::vector<CvRow> rows;
  for (auto p : kAllPollutants) {
    for (auto m : kAllModelKinds) {
      for (int w : {1, 7, 14}) {
        const double base = 10.0 + static_cast<double>(index_of(p)) + (m == ModelKind::GBT ? -2.0 : 0.0) + w * 0.01;
        rows.push_back(aggregate(p, m, w, base, base / 30.0, base * 1.4));
      }
    }
  }
  const std::vector<Pollutant> all_p(kAllPollutants.begin(), kAllPollutants.end());
  const std::vector<ModelKind> all_m(kAllModelKinds.begin(), kAllModelKinds.end());
  const auto table = results_table(rows, all_p, all_m, {1, 7, 14});
  CHECK(line_count(table.csv) == 46);
  CHECK(table.csv.rfind("pollutant,model,w,mae,mape,rmse\n", 0) == 0);
  CHECK(table.text.find("**8.07**") != std::string::npos);
  CHECK(table.text.find("GradBst") != std::string::npos);

  auto partial = rows;
  partial.erase(partial.begin() + 4);  // PM10 SGD w=7
  try {
    results_table(partial, all_p, all_m, {1, 7, 14});
    FAIL("expected MissingCell");
  } catch (const MissingCell& e) {
    const std::string what = e.what();
    CHECK(what.find("PM10") != std::string::npos);
    CHECK(what.find("SGD") != std::string::npos);
    CHECK(what.find("7") != std::string::npos);
  }

  // A reference-sized row keeps its four significant digits.
  const auto ref = results_table({aggregate(Pollutant::PM10, ModelKind::GBT, 7, 8.198, 0.294, 11.52)},
                                 {Pollutant::PM10}, {ModelKind::GBT}, {7});
  CHECK(ref.csv == "pollutant,model,w,mae,mape,rmse\nPM10,GradBst,7,8.198,0.294,11.52\n");
  CHECK(ref.text.find("8.198") != std::string::npos);

  const auto dir = scratch_dir("results");
  std::vector<CvRow> with_folds{CvRow{Pollutant::O3, ModelKind::SGD, 1, 2022, 1.5, 0.25, 2.0, 10, 1},
                                aggregate(Pollutant::O3, ModelKind::SGD, 1, 1.5, 0.25, 2.0)};
  write_results_csv(with_folds, dir / "results.csv");
  CHECK(read_file(dir / "results.csv") ==
        "pollutant,model,w,fold_year,mae,mape,rmse,n_samples,n_mape_excluded\n"
        "O3,SGD,1,2022,1.5,0.25,2,10,1\n"
        "O3,SGD,1,ALL,1.5,0.25,2,10,0\n");
}
