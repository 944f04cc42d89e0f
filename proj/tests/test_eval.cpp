#include "pdvoice/eval.hpp"

#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "pdvoice/errors.hpp"
#include "test_support.hpp"

using namespace pdvoice;

namespace {

feat::FeatureMatrix blob_matrix(std::size_t n_per_class, std::size_t dim,
                                double separation, std::uint64_t seed) {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  testsup::make_blobs(n_per_class, dim, separation, seed, &x, &y);
  feat::FeatureMatrix m;
  for (std::size_t c = 0; c < dim; ++c)
    m.feature_names.push_back("f" + std::to_string(c));
  m.rows = std::move(x);
  m.labels = std::move(y);
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    m.subject_ids.push_back("s" + std::to_string(i));
    m.source_paths.push_back("blob");
    m.segment_indices.push_back(0);
  }
  return m;
}

}  // namespace

TEST_CASE("confusion counting with PD as the positive class") {
  auto perfect = eval::confusion({1, 1, 0, 0}, {1, 1, 0, 0});
  CHECK(perfect.tp == 2);
  CHECK(perfect.tn == 2);
  CHECK(perfect.fp == 0);
  CHECK(perfect.fn == 0);

  auto crossed = eval::confusion({1, 0}, {0, 1});
  CHECK(crossed.fn == 1);
  CHECK(crossed.fp == 1);
  CHECK(crossed.tp == 0);
  CHECK(crossed.tn == 0);

  auto empty = eval::confusion({}, {});
  CHECK(empty.total() == 0);

  CHECK_THROWS_AS(eval::confusion({1}, {1, 0}), PreconditionError);
  CHECK_THROWS_AS(eval::confusion({2}, {1}), PreconditionError);
}

TEST_CASE("metric fixture: tp 9 / fn 1 / tn 8 / fp 2") {
  auto m = eval::metrics({9, 2, 8, 1});
  CHECK(std::fabs(m.accuracy - 0.85) < 1e-12);
  CHECK(std::fabs(m.recall - 0.9) < 1e-12);
  CHECK(std::fabs(m.specificity - 0.8) < 1e-12);
  CHECK(std::fabs(m.precision - 9.0 / 11.0) < 1e-12);
  double p = 9.0 / 11.0, r = 0.9;
  CHECK(std::fabs(m.f1 - 2.0 * p * r / (p + r)) < 1e-12);
  CHECK_FALSE(m.precision_degenerate);
}

TEST_CASE("perfect predictions score 1.0 everywhere") {
  auto m = eval::metrics({5, 0, 5, 0});
  CHECK(m.accuracy == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.specificity == 1.0);
  CHECK(m.precision == 1.0);
  CHECK(m.f1 == 1.0);
}

TEST_CASE("all-negative predictions flag precision as degenerate") {
  // positives exist but nothing was predicted positive: tp = fp = 0
  auto m = eval::metrics({0, 0, 8, 2});
  CHECK(m.precision == 0.0);
  CHECK(m.precision_degenerate);
  CHECK(m.f1 == 0.0);
  CHECK(m.f1_degenerate);

  CHECK_THROWS_AS(eval::metrics({0, 0, 0, 0}), PreconditionError);
}

TEST_CASE("accuracy identity over random confusion counts") {
  std::mt19937_64 eng(13);
  for (int trial = 0; trial < 200; ++trial) {
    eval::ConfusionCounts c;
    c.tp = eng() % 50;
    c.fn = eng() % 50 + 1;  // keep P > 0
    c.tn = eng() % 50;
    c.fp = eng() % 50 + 1;  // keep N > 0
    auto m = eval::metrics(c);
    double p = static_cast<double>(c.tp + c.fn);
    double n = static_cast<double>(c.tn + c.fp);
    double expected = (m.recall * p + m.specificity * n) / (p + n);
    CHECK(std::fabs(m.accuracy - expected) < 1e-12);
  }
}

TEST_CASE("repeated k-fold: balanced folds, full coverage, determinism") {
  auto m = blob_matrix(30, 2, 6.0, 404);  // 60 rows
  eval::CvConfig cfg;
  cfg.folds = 6;
  cfg.repeats = 2;
  cfg.seed = 31;
  eval::PreprocessOptions prep;

  auto spec = ml::default_spec(ml::ModelFamily::kKnn, 1);
  auto result = eval::repeated_kfold(m, spec, cfg, prep);
  REQUIRE(result.folds.size() == 12);  // k x repeats

  for (const auto& fold : result.folds) {
    CHECK(fold.counts.total() == 10);
    CHECK(fold.counts.tp + fold.counts.fn == 5);  // 5 PD rows per fold
  }
  // within one repeat the test folds partition all 60 rows
  std::size_t rows_covered = 0;
  for (const auto& fold : result.folds)
    if (fold.repeat == 0) rows_covered += fold.counts.total();
  CHECK(rows_covered == 60);

  auto rerun = eval::repeated_kfold(m, spec, cfg, prep);
  REQUIRE(rerun.folds.size() == result.folds.size());
  for (std::size_t i = 0; i < result.folds.size(); ++i) {
    CHECK(rerun.folds[i].scores.accuracy == result.folds[i].scores.accuracy);
    CHECK(rerun.folds[i].counts.tp == result.folds[i].counts.tp);
  }
  CHECK(rerun.accuracy.mean == result.accuracy.mean);
  CHECK(rerun.accuracy.stddev == result.accuracy.stddev);
}

TEST_CASE("metric means stay inside the per-fold range") {
  auto m = blob_matrix(30, 2, 3.0, 71);
  eval::CvConfig cfg;
  cfg.folds = 6;
  cfg.repeats = 3;
  cfg.seed = 5;
  auto result = eval::repeated_kfold(
      m, ml::default_spec(ml::ModelFamily::kLogisticRegression, 3), cfg, {});
  double lo = 1.0, hi = 0.0;
  for (const auto& f : result.folds) {
    lo = std::min(lo, f.scores.accuracy);
    hi = std::max(hi, f.scores.accuracy);
  }
  CHECK(result.accuracy.mean >= lo);
  CHECK(result.accuracy.mean <= hi);
}

TEST_CASE("fold preprocessing never looks at held-out rows") {
  auto m = blob_matrix(20, 3, 4.0, 17);
  std::vector<std::size_t> train_idx;
  for (std::size_t i = 0; i < 30; ++i) train_idx.push_back(i);

  eval::PreprocessOptions prep;
  prep.select_k = 2;
  auto fitted = eval::fit_fold_preprocessing(m, train_idx, prep);

  // poison every held-out row; the fitted transforms must not move
  auto poisoned = m;
  for (std::size_t i = 30; i < poisoned.row_count(); ++i)
    for (double& v : poisoned.rows[i]) v = 1e9;
  auto refit = eval::fit_fold_preprocessing(poisoned, train_idx, prep);

  CHECK(fitted.bounds->lower == refit.bounds->lower);
  CHECK(fitted.bounds->upper == refit.bounds->upper);
  CHECK(fitted.scaler->min == refit.scaler->min);
  CHECK(fitted.scaler->max == refit.scaler->max);
  CHECK(fitted.columns == refit.columns);
}

TEST_CASE("selecting all columns equals no selection under one seed") {
  auto m = blob_matrix(18, 4, 5.0, 23);
  eval::CvConfig cfg;
  cfg.folds = 6;
  cfg.repeats = 2;
  cfg.seed = 99;

  eval::PreprocessOptions all_cols;
  eval::PreprocessOptions select_all;
  select_all.select_k = 4;

  auto spec = ml::default_spec(ml::ModelFamily::kDecisionTree, 2);
  auto a = eval::repeated_kfold(m, spec, cfg, all_cols);
  auto b = eval::repeated_kfold(m, spec, cfg, select_all);
  CHECK(a.accuracy.mean == b.accuracy.mean);
  CHECK(a.f1.mean == b.f1.mean);
}

TEST_CASE("label shuffling drives accuracy to chance") {
  auto m = blob_matrix(60, 2, 6.0, 2027);
  std::mt19937_64 eng(7);
  for (std::size_t i = m.labels.size(); i > 1; --i)
    std::swap(m.labels[i - 1], m.labels[eng() % i]);

  eval::CvConfig cfg;
  cfg.folds = 6;
  cfg.repeats = 3;
  cfg.seed = 12;
  auto result = eval::repeated_kfold(
      m, ml::default_spec(ml::ModelFamily::kKnn, 4), cfg, {});
  CHECK(result.accuracy.mean > 0.4);
  CHECK(result.accuracy.mean < 0.6);
}

TEST_CASE("grid provider runs a nested search per fold") {
  auto m = blob_matrix(18, 2, 6.0, 55);
  eval::GridProvider gp;
  gp.family = ml::ModelFamily::kKnn;
  gp.grid.axes = {{"k", {1, 3}}};
  gp.folds = 3;

  eval::CvConfig cfg;
  cfg.folds = 3;
  cfg.repeats = 1;
  cfg.seed = 9;
  auto result = eval::repeated_kfold(m, eval::ModelProvider{gp}, cfg, {});
  REQUIRE(result.folds.size() == 3);
  for (const auto& f : result.folds) {
    int k = std::get<int>(f.spec_used.params.at("k"));
    CHECK((k == 1 || k == 3));
  }
  CHECK(result.accuracy.mean > 0.9);
}

TEST_CASE("subject grouping keeps subjects out of their own test folds") {
  // 12 subjects x 5 segments; feature value depends only on the subject, so
  // subject-disjoint folds are the honest protocol here
  feat::FeatureMatrix m;
  m.feature_names = {"f0"};
  std::mt19937_64 eng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int s = 0; s < 12; ++s) {
    double center = (s % 2 == 0) ? 0.0 : 4.0;
    for (int seg = 0; seg < 5; ++seg) {
      m.rows.push_back({center + 0.1 * gauss(eng)});
      m.labels.push_back(s % 2);
      m.subject_ids.push_back("subj" + std::to_string(s));
      m.source_paths.push_back("x");
      m.segment_indices.push_back(seg);
    }
  }
  eval::CvConfig cfg;
  cfg.folds = 3;
  cfg.repeats = 2;
  cfg.seed = 44;
  cfg.grouping = eval::Grouping::kSubject;
  auto result = eval::repeated_kfold(
      m, ml::default_spec(ml::ModelFamily::kKnn, 8), cfg, {});
  CHECK(result.folds.size() == 6);
  CHECK(result.accuracy.mean > 0.9);  // classes are separable by the feature
}

TEST_CASE("report rendering: formatting, layout and column order") {
  CHECK(eval::format_pct(0.857142) == "85.7");
  CHECK(eval::format_pct(1.0) == "100.0");

  eval::CvReport report;
  for (ml::ModelFamily family : ml::all_families()) {
    eval::ModelCvResult r;
    r.family = family;
    r.accuracy = {1.0, 0.0};
    r.specificity = {1.0, 0.0};
    r.recall = {1.0, 0.0};
    r.precision = {1.0, 0.0};
    r.f1 = {1.0, 0.0};
    report.entries.push_back({"all_24", r});
  }
  auto csv_text = eval::render_report_csv(report);
  CHECK(csv_text.find("feature_set,metric,KNN,DT,SVM,NB,LR,GB,RF\n") == 0);
  CHECK(csv_text.find("all_24,Accuracy,100.0,100.0,100.0,100.0,100.0,100.0,100.0\n") !=
        std::string::npos);
  CHECK(csv_text.find("all_24,F1 score,") != std::string::npos);

  auto text = eval::render_report_text(report);
  CHECK(text.find("KNN") < text.find("DT"));
  CHECK(text.find("DT") < text.find("SVM"));
  CHECK(text.find("NB") < text.find("LR"));
  CHECK(text.find("GB") < text.find("RF"));
}

TEST_CASE("repeated k-fold refuses starved classes, naming the class") {
  auto m = blob_matrix(4, 2, 3.0, 1);  // 4 rows per class < 6 folds
  eval::CvConfig cfg;
  cfg.folds = 6;
  cfg.repeats = 1;
  cfg.seed = 0;
  try {
    eval::repeated_kfold(m, ml::default_spec(ml::ModelFamily::kKnn, 0), cfg, {});
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("class") != std::string::npos);
  }
}
