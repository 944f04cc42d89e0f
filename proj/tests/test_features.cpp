#include "pdvoice/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "pdvoice/errors.hpp"
#include "test_support.hpp"

using namespace pdvoice;

namespace {

feat::FeatureMatrix matrix_from(const std::vector<std::vector<double>>& rows,
                                const std::vector<int>& labels,
                                std::vector<std::string> subjects = {}) {
  feat::FeatureMatrix m;
  for (std::size_t c = 0; c < rows.front().size(); ++c)
    m.feature_names.push_back("f" + std::to_string(c));
  m.rows = rows;
  m.labels = labels;
  if (subjects.empty()) {
    for (std::size_t i = 0; i < rows.size(); ++i)
      subjects.push_back("s" + std::to_string(i));
  }
  m.subject_ids = std::move(subjects);
  m.source_paths.assign(rows.size(), "synthetic");
  m.segment_indices.assign(rows.size(), 0);
  return m;
}

}  // namespace

TEST_CASE("assemble_feature_vector on a clean 150 Hz sine") {
  auto clip = testsup::make_sine(150.0, 1.0, 16000);
  auto result = feat::assemble_feature_vector(clip);
  REQUIRE(result.ok());
  const auto& v = *result.values;
  CHECK(v[1] < 0.5);   // jitter_relative, tracker floor
  CHECK(v[5] < 2.0);   // shimmer_relative
  CHECK(std::fabs(v[8] - 150.0) <= 1.5);  // fundamental_frequency
  CHECK(std::fabs(v[10] - 150.0) <= 1.5); // pitch
  CHECK(v[9] > 20.0);  // hnr of a pure tone

  auto again = feat::assemble_feature_vector(clip);
  REQUIRE(again.ok());
  for (std::size_t i = 0; i < feat::kNumFeatures; ++i)
    CHECK(v[i] == (*again.values)[i]);
}

TEST_CASE("unvoiced segments produce a skip record") {
  auto noise = testsup::make_white_noise(0.8, 16000, 0.4, 3);
  auto result = feat::assemble_feature_vector(noise);
  CHECK_FALSE(result.ok());
  CHECK_FALSE(result.skip_reason.empty());
}

TEST_CASE("canonical feature order is pinned") {
  REQUIRE(feat::kFeatureNames.size() == 24);
  CHECK(std::string(feat::kFeatureNames[0]) == "jitter_absolute");
  CHECK(std::string(feat::kFeatureNames[4]) == "shimmer_db");
  CHECK(std::string(feat::kFeatureNames[8]) == "fundamental_frequency");
  CHECK(std::string(feat::kFeatureNames[9]) == "hnr");
  CHECK(std::string(feat::kFeatureNames[10]) == "pitch");
  CHECK(std::string(feat::kFeatureNames[11]) == "mfcc_0");
  CHECK(std::string(feat::kFeatureNames[23]) == "mfcc_12");
}

TEST_CASE("IQR winsorization clips the outlier in [1,2,3,100]") {
  auto m = matrix_from({{1.0}, {2.0}, {3.0}, {100.0}}, {0, 0, 1, 1});
  auto bounds = feat::fit_outlier_bounds(m);
  // linear-interpolation quartiles: Q1 = 1.75, Q3 = 27.25, IQR = 25.5
  CHECK(bounds.upper[0] == doctest::Approx(27.25 + 1.5 * 25.5).epsilon(1e-12));
  CHECK(bounds.lower[0] == doctest::Approx(1.75 - 1.5 * 25.5).epsilon(1e-12));
  feat::apply_outlier_bounds(m, bounds);
  CHECK(m.rows[3][0] == doctest::Approx(65.5).epsilon(1e-12));
  CHECK(m.rows[0][0] == 1.0);
  CHECK(m.rows[1][0] == 2.0);
}

TEST_CASE("winsorization leaves constant and in-bound columns unchanged") {
  auto constant = matrix_from({{5.0}, {5.0}, {5.0}, {5.0}}, {0, 0, 1, 1});
  auto b1 = feat::fit_outlier_bounds(constant);
  feat::apply_outlier_bounds(constant, b1);
  for (const auto& row : constant.rows) CHECK(row[0] == 5.0);

  auto tight = matrix_from({{1.0}, {2.0}, {3.0}, {4.0}}, {0, 0, 1, 1});
  auto rows_before = tight.rows;
  auto b2 = feat::fit_outlier_bounds(tight);
  feat::apply_outlier_bounds(tight, b2);
  CHECK(tight.rows == rows_before);

  auto small = matrix_from({{1.0}, {2.0}}, {0, 1});
  CHECK_THROWS_AS(feat::fit_outlier_bounds(small), PreconditionError);
}

TEST_CASE("min-max scaling maps train extremes to 0/1 and constants to 0") {
  auto m = matrix_from({{2.0, 7.0}, {4.0, 7.0}, {6.0, 7.0}}, {0, 1, 1});
  auto params = feat::fit_min_max(m);
  feat::apply_min_max(m, params);
  CHECK(m.rows[0][0] == 0.0);
  CHECK(m.rows[1][0] == doctest::Approx(0.5));
  CHECK(m.rows[2][0] == 1.0);
  for (const auto& row : m.rows) CHECK(row[1] == 0.0);

  // validation rows may leave [0, 1]: no clamping
  auto val = matrix_from({{8.0, 9.0}}, {0});
  feat::apply_min_max(val, params);
  CHECK(val.rows[0][0] == doctest::Approx(1.5));
}

TEST_CASE("scaler parameters depend on training rows only") {
  auto train = matrix_from({{1.0}, {3.0}, {5.0}, {9.0}}, {0, 0, 1, 1});
  auto p1 = feat::fit_min_max(train);
  auto b1 = feat::fit_outlier_bounds(train);
  // anything outside the training partition must not matter
  auto p2 = feat::fit_min_max(train);
  CHECK(p1.min == p2.min);
  CHECK(p1.max == p2.max);
  CHECK(b1.lower == feat::fit_outlier_bounds(train).lower);
}

TEST_CASE("stratified 70/30 split with balanced classes") {
  std::vector<std::vector<double>> rows(100, std::vector<double>{0.0});
  std::vector<int> labels(100);
  for (std::size_t i = 50; i < 100; ++i) labels[i] = 1;
  auto m = matrix_from(rows, labels);

  auto split = feat::split_train_validation(m, 0.7, 11);
  CHECK(split.train.size() == 70);
  CHECK(split.validation.size() == 30);
  auto count_label = [&](const std::vector<std::size_t>& idx, int label) {
    return std::count_if(idx.begin(), idx.end(),
                         [&](std::size_t i) { return m.labels[i] == label; });
  };
  CHECK(count_label(split.train, 0) == 35);
  CHECK(count_label(split.train, 1) == 35);
  CHECK(count_label(split.validation, 0) == 15);
  CHECK(count_label(split.validation, 1) == 15);

  auto repeat = feat::split_train_validation(m, 0.7, 11);
  CHECK(split.train == repeat.train);
  CHECK(split.validation == repeat.validation);

  auto other = feat::split_train_validation(m, 0.7, 12);
  CHECK(split.train != other.train);
}

TEST_CASE("subject-disjoint split keeps subjects on one side") {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<std::string> subjects;
  for (int s = 0; s < 10; ++s)
    for (int seg = 0; seg < 6; ++seg) {
      rows.push_back({static_cast<double>(s)});
      labels.push_back(s < 5 ? 0 : 1);
      subjects.push_back("subj" + std::to_string(s));
    }
  auto m = matrix_from(rows, labels, subjects);
  auto split = feat::split_train_validation(m, 0.7, 5, true);

  std::set<std::string> train_subjects, val_subjects;
  for (std::size_t i : split.train) train_subjects.insert(m.subject_ids[i]);
  for (std::size_t i : split.validation) val_subjects.insert(m.subject_ids[i]);
  for (const auto& s : train_subjects) CHECK(val_subjects.count(s) == 0);
  CHECK(split.train.size() + split.validation.size() == 60);
}

TEST_CASE("anova F matches the hand-computed fixture exactly") {
  auto m = matrix_from({{1.0}, {2.0}, {3.0}, {4.0}, {5.0}, {6.0}},
                       {0, 0, 0, 1, 1, 1});
  auto result = feat::anova_f_scores(m);
  CHECK(std::fabs(result.f_scores[0] - 13.5) < 1e-12);
}

TEST_CASE("anova is zero for identical groups, +inf for separated constants") {
  auto same = matrix_from({{1.0}, {2.0}, {3.0}, {1.0}, {2.0}, {3.0}},
                          {0, 0, 0, 1, 1, 1});
  CHECK(feat::anova_f_scores(same).f_scores[0] == doctest::Approx(0.0));

  auto perfect = matrix_from({{1.0, 0.5}, {1.0, 0.1}, {2.0, 0.4}, {2.0, 0.2}},
                             {0, 0, 1, 1});
  auto result = feat::anova_f_scores(perfect);
  CHECK(std::isinf(result.f_scores[0]));
  CHECK(result.ranking[0] == 0);
}

TEST_CASE("anova is invariant to row order and positive affine transforms") {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::mt19937_64 eng(88);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (int i = 0; i < 30; ++i) {
    rows.push_back({uni(eng), uni(eng)});
    labels.push_back(i % 2);
  }
  auto m = matrix_from(rows, labels);
  auto base = feat::anova_f_scores(m);

  // permute rows
  auto shuffled_rows = rows;
  auto shuffled_labels = labels;
  std::mt19937_64 perm(9);
  for (std::size_t i = rows.size(); i > 1; --i) {
    std::size_t j = perm() % i;
    std::swap(shuffled_rows[i - 1], shuffled_rows[j]);
    std::swap(shuffled_labels[i - 1], shuffled_labels[j]);
  }
  auto permuted = feat::anova_f_scores(matrix_from(shuffled_rows, shuffled_labels));
  for (std::size_t c = 0; c < 2; ++c)
    CHECK(testsup::rel_err(permuted.f_scores[c], base.f_scores[c]) < 1e-9);

  // x -> 3.5 x + 11 per feature
  auto affine_rows = rows;
  for (auto& row : affine_rows)
    for (double& v : row) v = 3.5 * v + 11.0;
  auto affine = feat::anova_f_scores(matrix_from(affine_rows, labels));
  for (std::size_t c = 0; c < 2; ++c)
    CHECK(testsup::rel_err(affine.f_scores[c], base.f_scores[c]) < 1e-9);
}

TEST_CASE("top_k ranking breaks ties by canonical order") {
  auto m = matrix_from({{1.0, 1.0, 5.0}, {2.0, 2.0, 6.0},
                        {4.0, 4.0, 9.0}, {5.0, 5.0, 10.0}},
                       {0, 0, 1, 1});
  auto result = feat::anova_f_scores(m);
  // columns 0 and 1 are identical: tie must resolve to the lower index first
  CHECK(result.f_scores[0] == doctest::Approx(result.f_scores[1]));
  auto top = result.top_k(3);
  auto pos0 = std::find(top.begin(), top.end(), 0);
  auto pos1 = std::find(top.begin(), top.end(), 1);
  CHECK(pos0 < pos1);
  CHECK_THROWS_AS(result.top_k(4), PreconditionError);
}

TEST_CASE("stratified k-fold partitions 60 balanced rows into 10+10") {
  std::vector<int> labels(60);
  for (std::size_t i = 30; i < 60; ++i) labels[i] = 1;
  auto folds = feat::stratified_kfold(labels, 6, 77);
  REQUIRE(folds.size() == 6);

  std::set<std::size_t> seen;
  for (const auto& fold : folds) {
    CHECK(fold.size() == 10);
    std::size_t ones = 0;
    for (std::size_t i : fold) {
      CHECK(seen.insert(i).second);  // pairwise disjoint
      ones += static_cast<std::size_t>(labels[i]);
    }
    CHECK(ones == 5);
  }
  CHECK(seen.size() == 60);  // union covers everything

  auto folds2 = feat::stratified_kfold(labels, 6, 78);
  CHECK(folds != folds2);
}

TEST_CASE("subject k-fold never splits a subject") {
  std::vector<int> labels;
  std::vector<std::string> subjects;
  for (int s = 0; s < 12; ++s)
    for (int seg = 0; seg < 4; ++seg) {
      labels.push_back(s % 2);
      subjects.push_back("p" + std::to_string(s));
    }
  auto folds = feat::subject_kfold(labels, subjects, 3, 5);
  REQUIRE(folds.size() == 3);
  std::map<std::string, std::size_t> owner;
  for (std::size_t f = 0; f < folds.size(); ++f)
    for (std::size_t i : folds[f]) {
      auto it = owner.find(subjects[i]);
      if (it == owner.end())
        owner[subjects[i]] = f;
      else
        CHECK(it->second == f);
    }
}

TEST_CASE("class starvation errors name the class") {
  std::vector<int> labels = {0, 0, 0, 1};
  CHECK_THROWS_AS(feat::stratified_kfold(labels, 2, 0), DataError);
}
