#include "pdvoice/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "pdvoice/errors.hpp"
#include "pdvoice/perturbation.hpp"
#include "pdvoice/rng.hpp"

namespace pdvoice::feat {

const std::array<const char*, kNumFeatures> kFeatureNames = {
    "jitter_absolute", "jitter_relative", "jitter_rap",   "jitter_ppq5",
    "shimmer_db",      "shimmer_relative", "shimmer_apq3", "shimmer_apq5",
    "fundamental_frequency", "hnr", "pitch",
    "mfcc_0", "mfcc_1", "mfcc_2",  "mfcc_3",  "mfcc_4",  "mfcc_5", "mfcc_6",
    "mfcc_7", "mfcc_8", "mfcc_9",  "mfcc_10", "mfcc_11", "mfcc_12"};

std::size_t FeatureMatrix::count_label(int label) const {
  return static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), label));
}

ExtractionResult assemble_feature_vector(const audio::AudioClip& segment,
                                         const ExtractionConfig& cfg) {
  ExtractionResult result;
  auto contour = pitch::track_f0(segment, cfg.pitch);
  if (contour.voiced_count() == 0) {
    result.skip_reason = "no voiced frames";
    return result;
  }
  auto track = pitch::extract_period_track(segment, contour, cfg.pitch);
  if (track.size() < cfg.min_cycles) {
    result.skip_reason = "period track has " + std::to_string(track.size()) +
                         " cycles, need " + std::to_string(cfg.min_cycles);
    return result;
  }

  std::array<double, kNumFeatures> v{};
  try {
    v[0] = perturb::jitter_absolute(track);
    v[1] = perturb::jitter_relative(track);
    v[2] = perturb::jitter_rap(track);
    v[3] = perturb::jitter_ppq5(track);
    v[4] = perturb::shimmer_db(track);
    v[5] = perturb::shimmer_relative(track);
    v[6] = perturb::shimmer_apq3(track);
    v[7] = perturb::shimmer_apq5(track);
    auto pf = pitch::f0_and_pitch_features(contour);
    v[8] = pf.fundamental_frequency_hz;
    v[9] = pitch::mean_hnr(segment, contour, cfg.pitch);
    v[10] = pf.pitch_hz;
    auto m = mfcc::mfcc_features(segment, cfg.mfcc);
    if (m.size() != 13) throw FeatureExtractionError("expected 13 MFCCs");
    std::copy(m.begin(), m.end(), v.begin() + kNumAcoustic);
  } catch (const Error& e) {
    result.skip_reason = e.what();
    return result;
  }
  for (double x : v)
    if (!std::isfinite(x)) {
      result.skip_reason = "non-finite feature value";
      return result;
    }
  result.values = v;
  return result;
}

FeatureMatrix select_columns(const FeatureMatrix& m,
                             const std::vector<std::size_t>& cols) {
  FeatureMatrix out;
  out.labels = m.labels;
  out.subject_ids = m.subject_ids;
  out.source_paths = m.source_paths;
  out.segment_indices = m.segment_indices;
  for (std::size_t c : cols) {
    if (c >= m.col_count())
      throw PreconditionError("select_columns: column index out of range");
    out.feature_names.push_back(m.feature_names[c]);
  }
  out.rows.reserve(m.rows.size());
  for (const auto& row : m.rows) {
    std::vector<double> r;
    r.reserve(cols.size());
    for (std::size_t c : cols) r.push_back(row[c]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

FeatureMatrix select_rows(const FeatureMatrix& m,
                          const std::vector<std::size_t>& idx) {
  FeatureMatrix out;
  out.feature_names = m.feature_names;
  for (std::size_t i : idx) {
    if (i >= m.row_count())
      throw PreconditionError("select_rows: row index out of range");
    out.rows.push_back(m.rows[i]);
    out.labels.push_back(m.labels[i]);
    out.subject_ids.push_back(m.subject_ids[i]);
    out.source_paths.push_back(m.source_paths[i]);
    out.segment_indices.push_back(m.segment_indices[i]);
  }
  return out;
}

namespace {

// Linear-interpolation quantile (R type 7) of a sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw PreconditionError("quantile of empty column");
  double pos = p * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = static_cast<std::size_t>(std::ceil(pos));
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

OutlierBounds fit_outlier_bounds(const FeatureMatrix& train) {
  if (train.row_count() < 4)
    throw PreconditionError("fit_outlier_bounds: need at least 4 training rows");
  OutlierBounds b;
  const std::size_t cols = train.col_count();
  b.lower.resize(cols);
  b.upper.resize(cols);
  std::vector<double> column(train.row_count());
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < train.row_count(); ++r)
      column[r] = train.rows[r][c];
    std::sort(column.begin(), column.end());
    double q1 = quantile_sorted(column, 0.25);
    double q3 = quantile_sorted(column, 0.75);
    double iqr = q3 - q1;
    b.lower[c] = q1 - 1.5 * iqr;
    b.upper[c] = q3 + 1.5 * iqr;
  }
  return b;
}

void apply_outlier_bounds(FeatureMatrix& m, const OutlierBounds& b) {
  if (b.lower.size() != m.col_count())
    throw PreconditionError("apply_outlier_bounds: column count mismatch");
  for (auto& row : m.rows)
    for (std::size_t c = 0; c < row.size(); ++c)
      row[c] = std::clamp(row[c], b.lower[c], b.upper[c]);
}

ScalerParams fit_min_max(const FeatureMatrix& train) {
  if (train.row_count() == 0)
    throw PreconditionError("fit_min_max: empty training matrix");
  ScalerParams p;
  const std::size_t cols = train.col_count();
  p.min.assign(cols, std::numeric_limits<double>::infinity());
  p.max.assign(cols, -std::numeric_limits<double>::infinity());
  for (const auto& row : train.rows)
    for (std::size_t c = 0; c < cols; ++c) {
      p.min[c] = std::min(p.min[c], row[c]);
      p.max[c] = std::max(p.max[c], row[c]);
    }
  return p;
}

void apply_min_max(FeatureMatrix& m, const ScalerParams& p) {
  if (p.min.size() != m.col_count())
    throw PreconditionError("apply_min_max: column count mismatch");
  for (auto& row : m.rows)
    for (std::size_t c = 0; c < row.size(); ++c) {
      double range = p.max[c] - p.min[c];
      row[c] = range > 0.0 ? (row[c] - p.min[c]) / range : 0.0;
    }
}

namespace {

std::vector<std::size_t> indices_with_label(const std::vector<int>& labels,
                                            int label) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) out.push_back(i);
  return out;
}

}  // namespace

SplitIndices split_train_validation(const FeatureMatrix& m,
                                    double train_fraction, std::uint64_t seed,
                                    bool subject_disjoint) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw PreconditionError("split_train_validation: fraction must be in (0, 1)");
  for (int label : {kLabelHc, kLabelPd})
    if (m.count_label(label) < 2)
      throw DataError("split_train_validation: class " + std::to_string(label) +
                      " has fewer than 2 rows");

  SplitIndices split;
  Rng rng(mix_seed(seed, 0x511700ULL));
  if (!subject_disjoint) {
    for (int label : {kLabelHc, kLabelPd}) {
      auto idx = indices_with_label(m.labels, label);
      rng.shuffle(idx);
      auto n_train = static_cast<std::size_t>(
          std::lround(train_fraction * static_cast<double>(idx.size())));
      n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
      split.train.insert(split.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
      split.validation.insert(split.validation.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    }
  } else {
    // Group rows by subject, then assign whole subjects per class until the
    // training side holds ~train_fraction of that class's rows.
    std::map<std::string, std::vector<std::size_t>> by_subject;
    for (std::size_t i = 0; i < m.row_count(); ++i)
      by_subject[m.subject_ids[i]].push_back(i);
    for (int label : {kLabelHc, kLabelPd}) {
      std::vector<std::string> subjects;
      std::size_t class_rows = 0;
      for (const auto& [subject, rows] : by_subject)
        if (m.labels[rows.front()] == label) {
          subjects.push_back(subject);
          class_rows += rows.size();
        }
      if (subjects.size() < 2)
        throw DataError("split_train_validation: class " + std::to_string(label) +
                        " has fewer than 2 subjects (subject-disjoint mode)");
      rng.shuffle(subjects);
      std::size_t want = static_cast<std::size_t>(
          std::lround(train_fraction * static_cast<double>(class_rows)));
      std::size_t got = 0;
      for (std::size_t s = 0; s < subjects.size(); ++s) {
        const auto& rows = by_subject[subjects[s]];
        bool to_train = (got < want && s + 1 < subjects.size()) || s == 0;
        auto& side = to_train ? split.train : split.validation;
        side.insert(side.end(), rows.begin(), rows.end());
        if (to_train) got += rows.size();
      }
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  return split;
}

SelectionResult anova_f_scores(const FeatureMatrix& m) {
  for (int label : {kLabelHc, kLabelPd})
    if (m.count_label(label) < 2)
      throw DataError("anova_f_scores: class " + std::to_string(label) +
                      " needs at least 2 rows");

  const std::size_t cols = m.col_count();
  const auto n = static_cast<double>(m.row_count());
  SelectionResult result;
  result.f_scores.resize(cols);

  for (std::size_t c = 0; c < cols; ++c) {
    double sum[2] = {0, 0}, sum_sq[2] = {0, 0};
    double count[2] = {0, 0};
    for (std::size_t r = 0; r < m.row_count(); ++r) {
      int g = m.labels[r];
      double v = m.rows[r][c];
      sum[g] += v;
      sum_sq[g] += v * v;
      count[g] += 1.0;
    }
    double grand_mean = (sum[0] + sum[1]) / n;
    double ssb = 0.0, ssw = 0.0;
    for (int g = 0; g < 2; ++g) {
      double mean = sum[g] / count[g];
      ssb += count[g] * (mean - grand_mean) * (mean - grand_mean);
      ssw += sum_sq[g] - count[g] * mean * mean;
    }
    double ms_between = ssb;              // df1 = k - 1 = 1
    double ms_within = ssw / (n - 2.0);   // df2 = n - k
    if (ms_within > 0.0)
      result.f_scores[c] = ms_between / ms_within;
    else
      result.f_scores[c] = ssb > 0.0
                               ? std::numeric_limits<double>::infinity()
                               : 0.0;
  }

  result.ranking.resize(cols);
  std::iota(result.ranking.begin(), result.ranking.end(), 0);
  std::stable_sort(result.ranking.begin(), result.ranking.end(),
                   [&](std::size_t a, std::size_t b) {
                     return result.f_scores[a] > result.f_scores[b];
                   });
  return result;
}

std::vector<std::size_t> SelectionResult::top_k(std::size_t k) const {
  if (k > ranking.size())
    throw PreconditionError("top_k: k exceeds feature count");
  std::vector<std::size_t> out(ranking.begin(),
                               ranking.begin() + static_cast<std::ptrdiff_t>(k));
  return out;
}

std::vector<std::vector<std::size_t>> stratified_kfold(
    const std::vector<int>& labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw PreconditionError("stratified_kfold: k must be >= 2");
  std::vector<std::vector<std::size_t>> folds(k);
  Rng rng(mix_seed(seed, 0xf01d5));
  for (int label : {kLabelHc, kLabelPd}) {
    auto idx = indices_with_label(labels, label);
    if (idx.size() < k)
      throw DataError("stratified_kfold: class " + std::to_string(label) +
                      " has " + std::to_string(idx.size()) +
                      " rows, needs at least " + std::to_string(k));
    rng.shuffle(idx);
    for (std::size_t i = 0; i < idx.size(); ++i)
      folds[i % k].push_back(idx[i]);
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

std::vector<std::vector<std::size_t>> subject_kfold(
    const std::vector<int>& labels, const std::vector<std::string>& subjects,
    std::size_t k, std::uint64_t seed) {
  if (k < 2) throw PreconditionError("subject_kfold: k must be >= 2");
  if (labels.size() != subjects.size())
    throw PreconditionError("subject_kfold: label/subject length mismatch");

  std::map<std::string, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < subjects.size(); ++i)
    by_subject[subjects[i]].push_back(i);

  std::vector<std::vector<std::size_t>> folds(k);
  Rng rng(mix_seed(seed, 0x5ab17ULL));
  for (int label : {kLabelHc, kLabelPd}) {
    std::vector<std::string> names;
    for (const auto& [subject, rows] : by_subject)
      if (labels[rows.front()] == label) names.push_back(subject);
    if (names.size() < k)
      throw DataError("subject_kfold: class " + std::to_string(label) +
                      " has " + std::to_string(names.size()) +
                      " subjects, needs at least " + std::to_string(k));
    rng.shuffle(names);
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto& rows = by_subject[names[i]];
      auto& fold = folds[i % k];
      fold.insert(fold.end(), rows.begin(), rows.end());
    }
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

}  // namespace pdvoice::feat
