#pragma once

// Per-segment 24-feature vectors, the labeled corpus table, preprocessing
// (IQR winsorization, min-max scaling, 70/30 split) and ANOVA-F selection.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pdvoice/audio.hpp"
#include "pdvoice/mfcc.hpp"
#include "pdvoice/pitch.hpp"

namespace pdvoice::feat {

inline constexpr std::size_t kNumFeatures = 24;
inline constexpr std::size_t kNumAcoustic = 11;

// Canonical column order; every emitted CSV and every matrix follows it.
extern const std::array<const char*, kNumFeatures> kFeatureNames;

inline constexpr int kLabelPd = 1;
inline constexpr int kLabelHc = 0;

struct ExtractionConfig {
  pitch::PitchConfig pitch;
  mfcc::MfccConfig mfcc;
  std::size_t min_cycles = 5;  // PeriodTrack size needed for all 8 measures
};

// Either a 24-value vector in canonical order, or the reason the segment was
// skipped (unvoiced, too few cycles, degenerate amplitudes).
struct ExtractionResult {
  std::optional<std::array<double, kNumFeatures>> values;
  std::string skip_reason;

  bool ok() const { return values.has_value(); }
};

ExtractionResult assemble_feature_vector(const audio::AudioClip& segment,
                                         const ExtractionConfig& cfg = {});

// Labeled corpus table. Parallel arrays, one entry per retained segment.
struct FeatureMatrix {
  std::vector<std::string> feature_names;       // subset-aware column names
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;                      // PD = 1, HC = 0
  std::vector<std::string> subject_ids;
  std::vector<std::string> source_paths;
  std::vector<int> segment_indices;

  std::size_t row_count() const { return rows.size(); }
  std::size_t col_count() const { return feature_names.size(); }
  std::size_t count_label(int label) const;
};

FeatureMatrix select_columns(const FeatureMatrix& m,
                             const std::vector<std::size_t>& cols);
FeatureMatrix select_rows(const FeatureMatrix& m,
                          const std::vector<std::size_t>& idx);

// Per-feature winsorization bounds [Q1 - 1.5 IQR, Q3 + 1.5 IQR], learned on
// training rows (quartiles by linear interpolation).
struct OutlierBounds {
  std::vector<double> lower, upper;
};

OutlierBounds fit_outlier_bounds(const FeatureMatrix& train);
void apply_outlier_bounds(FeatureMatrix& m, const OutlierBounds& b);

// Min-max scaler; a constant feature maps to 0, validation values are not
// clamped to [0, 1].
struct ScalerParams {
  std::vector<double> min, max;
};

ScalerParams fit_min_max(const FeatureMatrix& train);
void apply_min_max(FeatureMatrix& m, const ScalerParams& p);

struct SplitIndices {
  std::vector<std::size_t> train, validation;
};

// Stratified split; subject_disjoint keeps every subject entirely on one
// side. Deterministic given the seed.
SplitIndices split_train_validation(const FeatureMatrix& m,
                                    double train_fraction, std::uint64_t seed,
                                    bool subject_disjoint = false);

// Per-feature one-way ANOVA F-scores between the two label groups, with the
// descending ranking (ties broken by canonical column order). A feature with
// zero within-group variance but distinct means scores +infinity.
struct SelectionResult {
  std::vector<double> f_scores;
  std::vector<std::size_t> ranking;  // feature indices, best first

  std::vector<std::size_t> top_k(std::size_t k) const;
};

SelectionResult anova_f_scores(const FeatureMatrix& m);

// Stratified k folds of row indices; every row appears in exactly one fold.
std::vector<std::vector<std::size_t>> stratified_kfold(
    const std::vector<int>& labels, std::size_t k, std::uint64_t seed);

// Folds that never split a subject across folds, stratified by subject label.
std::vector<std::vector<std::size_t>> subject_kfold(
    const std::vector<int>& labels, const std::vector<std::string>& subjects,
    std::size_t k, std::uint64_t seed);

}  // namespace pdvoice::feat
