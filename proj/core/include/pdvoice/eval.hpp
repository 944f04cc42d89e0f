#pragma once

// Metrics and the experiment protocol: repeated stratified 6-fold
// cross-validation with per-fold preprocessing, aggregated per model.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pdvoice/classifiers.hpp"
#include "pdvoice/features.hpp"

namespace pdvoice::eval {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
};

// PD (label 1) is the positive class.
ConfusionCounts confusion(const std::vector<int>& y_true,
                          const std::vector<int>& y_pred);

struct MetricSet {
  double accuracy = 0.0;
  double specificity = 0.0;
  double recall = 0.0;  // sensitivity
  double precision = 0.0;
  double f1 = 0.0;
  // set when the corresponding denominator was zero and the value is the
  // declared 0 convention
  bool recall_degenerate = false;
  bool specificity_degenerate = false;
  bool precision_degenerate = false;
  bool f1_degenerate = false;
};

MetricSet metrics(const ConfusionCounts& c);

enum class Grouping { kSegment, kSubject };

Grouping parse_grouping(const std::string& name);
const char* grouping_name(Grouping g);

struct CvConfig {
  std::size_t folds = 6;
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  Grouping grouping = Grouping::kSegment;
  std::size_t jobs = 1;  // folds are independent; results are order-stable
};

struct PreprocessOptions {
  bool outlier_clip = true;
  bool min_max = true;
  std::optional<std::size_t> select_k;  // ANOVA top-k inside each fold
};

// Per-fold preprocessing state, fitted on training rows only.
struct FoldPreproc {
  std::optional<feat::OutlierBounds> bounds;
  std::optional<feat::ScalerParams> scaler;
  std::vector<std::size_t> columns;  // retained feature columns, in order
};

FoldPreproc fit_fold_preprocessing(const feat::FeatureMatrix& m,
                                   const std::vector<std::size_t>& train_idx,
                                   const PreprocessOptions& prep);

// Applies the fitted transforms to the given rows of m.
ml::Rows apply_fold_preprocessing(const feat::FeatureMatrix& m,
                                  const std::vector<std::size_t>& idx,
                                  const FoldPreproc& prep);

// Either a fixed spec, or a per-fold grid search on the training folds.
struct GridProvider {
  ml::ModelFamily family;
  ml::ParamGrid grid;
  std::size_t folds = 6;
};

using ModelProvider = std::variant<ml::ModelSpec, GridProvider>;

ml::ModelFamily provider_family(const ModelProvider& provider);

struct FoldResult {
  std::size_t repeat = 0;
  std::size_t fold = 0;
  ConfusionCounts counts;
  MetricSet scores;
  ml::ModelSpec spec_used;
};

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation over folds
};

struct ModelCvResult {
  ml::ModelFamily family = ml::ModelFamily::kKnn;
  std::vector<FoldResult> folds;  // k x repeats entries
  MetricSummary accuracy, specificity, recall, precision, f1;
};

// Fresh seeded stratified partition per repeat; preprocessing, selection and
// the model are fitted on the k-1 training folds only.
ModelCvResult repeated_kfold(const feat::FeatureMatrix& m,
                             const ModelProvider& provider,
                             const CvConfig& cfg,
                             const PreprocessOptions& prep);

struct CvReport {
  struct Entry {
    std::string feature_set;
    ModelCvResult result;
  };
  std::vector<Entry> entries;
};

// Feature-set x metric x model grids; percentages with one decimal place.
std::string render_report_csv(const CvReport& report);
std::string render_report_text(const CvReport& report);

// "85.7" from 0.857142.
std::string format_pct(double fraction);

}  // namespace pdvoice::eval
