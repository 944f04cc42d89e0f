#include "pdvoice/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pdvoice/errors.hpp"
#include "pdvoice/parallel.hpp"
#include "pdvoice/rng.hpp"

namespace pdvoice::eval {

ConfusionCounts confusion(const std::vector<int>& y_true,
                          const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size())
    throw PreconditionError("confusion: length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    int t = y_true[i], p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1))
      throw PreconditionError("confusion: labels must be binary (0/1)");
    if (t == 1)
      p == 1 ? ++c.tp : ++c.fn;
    else
      p == 0 ? ++c.tn : ++c.fp;
  }
  return c;
}

namespace {

double ratio_or_zero(std::size_t num, std::size_t denom, bool* degenerate) {
  if (denom == 0) {
    *degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(denom);
}

}  // namespace

MetricSet metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw PreconditionError("metrics: empty confusion counts");
  MetricSet m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  m.recall = ratio_or_zero(c.tp, c.tp + c.fn, &m.recall_degenerate);
  m.specificity = ratio_or_zero(c.tn, c.tn + c.fp, &m.specificity_degenerate);
  m.precision = ratio_or_zero(c.tp, c.tp + c.fp, &m.precision_degenerate);
  double pr = m.precision + m.recall;
  if (m.precision_degenerate || m.recall_degenerate || pr == 0.0) {
    m.f1_degenerate = true;
    m.f1 = 0.0;
  } else {
    m.f1 = 2.0 * m.precision * m.recall / pr;
  }
  return m;
}

Grouping parse_grouping(const std::string& name) {
  if (name == "segment") return Grouping::kSegment;
  if (name == "subject") return Grouping::kSubject;
  throw PreconditionError("unknown grouping mode: " + name +
                          " (expected 'segment' or 'subject')");
}

const char* grouping_name(Grouping g) {
  return g == Grouping::kSegment ? "segment" : "subject";
}

FoldPreproc fit_fold_preprocessing(const feat::FeatureMatrix& m,
                                   const std::vector<std::size_t>& train_idx,
                                   const PreprocessOptions& prep) {
  FoldPreproc out;
  feat::FeatureMatrix train = feat::select_rows(m, train_idx);
  if (prep.outlier_clip) {
    out.bounds = feat::fit_outlier_bounds(train);
    feat::apply_outlier_bounds(train, *out.bounds);
  }
  if (prep.min_max) {
    out.scaler = feat::fit_min_max(train);
    feat::apply_min_max(train, *out.scaler);
  }
  if (prep.select_k) {
    auto selection = feat::anova_f_scores(train);
    out.columns = selection.top_k(*prep.select_k);
    std::sort(out.columns.begin(), out.columns.end());
  } else {
    out.columns.resize(m.col_count());
    std::iota(out.columns.begin(), out.columns.end(), 0);
  }
  return out;
}

ml::Rows apply_fold_preprocessing(const feat::FeatureMatrix& m,
                                  const std::vector<std::size_t>& idx,
                                  const FoldPreproc& prep) {
  ml::Rows out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    std::vector<double> row = m.rows[i];
    if (prep.bounds)
      for (std::size_t c = 0; c < row.size(); ++c)
        row[c] = std::clamp(row[c], prep.bounds->lower[c], prep.bounds->upper[c]);
    if (prep.scaler)
      for (std::size_t c = 0; c < row.size(); ++c) {
        double range = prep.scaler->max[c] - prep.scaler->min[c];
        row[c] = range > 0.0 ? (row[c] - prep.scaler->min[c]) / range : 0.0;
      }
    std::vector<double> selected;
    selected.reserve(prep.columns.size());
    for (std::size_t c : prep.columns) selected.push_back(row[c]);
    out.push_back(std::move(selected));
  }
  return out;
}

ml::ModelFamily provider_family(const ModelProvider& provider) {
  if (std::holds_alternative<ml::ModelSpec>(provider))
    return std::get<ml::ModelSpec>(provider).family;
  return std::get<GridProvider>(provider).family;
}

namespace {

MetricSummary summarize(const std::vector<FoldResult>& folds,
                        double MetricSet::*field) {
  MetricSummary s;
  const auto n = static_cast<double>(folds.size());
  for (const auto& f : folds) s.mean += f.scores.*field;
  s.mean /= n;
  if (folds.size() > 1) {
    double acc = 0.0;
    for (const auto& f : folds) {
      double d = f.scores.*field - s.mean;
      acc += d * d;
    }
    s.stddev = std::sqrt(acc / (n - 1.0));
  }
  return s;
}

}  // namespace

ModelCvResult repeated_kfold(const feat::FeatureMatrix& m,
                             const ModelProvider& provider,
                             const CvConfig& cfg,
                             const PreprocessOptions& prep) {
  if (cfg.folds < 2) throw PreconditionError("repeated_kfold: folds must be >= 2");
  if (cfg.repeats < 1)
    throw PreconditionError("repeated_kfold: repeats must be >= 1");
  for (int label : {feat::kLabelHc, feat::kLabelPd})
    if (m.count_label(label) < cfg.folds)
      throw DataError(std::string("repeated_kfold: class ") +
                      (label == feat::kLabelPd ? "PD" : "HC") + " has " +
                      std::to_string(m.count_label(label)) +
                      " rows, needs at least " + std::to_string(cfg.folds));

  ModelCvResult result;
  result.family = provider_family(provider);

  // materialize every (repeat, fold) partition up front, then score the
  // folds independently; slot-indexed output keeps the result order-stable
  struct FoldTask {
    std::size_t repeat, fold;
    std::vector<std::size_t> test_idx;
  };
  std::vector<FoldTask> tasks;
  for (std::size_t repeat = 0; repeat < cfg.repeats; ++repeat) {
    std::uint64_t repeat_seed = mix_seed(cfg.seed, 0x4e9ea7ULL + repeat);
    auto folds =
        cfg.grouping == Grouping::kSegment
            ? feat::stratified_kfold(m.labels, cfg.folds, repeat_seed)
            : feat::subject_kfold(m.labels, m.subject_ids, cfg.folds, repeat_seed);
    for (std::size_t f = 0; f < folds.size(); ++f)
      tasks.push_back({repeat, f, std::move(folds[f])});
  }

  result.folds.resize(tasks.size());
  parallel_for(tasks.size(), cfg.jobs, [&](std::size_t t) {
    const FoldTask& task = tasks[t];
    std::vector<bool> in_test(m.row_count(), false);
    for (std::size_t i : task.test_idx) in_test[i] = true;
    std::vector<std::size_t> train_idx;
    train_idx.reserve(m.row_count() - task.test_idx.size());
    for (std::size_t i = 0; i < m.row_count(); ++i)
      if (!in_test[i]) train_idx.push_back(i);

    FoldPreproc fold_prep = fit_fold_preprocessing(m, train_idx, prep);
    ml::Rows train_x = apply_fold_preprocessing(m, train_idx, fold_prep);
    ml::Rows test_x = apply_fold_preprocessing(m, task.test_idx, fold_prep);
    ml::Labels train_y, test_y;
    for (std::size_t i : train_idx) train_y.push_back(m.labels[i]);
    for (std::size_t i : task.test_idx) test_y.push_back(m.labels[i]);

    ml::ModelSpec spec;
    if (std::holds_alternative<ml::ModelSpec>(provider)) {
      spec = std::get<ml::ModelSpec>(provider);
    } else {
      const auto& gp = std::get<GridProvider>(provider);
      std::uint64_t fold_seed =
          mix_seed(mix_seed(cfg.seed, 0x4e9ea7ULL + task.repeat), task.fold);
      spec = ml::grid_search(gp.family, gp.grid, train_x, train_y, gp.folds,
                             fold_seed)
                 .best;
    }

    auto model = ml::fit_model(spec, train_x, train_y);
    auto pred = model->predict(test_x);

    FoldResult fr;
    fr.repeat = task.repeat;
    fr.fold = task.fold;
    fr.counts = confusion(test_y, pred);
    fr.scores = metrics(fr.counts);
    fr.spec_used = spec;
    result.folds[t] = std::move(fr);
  });

  result.accuracy = summarize(result.folds, &MetricSet::accuracy);
  result.specificity = summarize(result.folds, &MetricSet::specificity);
  result.recall = summarize(result.folds, &MetricSet::recall);
  result.precision = summarize(result.folds, &MetricSet::precision);
  result.f1 = summarize(result.folds, &MetricSet::f1);
  return result;
}

}  // namespace pdvoice::eval
