#include <algorithm>
#include <set>

#include "internal.hpp"
#include "pdvoice/errors.hpp"
#include "pdvoice/features.hpp"
#include "pdvoice/parallel.hpp"

namespace pdvoice::ml {

namespace {

// Cells that configure the same effective model (e.g. a linear-kernel SVM
// with different gamma values) collapse to their earliest occurrence.
ParamMap canonical_params(ModelFamily family, const ParamMap& params) {
  ParamMap out = params;
  if (family == ModelFamily::kSvm) {
    auto kernel = out.find("kernel");
    if (kernel != out.end() &&
        std::holds_alternative<std::string>(kernel->second) &&
        std::get<std::string>(kernel->second) == "linear")
      out.erase("gamma");
  }
  return out;
}

std::string params_key(const ParamMap& params) {
  std::string key;
  for (const auto& [name, value] : params) {
    key += name;
    key += '=';
    key += param_to_string(value);
    key += ';';
  }
  return key;
}

}  // namespace

ParamGrid default_grid(ModelFamily family) {
  ParamGrid g;
  switch (family) {
    case ModelFamily::kKnn:
      g.axes = {{"k", {1, 3, 5, 7, 9, 11}}};
      break;
    case ModelFamily::kDecisionTree:
      g.axes = {{"max_depth", {3, 5, 8, 0}}, {"min_leaf", {1, 5}}};
      break;
    case ModelFamily::kSvm:
      g.axes = {{"C", {0.1, 1.0, 10.0, 100.0}},
                {"kernel", {std::string("linear"), std::string("rbf")}},
                {"gamma", {std::string("scale"), 0.01, 0.1, 1.0}}};
      break;
    case ModelFamily::kNaiveBayes:
      break;  // no tunables; grid search bypasses this family
    case ModelFamily::kLogisticRegression:
      g.axes = {{"lambda", {0.0, 0.01, 0.1, 1.0}}};
      break;
    case ModelFamily::kGradientBoosting:
      g.axes = {{"n_trees", {50, 100, 200}},
                {"learning_rate", {0.05, 0.1, 0.3}},
                {"max_depth", {1, 2, 3}}};
      break;
    case ModelFamily::kRandomForest:
      g.axes = {{"n_trees", {100, 200}},
                {"max_features", {std::string("sqrt"), std::string("all")}}};
      break;
  }
  return g;
}

std::vector<ParamMap> expand_grid(const ParamGrid& grid) {
  std::vector<ParamMap> cells = {ParamMap{}};
  for (const auto& [name, values] : grid.axes) {
    if (values.empty())
      throw PreconditionError("expand_grid: axis '" + name + "' has no values");
    std::vector<ParamMap> next;
    next.reserve(cells.size() * values.size());
    for (const auto& cell : cells)
      for (const auto& value : values) {
        ParamMap with = cell;
        with[name] = value;
        next.push_back(std::move(with));
      }
    cells = std::move(next);
  }
  return cells;
}

GridSearchResult grid_search(ModelFamily family, const ParamGrid& grid,
                             const Rows& X, const Labels& y,
                             std::size_t folds, std::uint64_t seed,
                             std::size_t jobs) {
  GridSearchResult result;
  if (family == ModelFamily::kNaiveBayes) {
    result.best = default_spec(family, seed);
    return result;
  }
  if (grid.empty())
    throw PreconditionError("grid_search: empty grid for family " +
                            std::string(family_name(family)));
  if (folds < 2) throw PreconditionError("grid_search: folds must be >= 2");

  auto raw_cells = expand_grid(grid);
  std::vector<ParamMap> cells;
  std::set<std::string> seen;
  for (auto& cell : raw_cells) {
    ParamMap canon = canonical_params(family, cell);
    if (seen.insert(params_key(canon)).second) cells.push_back(std::move(canon));
  }

  // one shared partition, so cells compete on identical folds
  auto fold_sets = feat::stratified_kfold(y, folds, mix_seed(seed, 0x96dULL));

  result.cells.resize(cells.size());
  parallel_for(cells.size(), jobs, [&](std::size_t c) {
    GridCellScore score;
    score.params = cells[c];
    double acc_sum = 0.0;
    try {
      ModelSpec spec{family, cells[c], mix_seed(seed, 0xce11ULL + c)};
      for (const auto& test_fold : fold_sets) {
        Rows train_x, test_x;
        Labels train_y, test_y;
        std::vector<bool> in_test(y.size(), false);
        for (std::size_t i : test_fold) in_test[i] = true;
        for (std::size_t i = 0; i < y.size(); ++i) {
          if (in_test[i]) {
            test_x.push_back(X[i]);
            test_y.push_back(y[i]);
          } else {
            train_x.push_back(X[i]);
            train_y.push_back(y[i]);
          }
        }
        auto model = fit_model(spec, train_x, train_y);
        auto pred = model->predict(test_x);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < pred.size(); ++i)
          if (pred[i] == test_y[i]) ++hits;
        acc_sum += static_cast<double>(hits) / static_cast<double>(pred.size());
      }
      score.mean_accuracy = acc_sum / static_cast<double>(fold_sets.size());
    } catch (const Error&) {
      score.valid = false;
    }
    result.cells[c] = std::move(score);
  });

  double best_acc = -1.0;
  std::size_t best_cell = 0;
  bool any_valid = false;
  for (std::size_t c = 0; c < result.cells.size(); ++c)
    if (result.cells[c].valid && result.cells[c].mean_accuracy > best_acc) {
      best_acc = result.cells[c].mean_accuracy;
      best_cell = c;
      any_valid = true;
    }

  if (!any_valid)
    throw DataError("grid_search: every cell failed to fit for family " +
                    std::string(family_name(family)));
  result.best = ModelSpec{family, cells[best_cell], seed};
  return result;
}

}  // namespace pdvoice::ml
