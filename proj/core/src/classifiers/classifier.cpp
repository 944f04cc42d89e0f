#include "pdvoice/classifiers.hpp"

#include <cmath>

#include "internal.hpp"
#include "pdvoice/errors.hpp"

namespace pdvoice::ml {

namespace {

struct FamilyInfo {
  ModelFamily family;
  const char* name;
  const char* short_name;
};

constexpr FamilyInfo kFamilies[] = {
    {ModelFamily::kKnn, "knn", "KNN"},
    {ModelFamily::kDecisionTree, "decision_tree", "DT"},
    {ModelFamily::kSvm, "svm", "SVM"},
    {ModelFamily::kNaiveBayes, "naive_bayes", "NB"},
    {ModelFamily::kLogisticRegression, "logistic_regression", "LR"},
    {ModelFamily::kGradientBoosting, "gradient_boosting", "GB"},
    {ModelFamily::kRandomForest, "random_forest", "RF"},
};

}  // namespace

const char* family_name(ModelFamily f) {
  return kFamilies[static_cast<int>(f)].name;
}

const char* family_short_name(ModelFamily f) {
  return kFamilies[static_cast<int>(f)].short_name;
}

ModelFamily parse_family(const std::string& name) {
  for (const auto& info : kFamilies)
    if (name == info.name || name == info.short_name) return info.family;
  throw PreconditionError("unknown model family: " + name);
}

std::vector<ModelFamily> all_families() {
  std::vector<ModelFamily> out;
  for (const auto& info : kFamilies) out.push_back(info.family);
  return out;
}

std::string param_to_string(const ParamValue& v) {
  if (std::holds_alternative<int>(v)) return std::to_string(std::get<int>(v));
  if (std::holds_alternative<double>(v)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", std::get<double>(v));
    return buf;
  }
  return std::get<std::string>(v);
}

namespace detail {

void check_fit_inputs(const Rows& X, const Labels& y, bool allow_single_class) {
  if (X.empty() || y.size() != X.size())
    throw PreconditionError("fit: X and y must be non-empty and equal length");
  const std::size_t cols = X.front().size();
  if (cols == 0) throw PreconditionError("fit: rows must have features");
  bool seen[2] = {false, false};
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (X[i].size() != cols) throw PreconditionError("fit: ragged feature rows");
    for (double v : X[i])
      if (!std::isfinite(v))
        throw PreconditionError("fit: non-finite feature value");
    if (y[i] != 0 && y[i] != 1)
      throw PreconditionError("fit: labels must be binary (0/1)");
    seen[y[i]] = true;
  }
  if (!allow_single_class && (!seen[0] || !seen[1]))
    throw PreconditionError("fit: both classes must be present");
}

int param_int(const ParamMap& p, const std::string& name) {
  auto it = p.find(name);
  if (it == p.end()) throw PreconditionError("missing hyperparameter: " + name);
  if (std::holds_alternative<int>(it->second)) return std::get<int>(it->second);
  if (std::holds_alternative<double>(it->second)) {
    double v = std::get<double>(it->second);
    if (v == std::floor(v)) return static_cast<int>(v);
  }
  throw PreconditionError("hyperparameter " + name + " must be an integer");
}

double param_double(const ParamMap& p, const std::string& name) {
  auto it = p.find(name);
  if (it == p.end()) throw PreconditionError("missing hyperparameter: " + name);
  if (std::holds_alternative<double>(it->second))
    return std::get<double>(it->second);
  if (std::holds_alternative<int>(it->second))
    return static_cast<double>(std::get<int>(it->second));
  throw PreconditionError("hyperparameter " + name + " must be numeric");
}

const std::string& param_string(const ParamMap& p, const std::string& name) {
  auto it = p.find(name);
  if (it == p.end()) throw PreconditionError("missing hyperparameter: " + name);
  if (!std::holds_alternative<std::string>(it->second))
    throw PreconditionError("hyperparameter " + name + " must be a string");
  return std::get<std::string>(it->second);
}

bool param_is_string(const ParamMap& p, const std::string& name) {
  auto it = p.find(name);
  return it != p.end() && std::holds_alternative<std::string>(it->second);
}

}  // namespace detail

namespace {

using detail::param_double;
using detail::param_int;
using detail::param_is_string;
using detail::param_string;

void put_default(ParamMap& p, const std::string& name, ParamValue v) {
  p.emplace(name, std::move(v));
}

void require_known(const ParamMap& p, std::initializer_list<const char*> known,
                   ModelFamily family) {
  for (const auto& [name, value] : p) {
    bool ok = false;
    for (const char* k : known) ok = ok || name == k;
    if (!ok)
      throw PreconditionError(std::string("unknown hyperparameter '") + name +
                              "' for family " + family_name(family));
  }
}

}  // namespace

ModelSpec validate_spec(const ModelSpec& spec) {
  ModelSpec out = spec;
  ParamMap& p = out.params;
  switch (spec.family) {
    case ModelFamily::kKnn: {
      require_known(p, {"k"}, spec.family);
      put_default(p, "k", 5);
      int k = param_int(p, "k");
      if (k < 1 || k % 2 == 0)
        throw PreconditionError("knn: k must be odd and >= 1");
      break;
    }
    case ModelFamily::kDecisionTree: {
      require_known(p, {"max_depth", "min_leaf"}, spec.family);
      put_default(p, "max_depth", 0);
      put_default(p, "min_leaf", 1);
      if (param_int(p, "max_depth") < 0)
        throw PreconditionError("decision_tree: max_depth must be >= 0 (0 = unlimited)");
      if (param_int(p, "min_leaf") < 1)
        throw PreconditionError("decision_tree: min_leaf must be >= 1");
      break;
    }
    case ModelFamily::kSvm: {
      require_known(p, {"C", "kernel", "gamma"}, spec.family);
      put_default(p, "C", 1.0);
      put_default(p, "kernel", std::string("rbf"));
      put_default(p, "gamma", std::string("scale"));
      if (param_double(p, "C") <= 0)
        throw PreconditionError("svm: C must be positive");
      const std::string& kernel = param_string(p, "kernel");
      if (kernel != "linear" && kernel != "rbf")
        throw PreconditionError("svm: kernel must be 'linear' or 'rbf'");
      if (param_is_string(p, "gamma")) {
        if (param_string(p, "gamma") != "scale")
          throw PreconditionError("svm: gamma must be positive or 'scale'");
      } else if (param_double(p, "gamma") <= 0) {
        throw PreconditionError("svm: gamma must be positive or 'scale'");
      }
      break;
    }
    case ModelFamily::kNaiveBayes:
      require_known(p, {}, spec.family);
      break;
    case ModelFamily::kLogisticRegression: {
      require_known(p, {"lambda", "max_iters", "tol"}, spec.family);
      put_default(p, "lambda", 0.01);
      put_default(p, "max_iters", 5000);
      put_default(p, "tol", 1e-6);
      if (param_double(p, "lambda") < 0)
        throw PreconditionError("logistic_regression: lambda must be >= 0");
      if (param_int(p, "max_iters") < 1)
        throw PreconditionError("logistic_regression: max_iters must be >= 1");
      break;
    }
    case ModelFamily::kGradientBoosting: {
      require_known(p, {"n_trees", "learning_rate", "max_depth"}, spec.family);
      put_default(p, "n_trees", 100);
      put_default(p, "learning_rate", 0.1);
      put_default(p, "max_depth", 2);
      if (param_int(p, "n_trees") < 1)
        throw PreconditionError("gradient_boosting: n_trees must be >= 1");
      if (param_double(p, "learning_rate") <= 0)
        throw PreconditionError("gradient_boosting: learning_rate must be positive");
      if (param_int(p, "max_depth") < 1)
        throw PreconditionError("gradient_boosting: max_depth must be >= 1");
      break;
    }
    case ModelFamily::kRandomForest: {
      require_known(p, {"n_trees", "max_features", "bootstrap", "min_leaf"},
                    spec.family);
      put_default(p, "n_trees", 200);
      put_default(p, "max_features", std::string("sqrt"));
      put_default(p, "bootstrap", 1);
      put_default(p, "min_leaf", 1);
      if (param_int(p, "n_trees") < 1)
        throw PreconditionError("random_forest: n_trees must be >= 1");
      const std::string& mf = param_string(p, "max_features");
      if (mf != "sqrt" && mf != "all")
        throw PreconditionError("random_forest: max_features must be 'sqrt' or 'all'");
      int bs = param_int(p, "bootstrap");
      if (bs != 0 && bs != 1)
        throw PreconditionError("random_forest: bootstrap must be 0 or 1");
      break;
    }
  }
  return out;
}

ModelSpec default_spec(ModelFamily family, std::uint64_t seed) {
  ModelSpec spec;
  spec.family = family;
  spec.seed = seed;
  switch (family) {
    case ModelFamily::kSvm:
      spec.params["C"] = 10.0;
      break;
    case ModelFamily::kGradientBoosting:
      spec.params["n_trees"] = 100;
      break;
    default:
      break;
  }
  return validate_spec(spec);
}

void Classifier::check_predict_input(const Rows& X) const {
  if (!fitted()) throw PreconditionError("predict: model is not fitted");
  for (const auto& row : X)
    if (row.size() != feature_count_)
      throw PreconditionError(
          "predict: row has " + std::to_string(row.size()) +
          " features, model was trained with " + std::to_string(feature_count_));
}

std::unique_ptr<Classifier> make_classifier(const ModelSpec& spec) {
  ModelSpec v = validate_spec(spec);
  switch (v.family) {
    case ModelFamily::kKnn:
      return detail::make_knn(v);
    case ModelFamily::kDecisionTree:
      return detail::make_decision_tree(v);
    case ModelFamily::kSvm:
      return detail::make_svm(v);
    case ModelFamily::kNaiveBayes:
      return detail::make_naive_bayes(v);
    case ModelFamily::kLogisticRegression:
      return detail::make_logistic_regression(v);
    case ModelFamily::kGradientBoosting:
      return detail::make_gradient_boosting(v);
    case ModelFamily::kRandomForest:
      return detail::make_random_forest(v);
  }
  throw PreconditionError("make_classifier: unknown family");
}

std::unique_ptr<Classifier> fit_model(const ModelSpec& spec, const Rows& X,
                                      const Labels& y) {
  auto model = make_classifier(spec);
  model->fit(X, y);
  return model;
}

}  // namespace pdvoice::ml
