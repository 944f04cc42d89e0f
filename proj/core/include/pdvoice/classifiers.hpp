#pragma once

// Seven classifier families behind one fit/predict interface, plus
// exhaustive grid search. All randomized parts take explicit seeds.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace pdvoice::ml {

using Rows = std::vector<std::vector<double>>;
using Labels = std::vector<int>;

// Canonical order, matching the report column order.
enum class ModelFamily {
  kKnn,
  kDecisionTree,
  kSvm,
  kNaiveBayes,
  kLogisticRegression,
  kGradientBoosting,
  kRandomForest,
};

inline constexpr std::size_t kNumFamilies = 7;

const char* family_name(ModelFamily f);        // "knn", "decision_tree", ...
const char* family_short_name(ModelFamily f);  // "KNN", "DT", ...
ModelFamily parse_family(const std::string& name);
std::vector<ModelFamily> all_families();

using ParamValue = std::variant<int, double, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

std::string param_to_string(const ParamValue& v);

struct ModelSpec {
  ModelFamily family = ModelFamily::kKnn;
  ParamMap params;
  std::uint64_t seed = 0;
};

// Fills omitted hyperparameters with family defaults and rejects unknown
// names or out-of-range values.
ModelSpec validate_spec(const ModelSpec& spec);

// Sensible per-family defaults used when grid search is disabled.
ModelSpec default_spec(ModelFamily family, std::uint64_t seed = 0);

class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual void fit(const Rows& X, const Labels& y) = 0;
  virtual Labels predict(const Rows& X) const = 0;
  // Monotone with class-1 confidence; the decision threshold per family is
  // applied by predict.
  virtual std::vector<double> decision_scores(const Rows& X) const = 0;

  const ModelSpec& spec() const { return spec_; }
  bool fitted() const { return feature_count_ > 0; }
  std::size_t feature_count() const { return feature_count_; }

  // Learned parameters as named numeric arrays, for persistence.
  virtual std::map<std::string, std::vector<double>> state() const = 0;
  virtual void restore(const std::map<std::string, std::vector<double>>& s) = 0;

 protected:
  explicit Classifier(ModelSpec spec) : spec_(std::move(spec)) {}
  void check_predict_input(const Rows& X) const;
  void set_feature_count(std::size_t n) { feature_count_ = n; }

  ModelSpec spec_;
  std::size_t feature_count_ = 0;
};

std::unique_ptr<Classifier> make_classifier(const ModelSpec& spec);

// Convenience: fit and return the trained model.
std::unique_ptr<Classifier> fit_model(const ModelSpec& spec, const Rows& X,
                                      const Labels& y);

// ---- persistence ----

// Versioned JSON text: family, hyperparameters, learned parameters.
void save_model(const Classifier& model, const std::string& path);
std::unique_ptr<Classifier> load_model(const std::string& path);

// ---- grid search ----

struct ParamGrid {
  // Axes expand row-major: the first axis varies slowest.
  std::vector<std::pair<std::string, std::vector<ParamValue>>> axes;

  bool empty() const { return axes.empty(); }
};

ParamGrid default_grid(ModelFamily family);
std::vector<ParamMap> expand_grid(const ParamGrid& grid);

struct GridCellScore {
  ParamMap params;
  double mean_accuracy = 0.0;
  bool valid = true;
};

struct GridSearchResult {
  ModelSpec best;
  std::vector<GridCellScore> cells;
};

// Evaluates every grid cell with stratified k-fold CV on (X, y); picks the
// highest mean accuracy, ties broken by earliest cell. Cells whose fit fails
// are excluded. Naive Bayes bypasses the search and returns its default spec.
// Cells are independent; jobs > 1 evaluates them concurrently with identical
// results.
GridSearchResult grid_search(ModelFamily family, const ParamGrid& grid,
                             const Rows& X, const Labels& y,
                             std::size_t folds, std::uint64_t seed,
                             std::size_t jobs = 1);

}  // namespace pdvoice::ml
