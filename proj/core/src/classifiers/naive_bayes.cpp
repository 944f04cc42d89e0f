#include <cmath>
#include <numbers>

#include "internal.hpp"
#include "pdvoice/errors.hpp"

namespace pdvoice::ml::detail {

namespace {

constexpr double kVarianceFloor = 1e-9;

// Gaussian Naive Bayes: per-class feature means/variances and log priors.
class NaiveBayesClassifier final : public Classifier {
 public:
  explicit NaiveBayesClassifier(ModelSpec spec) : Classifier(std::move(spec)) {}

  void fit(const Rows& X, const Labels& y) override {
    check_fit_inputs(X, y, /*allow_single_class=*/false);
    const std::size_t cols = X.front().size();
    for (int g = 0; g < 2; ++g) {
      mean_[g].assign(cols, 0.0);
      var_[g].assign(cols, 0.0);
    }
    double count[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < X.size(); ++i) {
      count[y[i]] += 1.0;
      for (std::size_t c = 0; c < cols; ++c) mean_[y[i]][c] += X[i][c];
    }
    for (int g = 0; g < 2; ++g)
      for (std::size_t c = 0; c < cols; ++c) mean_[g][c] /= count[g];
    for (std::size_t i = 0; i < X.size(); ++i)
      for (std::size_t c = 0; c < cols; ++c) {
        double d = X[i][c] - mean_[y[i]][c];
        var_[y[i]][c] += d * d;
      }
    for (int g = 0; g < 2; ++g) {
      for (std::size_t c = 0; c < cols; ++c)
        var_[g][c] = std::max(var_[g][c] / count[g], kVarianceFloor);
      log_prior_[g] = std::log(count[g] / static_cast<double>(X.size()));
    }
    set_feature_count(cols);
  }

  Labels predict(const Rows& X) const override {
    Labels out;
    out.reserve(X.size());
    for (double s : decision_scores(X)) out.push_back(s > 0.0 ? 1 : 0);
    return out;
  }

  // log P(1|x) - log P(0|x) up to the shared evidence term
  std::vector<double> decision_scores(const Rows& X) const override {
    check_predict_input(X);
    std::vector<double> out;
    out.reserve(X.size());
    for (const auto& x : X) {
      double ll[2];
      for (int g = 0; g < 2; ++g) {
        double acc = log_prior_[g];
        for (std::size_t c = 0; c < x.size(); ++c) {
          double d = x[c] - mean_[g][c];
          acc += -0.5 * std::log(2.0 * std::numbers::pi * var_[g][c]) -
                 d * d / (2.0 * var_[g][c]);
        }
        ll[g] = acc;
      }
      out.push_back(ll[1] - ll[0]);
    }
    return out;
  }

  std::map<std::string, std::vector<double>> state() const override {
    return {{"mean_0", mean_[0]},
            {"mean_1", mean_[1]},
            {"var_0", var_[0]},
            {"var_1", var_[1]},
            {"log_prior", {log_prior_[0], log_prior_[1]}},
            {"feature_count", {static_cast<double>(feature_count())}}};
  }

  void restore(const std::map<std::string, std::vector<double>>& s) override {
    mean_[0] = s.at("mean_0");
    mean_[1] = s.at("mean_1");
    var_[0] = s.at("var_0");
    var_[1] = s.at("var_1");
    log_prior_[0] = s.at("log_prior").at(0);
    log_prior_[1] = s.at("log_prior").at(1);
    set_feature_count(static_cast<std::size_t>(s.at("feature_count").at(0)));
  }

 private:
  std::vector<double> mean_[2], var_[2];
  double log_prior_[2] = {0.0, 0.0};
};

}  // namespace

std::unique_ptr<Classifier> make_naive_bayes(const ModelSpec& spec) {
  return std::make_unique<NaiveBayesClassifier>(spec);
}

}  // namespace pdvoice::ml::detail
