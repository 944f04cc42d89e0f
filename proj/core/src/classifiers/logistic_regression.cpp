#include <cmath>

#include "internal.hpp"
#include "pdvoice/errors.hpp"

namespace pdvoice::ml::detail {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

namespace lr {

// J(w, b) = mean log-loss + (lambda/2) ||w||^2; bias is not regularized.
double loss(const Rows& X, const Labels& y, const std::vector<double>& w,
            double b, double lambda) {
  double acc = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    double z = b;
    for (std::size_t c = 0; c < w.size(); ++c) z += w[c] * X[i][c];
    // log(1 + exp(-|z|)) form keeps the loss finite for large |z|
    double margin = y[i] == 1 ? z : -z;
    acc += margin >= 0.0 ? std::log1p(std::exp(-margin))
                         : -margin + std::log1p(std::exp(margin));
  }
  acc /= static_cast<double>(X.size());
  double reg = 0.0;
  for (double v : w) reg += v * v;
  return acc + 0.5 * lambda * reg;
}

void gradient(const Rows& X, const Labels& y, const std::vector<double>& w,
              double b, double lambda, std::vector<double>& grad_w,
              double& grad_b) {
  const std::size_t cols = w.size();
  grad_w.assign(cols, 0.0);
  grad_b = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    double z = b;
    for (std::size_t c = 0; c < cols; ++c) z += w[c] * X[i][c];
    double err = sigmoid(z) - static_cast<double>(y[i]);
    for (std::size_t c = 0; c < cols; ++c) grad_w[c] += err * X[i][c];
    grad_b += err;
  }
  const auto n = static_cast<double>(X.size());
  for (std::size_t c = 0; c < cols; ++c) grad_w[c] = grad_w[c] / n + lambda * w[c];
  grad_b /= n;
}

}  // namespace lr

namespace {

// Batch gradient descent with a backtracking step, run to gradient tolerance
// 1e-6 or max_iters.
class LogisticRegressionClassifier final : public Classifier {
 public:
  explicit LogisticRegressionClassifier(ModelSpec spec)
      : Classifier(std::move(spec)) {
    lambda_ = param_double(spec_.params, "lambda");
    max_iters_ = param_int(spec_.params, "max_iters");
    tol_ = param_double(spec_.params, "tol");
  }

  void fit(const Rows& X, const Labels& y) override {
    check_fit_inputs(X, y, /*allow_single_class=*/false);
    const std::size_t cols = X.front().size();
    weights_.assign(cols, 0.0);
    bias_ = 0.0;

    std::vector<double> grad_w(cols);
    double grad_b = 0.0;
    double step = 1.0;
    double current = lr::loss(X, y, weights_, bias_, lambda_);

    for (int iter = 0; iter < max_iters_; ++iter) {
      lr::gradient(X, y, weights_, bias_, lambda_, grad_w, grad_b);
      double gmax = std::abs(grad_b);
      for (double g : grad_w) gmax = std::max(gmax, std::abs(g));
      if (gmax < tol_) break;

      // backtrack until the step improves the loss
      std::vector<double> trial_w(cols);
      bool moved = false;
      while (step > 1e-12) {
        for (std::size_t c = 0; c < cols; ++c)
          trial_w[c] = weights_[c] - step * grad_w[c];
        double trial_b = bias_ - step * grad_b;
        double trial = lr::loss(X, y, trial_w, trial_b, lambda_);
        if (trial < current) {
          weights_ = trial_w;
          bias_ = trial_b;
          current = trial;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
      step *= 1.25;  // recover step size after successful moves
    }
    set_feature_count(cols);
  }

  Labels predict(const Rows& X) const override {
    Labels out;
    out.reserve(X.size());
    for (double z : decision_scores(X)) out.push_back(z > 0.0 ? 1 : 0);
    return out;
  }

  std::vector<double> decision_scores(const Rows& X) const override {
    check_predict_input(X);
    std::vector<double> out;
    out.reserve(X.size());
    for (const auto& x : X) {
      double z = bias_;
      for (std::size_t c = 0; c < x.size(); ++c) z += weights_[c] * x[c];
      out.push_back(z);
    }
    return out;
  }

  std::map<std::string, std::vector<double>> state() const override {
    return {{"weights", weights_},
            {"bias", {bias_}},
            {"feature_count", {static_cast<double>(feature_count())}}};
  }

  void restore(const std::map<std::string, std::vector<double>>& s) override {
    weights_ = s.at("weights");
    bias_ = s.at("bias").at(0);
    set_feature_count(static_cast<std::size_t>(s.at("feature_count").at(0)));
  }

 private:
  double lambda_ = 0.0;
  int max_iters_ = 5000;
  double tol_ = 1e-6;
  std::vector<double> weights_;
  double bias_ = 0.0;
};

}  // namespace

std::unique_ptr<Classifier> make_logistic_regression(const ModelSpec& spec) {
  return std::make_unique<LogisticRegressionClassifier>(spec);
}

}  // namespace pdvoice::ml::detail
