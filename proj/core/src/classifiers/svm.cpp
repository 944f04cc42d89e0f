#include <algorithm>
#include <cmath>

#include "internal.hpp"
#include "pdvoice/errors.hpp"

namespace pdvoice::ml::detail {

namespace {

// Soft-margin SVM trained with simplified SMO. KKT tolerance 1e-3; training
// stops after 10 full passes without an alpha update.
class SvmClassifier final : public Classifier {
 public:
  explicit SvmClassifier(ModelSpec spec) : Classifier(std::move(spec)) {
    c_ = param_double(spec_.params, "C");
    rbf_ = param_string(spec_.params, "kernel") == "rbf";
    if (!param_is_string(spec_.params, "gamma"))
      gamma_ = param_double(spec_.params, "gamma");
  }

  void fit(const Rows& X, const Labels& y) override {
    check_fit_inputs(X, y, /*allow_single_class=*/false);
    const std::size_t n = X.size();
    set_feature_count(X.front().size());

    if (gamma_ <= 0.0) gamma_ = scale_gamma(X);

    // signed labels
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[i] == 1 ? 1.0 : -1.0;

    // full kernel matrix; corpora here are hundreds of rows
    std::vector<double> kernel(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j)
        kernel[i * n + j] = kernel[j * n + i] = kernel_of(X[i], X[j]);

    std::vector<double> alpha(n, 0.0);
    double b = 0.0;
    // error cache: E[i] = f(x_i) - y_i, kept current after every update
    std::vector<double> errors(n);
    for (std::size_t i = 0; i < n; ++i) errors[i] = -ys[i];

    constexpr double kTol = 1e-3;
    constexpr int kMaxQuietPasses = 10;
    constexpr double kMinStep = 1e-12;
    Rng rng(mix_seed(spec_.seed, 0x53a0ULL));

    int quiet_passes = 0;
    int hard_cap = 20000;  // safety bound on total passes
    while (quiet_passes < kMaxQuietPasses && hard_cap-- > 0) {
      int changed = 0;
      for (std::size_t i = 0; i < n; ++i) {
        double ei = errors[i];
        bool violates = (ys[i] * ei < -kTol && alpha[i] < c_) ||
                        (ys[i] * ei > kTol && alpha[i] > 0.0);
        if (!violates) continue;

        // second index: largest |E_i - E_j| over unbounded alphas, falling
        // back to a seeded random pick
        std::size_t j = i;
        double best_gap = -1.0;
        for (std::size_t cand = 0; cand < n; ++cand) {
          if (cand == i || alpha[cand] <= 0.0 || alpha[cand] >= c_) continue;
          double gap = std::abs(ei - errors[cand]);
          if (gap > best_gap) {
            best_gap = gap;
            j = cand;
          }
        }
        if (j == i) {
          j = rng.next_index(n - 1);
          if (j >= i) ++j;
        }

        double ej = errors[j];
        double ai_old = alpha[i], aj_old = alpha[j];
        double lo, hi;
        if (ys[i] != ys[j]) {
          lo = std::max(0.0, aj_old - ai_old);
          hi = std::min(c_, c_ + aj_old - ai_old);
        } else {
          lo = std::max(0.0, ai_old + aj_old - c_);
          hi = std::min(c_, ai_old + aj_old);
        }
        if (lo >= hi) continue;

        double eta = 2.0 * kernel[i * n + j] - kernel[i * n + i] -
                     kernel[j * n + j];
        if (eta >= 0.0) continue;

        double aj = aj_old - ys[j] * (ei - ej) / eta;
        aj = std::clamp(aj, lo, hi);
        if (std::abs(aj - aj_old) < kMinStep) continue;
        double ai = ai_old + ys[i] * ys[j] * (aj_old - aj);

        alpha[i] = ai;
        alpha[j] = aj;

        double b1 = b - ei - ys[i] * (ai - ai_old) * kernel[i * n + i] -
                    ys[j] * (aj - aj_old) * kernel[i * n + j];
        double b2 = b - ej - ys[i] * (ai - ai_old) * kernel[i * n + j] -
                    ys[j] * (aj - aj_old) * kernel[j * n + j];
        double b_new;
        if (ai > 0.0 && ai < c_)
          b_new = b1;
        else if (aj > 0.0 && aj < c_)
          b_new = b2;
        else
          b_new = 0.5 * (b1 + b2);

        double di = ys[i] * (ai - ai_old);
        double dj = ys[j] * (aj - aj_old);
        double db = b_new - b;
        for (std::size_t t = 0; t < n; ++t)
          errors[t] += di * kernel[i * n + t] + dj * kernel[j * n + t] + db;
        b = b_new;
        ++changed;
      }
      quiet_passes = changed == 0 ? quiet_passes + 1 : 0;
    }

    // keep support vectors only
    support_x_.clear();
    support_coef_.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (alpha[i] > 1e-12) {
        support_x_.push_back(X[i]);
        support_coef_.push_back(alpha[i] * ys[i]);
      }
    bias_ = b;
  }

  Labels predict(const Rows& X) const override {
    Labels out;
    out.reserve(X.size());
    for (double s : decision_scores(X)) out.push_back(s >= 0.0 ? 1 : 0);
    return out;
  }

  std::vector<double> decision_scores(const Rows& X) const override {
    check_predict_input(X);
    std::vector<double> out;
    out.reserve(X.size());
    for (const auto& x : X) {
      double acc = bias_;
      for (std::size_t s = 0; s < support_x_.size(); ++s)
        acc += support_coef_[s] * kernel_of(support_x_[s], x);
      out.push_back(acc);
    }
    return out;
  }

  std::map<std::string, std::vector<double>> state() const override {
    std::map<std::string, std::vector<double>> s;
    std::vector<double> flat;
    for (const auto& row : support_x_)
      flat.insert(flat.end(), row.begin(), row.end());
    s["support_x"] = std::move(flat);
    s["support_coef"] = support_coef_;
    s["bias"] = {bias_};
    s["gamma"] = {gamma_};
    s["feature_count"] = {static_cast<double>(feature_count())};
    return s;
  }

  void restore(const std::map<std::string, std::vector<double>>& s) override {
    auto cols = static_cast<std::size_t>(s.at("feature_count").at(0));
    const auto& flat = s.at("support_x");
    support_coef_ = s.at("support_coef");
    if (cols == 0 || flat.size() != support_coef_.size() * cols)
      throw DataError("svm restore: inconsistent state arrays");
    support_x_.assign(support_coef_.size(), std::vector<double>(cols));
    for (std::size_t i = 0; i < support_coef_.size(); ++i)
      std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(i * cols), cols,
                  support_x_[i].begin());
    bias_ = s.at("bias").at(0);
    gamma_ = s.at("gamma").at(0);
    set_feature_count(cols);
  }

 private:
  double kernel_of(const std::vector<double>& a,
                   const std::vector<double>& b) const {
    if (!rbf_) {
      double dot = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
      return dot;
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double diff = a[i] - b[i];
      d2 += diff * diff;
    }
    return std::exp(-gamma_ * d2);
  }

  // 1 / (n_features * variance of all training entries)
  static double scale_gamma(const Rows& X) {
    double sum = 0.0, sum_sq = 0.0, count = 0.0;
    for (const auto& row : X)
      for (double v : row) {
        sum += v;
        sum_sq += v * v;
        count += 1.0;
      }
    double mean = sum / count;
    double var = sum_sq / count - mean * mean;
    if (var <= 0.0) return 1.0;
    return 1.0 / (static_cast<double>(X.front().size()) * var);
  }

  double c_ = 1.0;
  bool rbf_ = true;
  double gamma_ = 0.0;  // 0 = resolve from training data
  Rows support_x_;
  std::vector<double> support_coef_;  // alpha_i * y_i
  double bias_ = 0.0;
};

}  // namespace

std::unique_ptr<Classifier> make_svm(const ModelSpec& spec) {
  return std::make_unique<SvmClassifier>(spec);
}

}  // namespace pdvoice::ml::detail
