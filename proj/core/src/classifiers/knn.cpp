#include <algorithm>
#include <cmath>

#include "internal.hpp"
#include "pdvoice/errors.hpp"

namespace pdvoice::ml::detail {

namespace {

class KnnClassifier final : public Classifier {
 public:
  explicit KnnClassifier(ModelSpec spec)
      : Classifier(std::move(spec)), k_(param_int(spec_.params, "k")) {}

  void fit(const Rows& X, const Labels& y) override {
    check_fit_inputs(X, y, /*allow_single_class=*/true);
    if (X.size() < static_cast<std::size_t>(k_))
      throw PreconditionError("knn: fewer training rows than k");
    train_x_ = X;
    train_y_ = y;
    set_feature_count(X.front().size());
  }

  Labels predict(const Rows& X) const override {
    Labels out;
    out.reserve(X.size());
    for (double s : decision_scores(X)) out.push_back(s > 0.5 ? 1 : 0);
    return out;
  }

  std::vector<double> decision_scores(const Rows& X) const override {
    check_predict_input(X);
    std::vector<double> scores;
    scores.reserve(X.size());
    std::vector<std::pair<double, std::size_t>> dist(train_x_.size());
    for (const auto& q : X) {
      for (std::size_t i = 0; i < train_x_.size(); ++i) {
        double d = 0.0;
        for (std::size_t c = 0; c < q.size(); ++c) {
          double diff = q[c] - train_x_[i][c];
          d += diff * diff;
        }
        dist[i] = {d, i};  // index as tie-break keeps neighbors deterministic
      }
      std::partial_sort(dist.begin(), dist.begin() + k_, dist.end());
      int votes = 0;
      for (int j = 0; j < k_; ++j) votes += train_y_[dist[j].second];
      scores.push_back(static_cast<double>(votes) / static_cast<double>(k_));
    }
    return scores;
  }

  std::map<std::string, std::vector<double>> state() const override {
    std::map<std::string, std::vector<double>> s;
    std::vector<double> flat;
    flat.reserve(train_x_.size() * feature_count());
    for (const auto& row : train_x_)
      flat.insert(flat.end(), row.begin(), row.end());
    s["train_x"] = std::move(flat);
    s["train_y"] = std::vector<double>(train_y_.begin(), train_y_.end());
    s["feature_count"] = {static_cast<double>(feature_count())};
    return s;
  }

  void restore(const std::map<std::string, std::vector<double>>& s) override {
    auto cols = static_cast<std::size_t>(s.at("feature_count").at(0));
    const auto& flat = s.at("train_x");
    const auto& y = s.at("train_y");
    if (cols == 0 || flat.size() % cols != 0 || flat.size() / cols != y.size())
      throw DataError("knn restore: inconsistent state arrays");
    train_x_.assign(y.size(), std::vector<double>(cols));
    for (std::size_t i = 0; i < y.size(); ++i)
      std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(i * cols), cols,
                  train_x_[i].begin());
    train_y_.assign(y.begin(), y.end());
    set_feature_count(cols);
  }

 private:
  int k_;
  Rows train_x_;
  Labels train_y_;
};

}  // namespace

std::unique_ptr<Classifier> make_knn(const ModelSpec& spec) {
  return std::make_unique<KnnClassifier>(spec);
}

}  // namespace pdvoice::ml::detail
