#include <cmath>
#include <numeric>

#include "internal.hpp"
#include "pdvoice/errors.hpp"

namespace pdvoice::ml::detail {

namespace {

// Bagged Gini trees with per-split feature subsampling and majority vote.
// Each tree draws its bootstrap sample and split features from a seed derived
// from (base seed, tree index), so the forest is schedule-independent.
class RandomForestClassifier final : public Classifier {
 public:
  explicit RandomForestClassifier(ModelSpec spec) : Classifier(std::move(spec)) {
    n_trees_ = param_int(spec_.params, "n_trees");
    sqrt_features_ = param_string(spec_.params, "max_features") == "sqrt";
    bootstrap_ = param_int(spec_.params, "bootstrap") == 1;
    min_leaf_ = param_int(spec_.params, "min_leaf");
  }

  void fit(const Rows& X, const Labels& y) override {
    check_fit_inputs(X, y, /*allow_single_class=*/false);
    const std::size_t n = X.size();
    const std::size_t num_features = X.front().size();

    TreeOptions opts;
    opts.min_leaf = min_leaf_;
    opts.max_features =
        sqrt_features_
            ? std::max(1, static_cast<int>(std::floor(std::sqrt(
                              static_cast<double>(num_features)))))
            : 0;

    trees_.assign(static_cast<std::size_t>(n_trees_), {});
    for (std::size_t t = 0; t < trees_.size(); ++t) {
      Rng rng(mix_seed(spec_.seed, 0xf0e57ULL + t));
      std::vector<std::size_t> rows(n);
      if (bootstrap_) {
        for (auto& r : rows) r = rng.next_index(n);
      } else {
        std::iota(rows.begin(), rows.end(), 0);
      }
      trees_[t] = grow_gini_tree(X, y, rows, opts, &rng);
    }
    set_feature_count(num_features);
  }

  Labels predict(const Rows& X) const override {
    Labels out;
    out.reserve(X.size());
    for (double s : decision_scores(X)) out.push_back(s > 0.5 ? 1 : 0);
    return out;
  }

  // fraction of trees voting for class 1
  std::vector<double> decision_scores(const Rows& X) const override {
    check_predict_input(X);
    std::vector<double> out;
    out.reserve(X.size());
    for (const auto& x : X) {
      double votes = 0.0;
      for (const auto& tree : trees_) votes += tree_leaf(tree, x).label;
      out.push_back(votes / static_cast<double>(trees_.size()));
    }
    return out;
  }

  std::map<std::string, std::vector<double>> state() const override {
    std::map<std::string, std::vector<double>> s;
    std::vector<double> nodes, offsets;
    for (const auto& tree : trees_) {
      offsets.push_back(static_cast<double>(nodes.size()));
      auto packed = pack_tree(tree);
      nodes.insert(nodes.end(), packed.begin(), packed.end());
    }
    offsets.push_back(static_cast<double>(nodes.size()));
    s["tree_nodes"] = std::move(nodes);
    s["tree_offsets"] = std::move(offsets);
    s["feature_count"] = {static_cast<double>(feature_count())};
    return s;
  }

  void restore(const std::map<std::string, std::vector<double>>& s) override {
    const auto& nodes = s.at("tree_nodes");
    const auto& offsets = s.at("tree_offsets");
    trees_.clear();
    for (std::size_t t = 0; t + 1 < offsets.size(); ++t) {
      auto begin = static_cast<std::size_t>(offsets[t]);
      auto end = static_cast<std::size_t>(offsets[t + 1]);
      if (end < begin || end > nodes.size())
        throw DataError("random_forest restore: malformed tree arrays");
      trees_.push_back(unpack_tree(
          std::vector<double>(nodes.begin() + static_cast<std::ptrdiff_t>(begin),
                              nodes.begin() + static_cast<std::ptrdiff_t>(end))));
    }
    set_feature_count(static_cast<std::size_t>(s.at("feature_count").at(0)));
  }

 private:
  int n_trees_ = 200;
  bool sqrt_features_ = true;
  bool bootstrap_ = true;
  int min_leaf_ = 1;
  std::vector<std::vector<TreeNode>> trees_;
};

}  // namespace

std::unique_ptr<Classifier> make_random_forest(const ModelSpec& spec) {
  return std::make_unique<RandomForestClassifier>(spec);
}

}  // namespace pdvoice::ml::detail
