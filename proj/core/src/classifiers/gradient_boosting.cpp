#include <algorithm>
#include <cmath>
#include <numeric>

#include "internal.hpp"
#include "pdvoice/errors.hpp"

namespace pdvoice::ml::detail {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Regression tree node for boosting stages. Splits reduce squared error of
// the pseudo-residuals; leaf values are a Newton step sum(g)/sum(h).
struct RegNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct RegSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // sum of child SSEs
};

RegSplit best_reg_split(const Rows& X, const std::vector<double>& residual,
                        const std::vector<std::size_t>& rows) {
  RegSplit best;
  const std::size_t num_features = X.front().size();
  std::vector<std::pair<double, double>> values(rows.size());
  for (std::size_t f = 0; f < num_features; ++f) {
    for (std::size_t i = 0; i < rows.size(); ++i)
      values[i] = {X[rows[i]][f], residual[rows[i]]};
    std::sort(values.begin(), values.end());

    double total = 0.0, total_sq = 0.0;
    for (const auto& [v, r] : values) {
      total += r;
      total_sq += r * r;
    }
    double left_n = 0.0, left_sum = 0.0, left_sq = 0.0;
    const auto n = static_cast<double>(rows.size());
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      left_n += 1.0;
      left_sum += values[i].second;
      left_sq += values[i].second * values[i].second;
      if (values[i].first == values[i + 1].first) continue;
      double right_n = n - left_n;
      double right_sum = total - left_sum;
      double right_sq = total_sq - left_sq;
      double sse = (left_sq - left_sum * left_sum / left_n) +
                   (right_sq - right_sum * right_sum / right_n);
      double threshold = 0.5 * (values[i].first + values[i + 1].first);
      bool better = !best.found || sse < best.score - 1e-15 ||
                    (std::abs(sse - best.score) <= 1e-15 &&
                     (static_cast<int>(f) < best.feature ||
                      (static_cast<int>(f) == best.feature &&
                       threshold < best.threshold)));
      if (better) best = {true, static_cast<int>(f), threshold, sse};
    }
  }
  return best;
}

int grow_reg_node(const Rows& X, const std::vector<double>& residual,
                  const std::vector<double>& hessian,
                  std::vector<std::size_t> rows, int depth, int max_depth,
                  std::vector<RegNode>& nodes) {
  auto make_leaf = [&]() {
    double g = 0.0, h = 0.0;
    for (std::size_t r : rows) {
      g += residual[r];
      h += hessian[r];
    }
    RegNode leaf;
    leaf.value = g / std::max(h, 1e-12);
    nodes.push_back(leaf);
    return static_cast<int>(nodes.size() - 1);
  };

  if (depth >= max_depth || rows.size() < 2) return make_leaf();
  RegSplit split = best_reg_split(X, residual, rows);
  if (!split.found) return make_leaf();

  std::vector<std::size_t> left_rows, right_rows;
  for (std::size_t r : rows)
    (X[r][static_cast<std::size_t>(split.feature)] <= split.threshold
         ? left_rows
         : right_rows)
        .push_back(r);
  if (left_rows.empty() || right_rows.empty()) return make_leaf();
  rows.clear();

  nodes.emplace_back();
  int self = static_cast<int>(nodes.size() - 1);
  nodes[self].feature = split.feature;
  nodes[self].threshold = split.threshold;
  int left = grow_reg_node(X, residual, hessian, std::move(left_rows),
                           depth + 1, max_depth, nodes);
  int right = grow_reg_node(X, residual, hessian, std::move(right_rows),
                            depth + 1, max_depth, nodes);
  nodes[self].left = left;
  nodes[self].right = right;
  return self;
}

double reg_tree_value(const std::vector<RegNode>& nodes,
                      const std::vector<double>& x) {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const RegNode& node = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(node.feature)] <= node.threshold
            ? node.left
            : node.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

// Log-loss gradient boosting: F_0 = prior log-odds, then depth-limited
// regression trees on residuals y - sigmoid(F), scaled by the learning rate.
class GradientBoostingClassifier final : public Classifier {
 public:
  explicit GradientBoostingClassifier(ModelSpec spec)
      : Classifier(std::move(spec)) {
    n_trees_ = param_int(spec_.params, "n_trees");
    learning_rate_ = param_double(spec_.params, "learning_rate");
    max_depth_ = param_int(spec_.params, "max_depth");
  }

  void fit(const Rows& X, const Labels& y) override {
    check_fit_inputs(X, y, /*allow_single_class=*/false);
    const std::size_t n = X.size();

    double positives = 0.0;
    for (int label : y) positives += label;
    double p = std::clamp(positives / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
    prior_ = std::log(p / (1.0 - p));

    std::vector<double> f(n, prior_);
    std::vector<double> residual(n), hessian(n);
    std::vector<std::size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);

    trees_.clear();
    trees_.reserve(static_cast<std::size_t>(n_trees_));
    for (int t = 0; t < n_trees_; ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        double prob = sigmoid(f[i]);
        residual[i] = static_cast<double>(y[i]) - prob;
        hessian[i] = prob * (1.0 - prob);
      }
      std::vector<RegNode> tree;
      grow_reg_node(X, residual, hessian, all_rows, 0, max_depth_, tree);
      for (std::size_t i = 0; i < n; ++i)
        f[i] += learning_rate_ * reg_tree_value(tree, X[i]);
      trees_.push_back(std::move(tree));
    }
    set_feature_count(X.front().size());
  }

  Labels predict(const Rows& X) const override {
    Labels out;
    out.reserve(X.size());
    for (double s : decision_scores(X)) out.push_back(s > 0.0 ? 1 : 0);
    return out;
  }

  std::vector<double> decision_scores(const Rows& X) const override {
    check_predict_input(X);
    std::vector<double> out;
    out.reserve(X.size());
    for (const auto& x : X) {
      double f = prior_;
      for (const auto& tree : trees_)
        f += learning_rate_ * reg_tree_value(tree, x);
      out.push_back(f);
    }
    return out;
  }

  std::map<std::string, std::vector<double>> state() const override {
    std::map<std::string, std::vector<double>> s;
    std::vector<double> nodes, offsets;
    for (const auto& tree : trees_) {
      offsets.push_back(static_cast<double>(nodes.size()));
      for (const RegNode& node : tree) {
        nodes.push_back(node.feature);
        nodes.push_back(node.threshold);
        nodes.push_back(node.left);
        nodes.push_back(node.right);
        nodes.push_back(node.value);
      }
    }
    offsets.push_back(static_cast<double>(nodes.size()));
    s["tree_nodes"] = std::move(nodes);
    s["tree_offsets"] = std::move(offsets);
    s["prior"] = {prior_};
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
      if (end < begin || end > nodes.size() || (end - begin) % 5 != 0)
        throw DataError("gradient_boosting restore: malformed tree arrays");
      std::vector<RegNode> tree((end - begin) / 5);
      for (std::size_t i = 0; i < tree.size(); ++i) {
        const double* p = nodes.data() + begin + i * 5;
        tree[i].feature = static_cast<int>(p[0]);
        tree[i].threshold = p[1];
        tree[i].left = static_cast<int>(p[2]);
        tree[i].right = static_cast<int>(p[3]);
        tree[i].value = p[4];
      }
      trees_.push_back(std::move(tree));
    }
    prior_ = s.at("prior").at(0);
    set_feature_count(static_cast<std::size_t>(s.at("feature_count").at(0)));
  }

 private:
  int n_trees_ = 100;
  double learning_rate_ = 0.1;
  int max_depth_ = 2;
  double prior_ = 0.0;
  std::vector<std::vector<RegNode>> trees_;
};

}  // namespace

std::unique_ptr<Classifier> make_gradient_boosting(const ModelSpec& spec) {
  return std::make_unique<GradientBoostingClassifier>(spec);
}

}  // namespace pdvoice::ml::detail
