#include <algorithm>
#include <cmath>
#include <numeric>

#include "internal.hpp"
#include "pdvoice/errors.hpp"

namespace pdvoice::ml::detail {

namespace {

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted Gini after the split
};

double gini(double n1, double n) {
  if (n <= 0.0) return 0.0;
  double p = n1 / n;
  return 2.0 * p * (1.0 - p);
}

// Best (feature, threshold) by weighted Gini over candidate features.
// Thresholds are midpoints between consecutive distinct sorted values; ties
// break toward the lowest feature index, then the lowest threshold.
SplitChoice best_split(const Rows& X, const Labels& y,
                       const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& features,
                       int min_leaf) {
  SplitChoice best;
  const auto n = static_cast<double>(rows.size());
  std::vector<std::pair<double, int>> values(rows.size());

  for (std::size_t f : features) {
    for (std::size_t i = 0; i < rows.size(); ++i)
      values[i] = {X[rows[i]][f], y[rows[i]]};
    std::sort(values.begin(), values.end());

    double total_ones = 0.0;
    for (const auto& [v, label] : values) total_ones += label;

    double left_n = 0.0, left_ones = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      left_n += 1.0;
      left_ones += values[i].second;
      if (values[i].first == values[i + 1].first) continue;
      double right_n = n - left_n;
      if (left_n < min_leaf || right_n < min_leaf) continue;
      double impurity = (left_n / n) * gini(left_ones, left_n) +
                        (right_n / n) * gini(total_ones - left_ones, right_n);
      double threshold = 0.5 * (values[i].first + values[i + 1].first);
      bool better =
          !best.found || impurity < best.impurity - 1e-15 ||
          (std::abs(impurity - best.impurity) <= 1e-15 &&
           (static_cast<int>(f) < best.feature ||
            (static_cast<int>(f) == best.feature && threshold < best.threshold)));
      if (better) {
        best = {true, static_cast<int>(f), threshold, impurity};
      }
    }
  }
  return best;
}

int grow_node(const Rows& X, const Labels& y, std::vector<std::size_t> rows,
              const TreeOptions& opts, Rng* rng, int depth,
              std::vector<TreeNode>& nodes) {
  double ones = 0.0;
  for (std::size_t r : rows) ones += y[r];
  const auto n = static_cast<double>(rows.size());

  auto make_leaf = [&]() {
    TreeNode leaf;
    leaf.fraction = ones / n;
    leaf.label = ones * 2.0 > n ? 1 : 0;
    nodes.push_back(leaf);
    return static_cast<int>(nodes.size() - 1);
  };

  bool pure = ones == 0.0 || ones == n;
  bool depth_capped = opts.max_depth > 0 && depth >= opts.max_depth;
  if (pure || depth_capped || rows.size() < 2 * static_cast<std::size_t>(opts.min_leaf))
    return make_leaf();

  const std::size_t num_features = X.front().size();
  std::vector<std::size_t> features(num_features);
  std::iota(features.begin(), features.end(), 0);
  if (opts.max_features > 0 &&
      static_cast<std::size_t>(opts.max_features) < num_features) {
    // draw max_features distinct indices, then keep them in ascending order
    // so tie-breaking is independent of the draw order
    for (std::size_t i = 0; i < static_cast<std::size_t>(opts.max_features); ++i)
      std::swap(features[i], features[i + rng->next_index(num_features - i)]);
    features.resize(static_cast<std::size_t>(opts.max_features));
    std::sort(features.begin(), features.end());
  }

  SplitChoice split = best_split(X, y, rows, features, opts.min_leaf);
  if (!split.found) return make_leaf();

  std::vector<std::size_t> left_rows, right_rows;
  for (std::size_t r : rows)
    (X[r][static_cast<std::size_t>(split.feature)] <= split.threshold
         ? left_rows
         : right_rows)
        .push_back(r);
  if (left_rows.empty() || right_rows.empty()) return make_leaf();
  rows.clear();
  rows.shrink_to_fit();

  nodes.emplace_back();
  int self = static_cast<int>(nodes.size() - 1);
  nodes[self].feature = split.feature;
  nodes[self].threshold = split.threshold;
  int left = grow_node(X, y, std::move(left_rows), opts, rng, depth + 1, nodes);
  int right = grow_node(X, y, std::move(right_rows), opts, rng, depth + 1, nodes);
  nodes[self].left = left;
  nodes[self].right = right;
  return self;
}

}  // namespace

std::vector<TreeNode> grow_gini_tree(const Rows& X, const Labels& y,
                                     const std::vector<std::size_t>& rows,
                                     const TreeOptions& opts, Rng* rng) {
  if (rows.empty()) throw PreconditionError("grow_gini_tree: no rows");
  std::vector<TreeNode> nodes;
  grow_node(X, y, rows, opts, rng, 0, nodes);
  return nodes;
}

const TreeNode& tree_leaf(const std::vector<TreeNode>& nodes,
                          const std::vector<double>& x) {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const TreeNode& node = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                    : node.right;
  }
  return nodes[static_cast<std::size_t>(i)];
}

std::vector<double> pack_tree(const std::vector<TreeNode>& nodes) {
  std::vector<double> out;
  out.reserve(nodes.size() * 6);
  for (const TreeNode& n : nodes) {
    out.push_back(n.feature);
    out.push_back(n.threshold);
    out.push_back(n.left);
    out.push_back(n.right);
    out.push_back(n.label);
    out.push_back(n.fraction);
  }
  return out;
}

std::vector<TreeNode> unpack_tree(const std::vector<double>& packed) {
  if (packed.size() % 6 != 0)
    throw DataError("unpack_tree: malformed node array");
  std::vector<TreeNode> nodes(packed.size() / 6);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double* p = packed.data() + i * 6;
    nodes[i].feature = static_cast<int>(p[0]);
    nodes[i].threshold = p[1];
    nodes[i].left = static_cast<int>(p[2]);
    nodes[i].right = static_cast<int>(p[3]);
    nodes[i].label = static_cast<int>(p[4]);
    nodes[i].fraction = p[5];
  }
  return nodes;
}

namespace {

class DecisionTreeClassifier final : public Classifier {
 public:
  explicit DecisionTreeClassifier(ModelSpec spec) : Classifier(std::move(spec)) {}

  void fit(const Rows& X, const Labels& y) override {
    check_fit_inputs(X, y, /*allow_single_class=*/false);
    TreeOptions opts;
    opts.max_depth = param_int(spec_.params, "max_depth");
    opts.min_leaf = param_int(spec_.params, "min_leaf");
    std::vector<std::size_t> rows(X.size());
    std::iota(rows.begin(), rows.end(), 0);
    nodes_ = grow_gini_tree(X, y, rows, opts, nullptr);
    set_feature_count(X.front().size());
  }

  Labels predict(const Rows& X) const override {
    check_predict_input(X);
    Labels out;
    out.reserve(X.size());
    for (const auto& x : X) out.push_back(tree_leaf(nodes_, x).label);
    return out;
  }

  std::vector<double> decision_scores(const Rows& X) const override {
    check_predict_input(X);
    std::vector<double> out;
    out.reserve(X.size());
    for (const auto& x : X) out.push_back(tree_leaf(nodes_, x).fraction);
    return out;
  }

  std::map<std::string, std::vector<double>> state() const override {
    return {{"nodes", pack_tree(nodes_)},
            {"feature_count", {static_cast<double>(feature_count())}}};
  }

  void restore(const std::map<std::string, std::vector<double>>& s) override {
    nodes_ = unpack_tree(s.at("nodes"));
    set_feature_count(static_cast<std::size_t>(s.at("feature_count").at(0)));
  }

 private:
  std::vector<TreeNode> nodes_;
};

}  // namespace

std::unique_ptr<Classifier> make_decision_tree(const ModelSpec& spec) {
  return std::make_unique<DecisionTreeClassifier>(spec);
}

}  // namespace pdvoice::ml::detail
