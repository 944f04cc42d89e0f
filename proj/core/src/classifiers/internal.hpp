#pragma once

// Shared internals for the classifier family implementations.

#include <memory>

#include "pdvoice/classifiers.hpp"
#include "pdvoice/rng.hpp"

namespace pdvoice::ml::detail {

std::unique_ptr<Classifier> make_knn(const ModelSpec& spec);
std::unique_ptr<Classifier> make_decision_tree(const ModelSpec& spec);
std::unique_ptr<Classifier> make_svm(const ModelSpec& spec);
std::unique_ptr<Classifier> make_naive_bayes(const ModelSpec& spec);
std::unique_ptr<Classifier> make_logistic_regression(const ModelSpec& spec);
std::unique_ptr<Classifier> make_gradient_boosting(const ModelSpec& spec);
std::unique_ptr<Classifier> make_random_forest(const ModelSpec& spec);

// Throws on empty data, ragged rows, non-finite values, bad labels, or (when
// allow_single_class is false) a single-class target.
void check_fit_inputs(const Rows& X, const Labels& y, bool allow_single_class);

int param_int(const ParamMap& p, const std::string& name);
double param_double(const ParamMap& p, const std::string& name);
const std::string& param_string(const ParamMap& p, const std::string& name);
bool param_is_string(const ParamMap& p, const std::string& name);

// ---- logistic regression internals, exposed for the gradient check ----

namespace lr {

double loss(const Rows& X, const Labels& y, const std::vector<double>& w,
            double b, double lambda);

void gradient(const Rows& X, const Labels& y, const std::vector<double>& w,
              double b, double lambda, std::vector<double>& grad_w,
              double& grad_b);

}  // namespace lr

// ---- CART (Gini) used by decision_tree and random_forest ----

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = 0;        // leaf: majority label (tie -> 0)
  double fraction = 0;  // leaf: fraction of class-1 rows
};

struct TreeOptions {
  int max_depth = 0;     // 0 = unlimited
  int min_leaf = 1;      // minimum rows per leaf
  int max_features = 0;  // per-split feature subsample; 0 = all
};

// Greedy binary splits minimizing weighted Gini impurity; equal-impurity ties
// break toward the lowest feature index, then the lowest threshold. When
// opts.max_features > 0 each split draws that many distinct features from rng.
std::vector<TreeNode> grow_gini_tree(const Rows& X, const Labels& y,
                                     const std::vector<std::size_t>& rows,
                                     const TreeOptions& opts, Rng* rng);

const TreeNode& tree_leaf(const std::vector<TreeNode>& nodes,
                          const std::vector<double>& x);

// Flattens node arrays for persistence (6 numbers per node).
std::vector<double> pack_tree(const std::vector<TreeNode>& nodes);
std::vector<TreeNode> unpack_tree(const std::vector<double>& packed);

}  // namespace pdvoice::ml::detail
