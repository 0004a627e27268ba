#include "recourse/trees.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "recourse/errors.hpp"
#include "recourse/json_util.hpp"

namespace recourse {

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, Eigen::Index dims, int n_classes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw ConfigError("decision tree needs at least one node");
  const auto count = static_cast<int>(nodes_.size());
  for (int i = 0; i < count; ++i) {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    if (n.is_leaf()) {
      if (n.class_probs.size() != n_classes) throw DimensionError("leaf probability vector has wrong length");
      if ((n.class_probs.array() < 0.0).any() || std::abs(n.class_probs.sum() - 1.0) > 1e-9) {
        throw ConfigError("leaf probabilities must be non-negative and sum to one");
      }
    } else {
      if (n.feature >= dims) throw DimensionError("split feature index out of range");
      if (n.left <= i || n.right <= i || n.left >= count || n.right >= count) {
        throw ConfigError("tree children must point forward to existing nodes");
      }
    }
  }
  // Every path must describe a non-empty half-open box.
  std::vector<double> lo(static_cast<std::size_t>(dims), -std::numeric_limits<double>::infinity());
  std::vector<double> hi(static_cast<std::size_t>(dims), std::numeric_limits<double>::infinity());
  std::function<void(int)> check = [&](int idx) {
    const auto& n = nodes_[static_cast<std::size_t>(idx)];
    if (n.is_leaf()) return;
    const auto f = static_cast<std::size_t>(n.feature);
    if (!(n.threshold > lo[f] && n.threshold < hi[f])) {
      throw ConfigError("tree split on feature " + std::to_string(n.feature) + " at " + format_double(n.threshold) +
                        " yields an empty region");
    }
    const double saved_hi = hi[f];
    hi[f] = n.threshold;
    check(n.left);
    hi[f] = saved_hi;
    const double saved_lo = lo[f];
    lo[f] = n.threshold;
    check(n.right);
    lo[f] = saved_lo;
  };
  check(0);
}

int DecisionTree::leaf_for(const Eigen::VectorXd& x) const {
  int idx = 0;
  while (!nodes_[static_cast<std::size_t>(idx)].is_leaf()) {
    const auto& n = nodes_[static_cast<std::size_t>(idx)];
    idx = x(n.feature) <= n.threshold ? n.left : n.right;
  }
  return idx;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int DecisionTree::depth() const {
  std::function<int(int)> rec = [&](int idx) -> int {
    const auto& n = nodes_[static_cast<std::size_t>(idx)];
    if (n.is_leaf()) return 0;
    return 1 + std::max(rec(n.left), rec(n.right));
  };
  return rec(0);
}

TreeModel::TreeModel(std::vector<DecisionTree> trees, Eigen::Index dims, int n_classes, VoteRule vote)
    : trees_(std::move(trees)), dims_(dims), classes_(n_classes), vote_(vote) {
  if (trees_.empty()) throw ConfigError("tree model needs at least one tree");
  if (classes_ < 2) throw ConfigError("tree model needs at least two classes");
}

Eigen::MatrixXd TreeModel::probs(const Eigen::MatrixXd& X) const {
  check_input(X);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(classes_, X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const Eigen::VectorXd x = X.col(c);
    if (trees_.size() == 1) {
      out.col(c) = trees_.front().nodes()[static_cast<std::size_t>(trees_.front().leaf_for(x))].class_probs;
      continue;
    }
    for (const auto& tree : trees_) {
      const auto& p = tree.nodes()[static_cast<std::size_t>(tree.leaf_for(x))].class_probs;
      if (vote_ == VoteRule::Average) {
        out.col(c) += p;
      } else {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < p.size(); ++k) {
          if (p(k) > p(best)) best = k;
        }
        out(best, c) += 1.0;
      }
    }
    out.col(c) /= static_cast<double>(trees_.size());
  }
  return out;
}

Eigen::MatrixXd TreeModel::logits(const Eigen::MatrixXd& X) const {
  return probs(X).array().max(1e-12).log().matrix();
}

double TreeModel::loss(const Eigen::VectorXd& x, int target, LossId) const {
  if (target < 1 || target > classes_) throw ConfigError("target label out of range");
  return -std::log(std::max(probs(x)(target - 1), 1e-12));
}

nlohmann::json TreeModel::to_json() const {
  auto trees = nlohmann::json::array();
  for (const auto& tree : trees_) {
    auto nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes()) {
      if (n.is_leaf()) {
        nodes.push_back({{"probs", vector_to_json(n.class_probs)}});
      } else {
        nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
      }
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  return {{"kind", kind()},
          {"version", 1},
          {"dims", {{"input", dims_}, {"classes", classes_}}},
          {"trees", std::move(trees)},
          {"vote", vote_ == VoteRule::Majority ? "majority" : "average"},
          {"likelihood", to_string(likelihood())}};
}

// ---------------------------------------------------------------------------
// CART

namespace {

double gini(const std::vector<double>& counts, double n) {
  if (n <= 0.0) return 0.0;
  double s = 0.0;
  for (double c : counts) s += (c / n) * (c / n);
  return 1.0 - s;
}

struct CartBuilder {
  const Eigen::MatrixXd& X;
  const std::vector<int>& y;
  int classes;
  int max_depth;
  int min_leaf;
  int max_features;
  std::mt19937_64* rng;
  std::vector<TreeNode> nodes;

  Eigen::VectorXd distribution(const std::vector<Eigen::Index>& rows) const {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(classes);
    for (auto r : rows) p(y[static_cast<std::size_t>(r)] - 1) += 1.0;
    return p / static_cast<double>(rows.size());
  }

  int build(std::vector<Eigen::Index> rows, int depth) {
    const int idx = static_cast<int>(nodes.size());
    nodes.emplace_back();
    const Eigen::VectorXd dist = distribution(rows);
    const double n = static_cast<double>(rows.size());
    const bool pure = (dist.array() == 1.0).any();
    if (pure || depth >= max_depth || rows.size() < 2 * static_cast<std::size_t>(min_leaf)) {
      nodes[static_cast<std::size_t>(idx)].class_probs = dist;
      return idx;
    }

    std::vector<Eigen::Index> features(static_cast<std::size_t>(X.cols()));
    std::iota(features.begin(), features.end(), 0);
    if (max_features > 0 && max_features < X.cols() && rng != nullptr) {
      for (std::size_t i = features.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(features[i - 1], features[pick(*rng)]);
      }
      features.resize(static_cast<std::size_t>(max_features));
      std::sort(features.begin(), features.end());
    }

    std::vector<double> parent_counts(static_cast<std::size_t>(classes), 0.0);
    for (auto r : rows) parent_counts[static_cast<std::size_t>(y[static_cast<std::size_t>(r)] - 1)] += 1.0;
    double best_score = gini(parent_counts, n) - 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<Eigen::Index> sorted = rows;
    for (auto j : features) {
      std::stable_sort(sorted.begin(), sorted.end(), [&](Eigen::Index a, Eigen::Index b) { return X(a, j) < X(b, j); });
      std::vector<double> left(static_cast<std::size_t>(classes), 0.0);
      std::vector<double> right = parent_counts;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const auto label = static_cast<std::size_t>(y[static_cast<std::size_t>(sorted[i])] - 1);
        left[label] += 1.0;
        right[label] -= 1.0;
        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double a = X(sorted[i], j);
        const double b = X(sorted[i + 1], j);
        if (!(a < b)) continue;
        const double score = (nl * gini(left, nl) + nr * gini(right, nr)) / n;
        if (score < best_score) {
          best_score = score;
          best_feature = static_cast<int>(j);
          double mid = a + 0.5 * (b - a);
          if (!(mid < b)) mid = a;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) {
      nodes[static_cast<std::size_t>(idx)].class_probs = dist;
      return idx;
    }
    std::vector<Eigen::Index> left_rows;
    std::vector<Eigen::Index> right_rows;
    for (auto r : rows) (X(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = build(std::move(left_rows), depth + 1);
    const int r = build(std::move(right_rows), depth + 1);
    auto& node = nodes[static_cast<std::size_t>(idx)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return idx;
  }
};

DecisionTree fit_cart(const Eigen::MatrixXd& X, const std::vector<int>& y, int classes, std::vector<Eigen::Index> rows,
                      int max_depth, int min_leaf, int max_features, std::mt19937_64* rng) {
  CartBuilder builder{X, y, classes, max_depth, min_leaf, max_features, rng, {}};
  builder.build(std::move(rows), 0);
  return DecisionTree(std::move(builder.nodes), X.cols(), classes);
}

void check_tree_config(const Dataset& d, int max_depth, int min_leaf) {
  if (max_depth < 1) throw ConfigError("tree depth must be at least 1");
  if (min_leaf < 1) throw ConfigError("minimum leaf size must be at least 1");
  if (d.rows() < 2 * static_cast<Eigen::Index>(min_leaf)) {
    throw ConfigError("tree training needs at least 2 * min_leaf rows");
  }
}

}  // namespace

TreeModel train_tree(const Dataset& d, int max_depth, int min_leaf) {
  check_tree_config(d, max_depth, min_leaf);
  const int classes = std::max(2, d.n_classes());
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(d.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<DecisionTree> trees{fit_cart(d.X(), d.y(), classes, std::move(rows), max_depth, min_leaf, 0, nullptr)};
  return TreeModel(std::move(trees), d.dims(), classes);
}

TreeModel train_forest(const Dataset& d, int n_trees, int max_depth, std::uint64_t seed, int min_leaf,
                       int max_features) {
  check_tree_config(d, max_depth, min_leaf);
  if (n_trees < 1) throw ConfigError("forest needs at least one tree");
  const int classes = std::max(2, d.n_classes());
  std::mt19937_64 rng(seed);
  std::vector<DecisionTree> trees;
  const auto n = static_cast<std::size_t>(d.rows());
  for (int t = 0; t < n_trees; ++t) {
    std::vector<Eigen::Index> rows(n);
    std::uniform_int_distribution<Eigen::Index> pick(0, d.rows() - 1);
    for (auto& r : rows) r = pick(rng);
    trees.push_back(fit_cart(d.X(), d.y(), classes, std::move(rows), max_depth, min_leaf, max_features, &rng));
  }
  return TreeModel(std::move(trees), d.dims(), classes, VoteRule::Majority);
}

}  // namespace recourse
