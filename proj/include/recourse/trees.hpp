#ifndef RECOURSE_TREES_HPP
#define RECOURSE_TREES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "recourse/dataset.hpp"
#include "recourse/models.hpp"

namespace recourse {

/// Internal nodes route x to `left` when x[feature] <= threshold, to `right` otherwise.
/// Leaves have feature == -1 and carry class probabilities.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  Eigen::VectorXd class_probs;

  bool is_leaf() const { return feature < 0; }
};

class DecisionTree {
public:
  /// Node 0 is the root; children must have larger indices than their parent.
  DecisionTree(std::vector<TreeNode> nodes, Eigen::Index dims, int n_classes);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int leaf_for(const Eigen::VectorXd& x) const;
  std::size_t leaf_count() const;
  int depth() const;

private:
  std::vector<TreeNode> nodes_;
};

enum class VoteRule { Majority, Average };

/// A single CART tree or a forest. With one tree, probabilities are the leaf distribution;
/// a forest reports either vote fractions (majority) or the mean leaf distribution.
class TreeModel final : public Model {
public:
  TreeModel(std::vector<DecisionTree> trees, Eigen::Index dims, int n_classes, VoteRule vote = VoteRule::Majority);

  const std::vector<DecisionTree>& trees() const { return trees_; }
  VoteRule vote() const { return vote_; }

  std::string kind() const override { return trees_.size() == 1 ? "tree" : "forest"; }
  Eigen::Index input_dim() const override { return dims_; }
  int n_classes() const override { return classes_; }
  Likelihood likelihood() const override { return classes_ == 2 ? Likelihood::Binary : Likelihood::Multiclass; }
  bool differentiable() const override { return false; }
  /// Log-probabilities, one row per class (floored at 1e-12).
  Eigen::MatrixXd logits(const Eigen::MatrixXd& X) const override;
  Eigen::MatrixXd probs(const Eigen::MatrixXd& X) const override;
  double loss(const Eigen::VectorXd& x, int target, LossId id) const override;
  nlohmann::json to_json() const override;

private:
  std::vector<DecisionTree> trees_;
  Eigen::Index dims_;
  int classes_;
  VoteRule vote_;
};

/// Greedy CART with Gini impurity. The root sits at depth 0, so `max_depth` bounds the number
/// of splits along any path.
TreeModel train_tree(const Dataset& d, int max_depth, int min_leaf = 1);

/// Bagged CART trees combined by majority vote. `max_features` > 0 samples that many candidate
/// features per split; 0 uses all of them.
TreeModel train_forest(const Dataset& d, int n_trees, int max_depth, std::uint64_t seed, int min_leaf = 1,
                       int max_features = 0);

}  // namespace recourse

#endif  // RECOURSE_TREES_HPP
